#ifndef THERMOFUSE_THERMOFUSE_HPP
#define THERMOFUSE_THERMOFUSE_HPP

// umbrella header: the whole pipeline in one include

#include "thermofuse/core/image.hpp"
#include "thermofuse/core/rng.hpp"
#include "thermofuse/core/tensor.hpp"
#include "thermofuse/io/png.hpp"
#include "thermofuse/io/tiff.hpp"
#include "thermofuse/thermal/pipeline.hpp"
#include "thermofuse/data/manifest.hpp"
#include "thermofuse/data/split.hpp"
#include "thermofuse/data/class_weights.hpp"
#include "thermofuse/data/sample.hpp"
#include "thermofuse/data/augment.hpp"
#include "thermofuse/data/loader.hpp"
#include "thermofuse/nn/layers.hpp"
#include "thermofuse/nn/graph.hpp"
#include "thermofuse/nn/loss.hpp"
#include "thermofuse/nn/optimizer.hpp"
#include "thermofuse/nn/checkpoint.hpp"
#include "thermofuse/nn/backbones.hpp"
#include "thermofuse/nn/model.hpp"
#include "thermofuse/nn/train.hpp"
#include "thermofuse/metrics/confusion.hpp"
#include "thermofuse/metrics/report.hpp"
#include "thermofuse/metrics/roc.hpp"
#include "thermofuse/explain/gradcam.hpp"
#include "thermofuse/explain/overlay.hpp"
#include "thermofuse/bench/timing.hpp"
#include "thermofuse/synth/generator.hpp"

#endif
