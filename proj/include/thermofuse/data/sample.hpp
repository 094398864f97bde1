#ifndef THERMOFUSE_DATA_SAMPLE_HPP
#define THERMOFUSE_DATA_SAMPLE_HPP

#include <string>

#include "thermofuse/core/image.hpp"
#include "thermofuse/data/manifest.hpp"

namespace thermofuse::data {

// One model-ready sample: planar CHW float in [0,1].
// FUSED    -> 4 channels (RGB + normalized thermal)
// RGB      -> 3 channels
// THERMAL  -> normalized thermal replicated to 3 channels
struct FusedSample {
    std::string id;
    ImageF image;
    int label = 0;
    Modality modality = Modality::FUSED;

    // channels eligible for photometric transforms (thermal is untouchable)
    int rgb_channels() const { return modality == Modality::THERMAL ? 0 : 3; }
};

inline int channels_for(Modality m) { return m == Modality::FUSED ? 4 : 3; }

}  // namespace thermofuse::data

#endif
