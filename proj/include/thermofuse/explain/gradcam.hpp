#ifndef THERMOFUSE_EXPLAIN_GRADCAM_HPP
#define THERMOFUSE_EXPLAIN_GRADCAM_HPP

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermofuse/core/image.hpp"
#include "thermofuse/core/tensor.hpp"
#include "thermofuse/data/loader.hpp"
#include "thermofuse/nn/model.hpp"

namespace thermofuse::explain {

struct NonSpatialLayer : std::runtime_error {
    explicit NonSpatialLayer(const std::string& name)
        : std::runtime_error("NonSpatialLayer: '" + name + "' has a 1x1 output, nothing to map") {}
};

struct CamResult {
    int target_class = 0;
    std::vector<double> probs;  // softmax over the 6 grades
    ImageF raw;                 // 1 x fh x fw, values in [0,1]
    ImageF heat;                // 1 x input x input, bilinear upsample of raw
    std::string layer;
};

// The backbones here downsample through same-padded stride-2 stages, so cell
// (i,j) of an fh x fw map is centred on input pixel (i*H/fh, j*W/fw) — not on
// the half-pixel grid photo resampling assumes. Painting the overlay with the
// plain o -> o*fh/H mapping keeps cam peaks on top of what caused them
// instead of dragging everything half a cell toward the bottom-right.
inline ImageF upsample_cam(const ImageF& cam, int out_h, int out_w) {
    ImageF up(1, out_h, out_w);
    const float sy = static_cast<float>(cam.height) / out_h;
    const float sx = static_cast<float>(cam.width) / out_w;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            up.at(0, y, x) = sample_bilinear(cam.plane(0), cam.height, cam.width,
                                             y * sy, x * sx);
    return up;
}

// Grad-CAM: weight each feature map by the spatial mean of d(logit)/d(map),
// combine, clip negatives, then scale so the peak is 1. An all-nonpositive
// map is left at zero rather than being stretched into fake contrast.
template <typename T>
CamResult gradcam(nn::Model<T>& model, const data::FusedSample& sample, int target_class = -1,
                  std::string layer = "") {
    if (layer.empty()) layer = model.built.cam_node;
    const int node = model.net.node_by_name(layer);  // throws UnknownLayer

    Tensor<T> x = data::sample_to_tensor<T>(sample);
    Tensor<T> z = model.logits(x, false);
    Tensor<T> p = nn::softmax(z);

    CamResult r;
    r.layer = layer;
    r.probs.resize(std::size_t(z.c));
    for (int c = 0; c < z.c; ++c) r.probs[std::size_t(c)] = double(p.data[std::size_t(c)]);
    if (target_class < 0) {
        target_class = 0;
        for (int c = 1; c < z.c; ++c)
            if (z.data[std::size_t(c)] > z.data[std::size_t(target_class)]) target_class = c;
    } else if (target_class >= z.c) {
        throw std::invalid_argument("gradcam: target class out of range");
    }
    r.target_class = target_class;

    Tensor<T> seed(z.n, z.c, 1, 1);
    seed.data[std::size_t(target_class)] = T(1);
    model.net.zero_grad();
    model.net.backward(seed);

    const Tensor<T>& fmap = model.net.node_output(node);
    const Tensor<T>& grad = model.net.node_grad(node);
    if (fmap.h * fmap.w <= 1) throw NonSpatialLayer(layer);

    const std::size_t plane = std::size_t(fmap.h) * fmap.w;
    ImageF cam(1, fmap.h, fmap.w);
    for (int k = 0; k < fmap.c; ++k) {
        const T* g = grad.data.data() + std::size_t(k) * plane;
        const T* f = fmap.data.data() + std::size_t(k) * plane;
        double alpha = 0.0;
        for (std::size_t i = 0; i < plane; ++i) alpha += double(g[i]);
        alpha /= double(plane);
        for (std::size_t i = 0; i < plane; ++i) cam.v[i] += float(alpha * double(f[i]));
    }
    float peak = 0.0f;
    for (float& v : cam.v) {
        v = std::max(v, 0.0f);
        peak = std::max(peak, v);
    }
    if (peak > 0.0f)
        for (float& v : cam.v) v /= peak;

    r.raw = cam;
    r.heat = upsample_cam(cam, x.h, x.w);
    for (float& v : r.heat.v) v = std::clamp(v, 0.0f, 1.0f);
    model.net.clear_state();
    return r;
}

}  // namespace thermofuse::explain

#endif
