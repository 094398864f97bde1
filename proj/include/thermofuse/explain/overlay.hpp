#ifndef THERMOFUSE_EXPLAIN_OVERLAY_HPP
#define THERMOFUSE_EXPLAIN_OVERLAY_HPP

#include <algorithm>
#include <array>
#include <stdexcept>

#include "thermofuse/core/image.hpp"

namespace thermofuse::explain {

// classic "hot" ramp: black -> red -> yellow -> white
inline std::array<float, 3> colormap_hot(float v) {
    v = std::clamp(v, 0.0f, 1.0f);
    auto seg = [](float t) { return std::clamp(t, 0.0f, 1.0f); };
    return {seg(3.0f * v), seg(3.0f * v - 1.0f), seg(3.0f * v - 2.0f)};
}

// Alpha-blend the heat map over an RGB image. The blend weight scales with
// the heat value itself, so cold regions pass the photo through untouched.
inline ImageF overlay_cam(const ImageF& rgb, const ImageF& heat, float alpha = 0.4f) {
    if (rgb.channels < 3) throw std::invalid_argument("overlay_cam: need an RGB image");
    if (heat.channels < 1 || heat.height != rgb.height || heat.width != rgb.width)
        throw std::invalid_argument("overlay_cam: heat map size does not match image");
    ImageF out(3, rgb.height, rgb.width);
    const std::size_t plane = std::size_t(rgb.height) * rgb.width;
    for (std::size_t i = 0; i < plane; ++i) {
        const float h = std::clamp(heat.v[i], 0.0f, 1.0f);
        const float a = alpha * h;
        const auto tint = colormap_hot(h);
        for (int c = 0; c < 3; ++c)
            out.v[std::size_t(c) * plane + i] =
                (1.0f - a) * rgb.v[std::size_t(c) * plane + i] + a * tint[std::size_t(c)];
    }
    return out;
}

}  // namespace thermofuse::explain

#endif
