#ifndef THERMOFUSE_CORE_IMAGE_HPP
#define THERMOFUSE_CORE_IMAGE_HPP

// Planar float image (CHW) plus the raster ops the data pipeline needs:
// bilinear resize, inverse-mapped affine warp, RGB<->HSV.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "thermofuse/io/png.hpp"

namespace thermofuse {

struct ImageF {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> v;  // planar CHW

    ImageF() = default;
    ImageF(int c, int h, int w) : channels(c), height(h), width(w),
                                  v(std::size_t(c) * h * w, 0.f) {}

    float& at(int c, int y, int x) { return v[(std::size_t(c) * height + y) * width + x]; }
    float at(int c, int y, int x) const { return v[(std::size_t(c) * height + y) * width + x]; }

    float* plane(int c) { return v.data() + std::size_t(c) * height * width; }
    const float* plane(int c) const { return v.data() + std::size_t(c) * height * width; }
};

// PNG samples (interleaved, 8 or 16 bit) to planar floats in [0,1].
inline ImageF image_from_png(const io::PngImage& png) {
    ImageF img(png.channels, png.height, png.width);
    const float scale = png.bit_depth == 8 ? 1.f / 255.f : 1.f / 65535.f;
    std::size_t si = 0;
    for (int y = 0; y < png.height; ++y)
        for (int x = 0; x < png.width; ++x)
            for (int c = 0; c < png.channels; ++c)
                img.at(c, y, x) = png.samples[si++] * scale;
    return img;
}

inline io::PngImage image_to_png8(const ImageF& img) {
    io::PngImage png;
    png.width = img.width;
    png.height = img.height;
    png.channels = img.channels;
    png.bit_depth = 8;
    png.samples.resize(std::size_t(img.width) * img.height * img.channels);
    std::size_t si = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const float f = std::clamp(img.at(c, y, x), 0.f, 1.f);
                png.samples[si++] = static_cast<std::uint16_t>(std::lround(f * 255.f));
            }
    return png;
}

inline float sample_bilinear(const float* plane, int h, int w, float fy, float fx) {
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const float dx = fx - x0, dy = fy - y0;
    auto px = [&](int y, int x) -> float {
        y = std::clamp(y, 0, h - 1);
        x = std::clamp(x, 0, w - 1);
        return plane[std::size_t(y) * w + x];
    };
    return (1 - dy) * ((1 - dx) * px(y0, x0) + dx * px(y0, x0 + 1)) +
           dy * ((1 - dx) * px(y0 + 1, x0) + dx * px(y0 + 1, x0 + 1));
}

inline ImageF resize_bilinear(const ImageF& src, int out_h, int out_w) {
    ImageF dst(src.channels, out_h, out_w);
    const float sy = static_cast<float>(src.height) / out_h;
    const float sx = static_cast<float>(src.width) / out_w;
    for (int c = 0; c < src.channels; ++c) {
        const float* sp = src.plane(c);
        for (int y = 0; y < out_h; ++y) {
            const float fy = (y + 0.5f) * sy - 0.5f;
            for (int x = 0; x < out_w; ++x) {
                const float fx = (x + 0.5f) * sx - 0.5f;
                dst.at(c, y, x) = sample_bilinear(sp, src.height, src.width, fy, fx);
            }
        }
    }
    return dst;
}

// 2x3 affine matrix mapping OUTPUT pixel coords to SOURCE coords:
// src = M * (x, y, 1). Out-of-range samples take `fill`.
struct Affine2x3 {
    float m[6] = {1, 0, 0, 0, 1, 0};

    static Affine2x3 identity() { return {}; }

    // rotation (deg, around center), isotropic scale, translation (px)
    static Affine2x3 inverse_rst(float cx, float cy, float deg, float scale,
                                 float tx, float ty) {
        const float rad = deg * 3.14159265358979323846f / 180.f;
        const float ca = std::cos(rad) / scale, sa = std::sin(rad) / scale;
        // inverse of translate(c)*rot*scale*translate(-c)*translate(t)
        Affine2x3 a;
        a.m[0] = ca; a.m[1] = sa;
        a.m[2] = cx - ca * (cx + tx) - sa * (cy + ty);
        a.m[3] = -sa; a.m[4] = ca;
        a.m[5] = cy + sa * (cx + tx) - ca * (cy + ty);
        return a;
    }
};

inline ImageF warp_affine(const ImageF& src, const Affine2x3& a, float fill = 0.f) {
    ImageF dst(src.channels, src.height, src.width);
    for (int c = 0; c < src.channels; ++c) {
        const float* sp = src.plane(c);
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x) {
                const float sxf = a.m[0] * x + a.m[1] * y + a.m[2];
                const float syf = a.m[3] * x + a.m[4] * y + a.m[5];
                if (sxf < -0.5f || syf < -0.5f || sxf > src.width - 0.5f || syf > src.height - 0.5f) {
                    dst.at(c, y, x) = fill;
                } else {
                    dst.at(c, y, x) = sample_bilinear(sp, src.height, src.width, syf, sxf);
                }
            }
    }
    return dst;
}

inline ImageF hflip(const ImageF& src) {
    ImageF dst(src.channels, src.height, src.width);
    for (int c = 0; c < src.channels; ++c)
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x)
                dst.at(c, y, x) = src.at(c, y, src.width - 1 - x);
    return dst;
}

// h in [0,1) (wraps), s,v in [0,1]
inline std::array<float, 3> rgb_to_hsv(float r, float g, float b) {
    const float mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const float d = mx - mn;
    float h = 0.f;
    if (d > 0.f) {
        if (mx == r) h = std::fmod((g - b) / d, 6.f);
        else if (mx == g) h = (b - r) / d + 2.f;
        else h = (r - g) / d + 4.f;
        h /= 6.f;
        if (h < 0.f) h += 1.f;
    }
    const float s = mx > 0.f ? d / mx : 0.f;
    return {h, s, mx};
}

inline std::array<float, 3> hsv_to_rgb(float h, float s, float v) {
    h = h - std::floor(h);
    const float c = v * s;
    const float hp = h * 6.f;
    const float x = c * (1.f - std::fabs(std::fmod(hp, 2.f) - 1.f));
    float r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const float m = v - c;
    return {r + m, g + m, b + m};
}

}  // namespace thermofuse

#endif
