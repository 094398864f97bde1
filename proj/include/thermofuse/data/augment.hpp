#ifndef THERMOFUSE_DATA_AUGMENT_HPP
#define THERMOFUSE_DATA_AUGMENT_HPP

#include <algorithm>
#include <cmath>

#include "thermofuse/core/image.hpp"
#include "thermofuse/core/rng.hpp"
#include "thermofuse/data/sample.hpp"

namespace thermofuse::data {

struct JitterConfig {
    double brightness = 0.2;
    double contrast = 0.2;
    double saturation = 0.2;
    double hue = 0.1;

    bool active() const {
        return brightness > 0 || contrast > 0 || saturation > 0 || hue > 0;
    }
};

struct AugmentationConfig {
    double hflip_p = 0.3;
    double rotation_deg = 10.0;
    bool affine = true;            // translate <= 5%, scale in [0.95, 1.05], no shear
    bool crop_resize = true;       // random crop at >= 90% area, resized back
    JitterConfig jitter;
    bool photometric_rgb_only = true;

    static AugmentationConfig none() {
        AugmentationConfig c;
        c.hflip_p = 0;
        c.rotation_deg = 0;
        c.affine = false;
        c.crop_resize = false;
        c.jitter = {0, 0, 0, 0};
        return c;
    }
};

namespace detail {

inline float clamp01(float x) { return std::min(1.f, std::max(0.f, x)); }

inline float luma(float r, float g, float b) {
    return 0.299f * r + 0.587f * g + 0.114f * b;
}

// crop [y0,y0+ch) x [x0,x0+cw) and resize back to the source size
inline ImageF crop_and_resize(const ImageF& src, int y0, int x0, int ch_, int cw_) {
    ImageF out(src.channels, src.height, src.width);
    const float sy = float(ch_) / float(src.height);
    const float sx = float(cw_) / float(src.width);
    for (int c = 0; c < src.channels; ++c) {
        const float* sp = src.plane(c);
        for (int y = 0; y < src.height; ++y) {
            const float fy = float(y0) + (float(y) + 0.5f) * sy - 0.5f;
            for (int x = 0; x < src.width; ++x) {
                const float fx = float(x0) + (float(x) + 0.5f) * sx - 0.5f;
                out.at(c, y, x) = sample_bilinear(sp, src.height, src.width, fy, fx);
            }
        }
    }
    return out;
}

inline void apply_jitter_rgb(ImageF& img, int n_rgb, float b, float c, float s, float hshift) {
    const std::size_t npx = std::size_t(img.height) * img.width;
    if (n_rgb < 3) return;
    float* rp = img.plane(0);
    float* gp = img.plane(1);
    float* bp = img.plane(2);

    if (b != 1.f)
        for (std::size_t i = 0; i < npx; ++i) {
            rp[i] = clamp01(rp[i] * b);
            gp[i] = clamp01(gp[i] * b);
            bp[i] = clamp01(bp[i] * b);
        }
    if (c != 1.f) {
        double acc = 0.0;
        for (std::size_t i = 0; i < npx; ++i) acc += luma(rp[i], gp[i], bp[i]);
        const float mean = float(acc / double(npx));
        for (std::size_t i = 0; i < npx; ++i) {
            rp[i] = clamp01(mean + c * (rp[i] - mean));
            gp[i] = clamp01(mean + c * (gp[i] - mean));
            bp[i] = clamp01(mean + c * (bp[i] - mean));
        }
    }
    if (s != 1.f)
        for (std::size_t i = 0; i < npx; ++i) {
            const float l = luma(rp[i], gp[i], bp[i]);
            rp[i] = clamp01(l + s * (rp[i] - l));
            gp[i] = clamp01(l + s * (gp[i] - l));
            bp[i] = clamp01(l + s * (bp[i] - l));
        }
    if (hshift != 0.f)
        for (std::size_t i = 0; i < npx; ++i) {
            auto hsv = rgb_to_hsv(rp[i], gp[i], bp[i]);
            float h = hsv[0] + hshift;
            h -= std::floor(h);
            auto rgb = hsv_to_rgb(h, hsv[1], hsv[2]);
            rp[i] = clamp01(rgb[0]);
            gp[i] = clamp01(rgb[1]);
            bp[i] = clamp01(rgb[2]);
        }
}

}  // namespace detail

// Geometric transforms hit all channels with one set of sampled parameters;
// photometric jitter touches only the RGB planes (the thermal plane — or a
// THERMAL-replicated sample — passes through bitwise unchanged).
inline FusedSample augment(const FusedSample& sample, const AugmentationConfig& cfg, Rng& rng) {
    FusedSample out = sample;
    ImageF& img = out.image;
    const int H = img.height, W = img.width;

    if (cfg.hflip_p > 0 && rng.bernoulli(cfg.hflip_p)) img = hflip(img);

    const bool rotate = cfg.rotation_deg > 0;
    if (rotate || cfg.affine) {
        const float deg = rotate ? float(rng.uniform(-cfg.rotation_deg, cfg.rotation_deg)) : 0.f;
        float scale = 1.f, tx = 0.f, ty = 0.f;
        if (cfg.affine) {
            tx = float(rng.uniform(-0.05, 0.05)) * float(W);
            ty = float(rng.uniform(-0.05, 0.05)) * float(H);
            scale = float(rng.uniform(0.95, 1.05));
        }
        const auto a = Affine2x3::inverse_rst(0.5f * float(W - 1), 0.5f * float(H - 1),
                                              deg, scale, tx, ty);
        img = warp_affine(img, a, 0.f);
    }

    if (cfg.crop_resize) {
        // area >= 90%, so a lesion near the border survives
        const double side = std::sqrt(rng.uniform(0.90, 1.0));
        const int ch_ = std::max(1, int(std::lround(side * H)));
        const int cw_ = std::max(1, int(std::lround(side * W)));
        const int y0 = ch_ < H ? int(rng.uniform_int(0, std::int64_t(H - ch_))) : 0;
        const int x0 = cw_ < W ? int(rng.uniform_int(0, std::int64_t(W - cw_))) : 0;
        if (ch_ != H || cw_ != W) img = detail::crop_and_resize(img, y0, x0, ch_, cw_);
    }

    const int n_rgb = cfg.photometric_rgb_only ? out.rgb_channels() : img.channels;
    if (cfg.jitter.active() && n_rgb >= 3) {
        const auto& j = cfg.jitter;
        const float b = j.brightness > 0 ? float(rng.uniform(1.0 - j.brightness, 1.0 + j.brightness)) : 1.f;
        const float c = j.contrast > 0 ? float(rng.uniform(1.0 - j.contrast, 1.0 + j.contrast)) : 1.f;
        const float s = j.saturation > 0 ? float(rng.uniform(1.0 - j.saturation, 1.0 + j.saturation)) : 1.f;
        const float h = j.hue > 0 ? float(rng.uniform(-j.hue, j.hue)) : 0.f;
        detail::apply_jitter_rgb(img, n_rgb, b, c, s, h);
    }
    return out;
}

}  // namespace thermofuse::data

#endif
