#ifndef THERMOFUSE_SYNTH_GENERATOR_HPP
#define THERMOFUSE_SYNTH_GENERATOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermofuse/core/image.hpp"
#include "thermofuse/core/rng.hpp"
#include "thermofuse/data/manifest.hpp"
#include "thermofuse/io/png.hpp"
#include "thermofuse/io/tiff.hpp"
#include "thermofuse/thermal/pipeline.hpp"

namespace thermofuse::synth {

struct BadSpec : std::runtime_error {
    explicit BadSpec(const std::string& why) : std::runtime_error("BadSpec: " + why) {}
};

// Class structure, by construction:
//   grades 0,1  — identical thermal signature; RGB texture tells them apart
//                 (0 = clean foot, 1 = speckled foot)
//   grades 2..5 — identical RGB wound patch; the thermal hotspot peak is the
//                 only thing separating them (2 degC apart per grade)
// so neither modality alone can reach full accuracy but together they can.
struct SynthSpec {
    std::uint64_t seed = 0;
    std::array<int, data::kNumGrades> n_per_class{100, 100, 100, 100, 100, 100};
    // trailing samples of each grade get thermal_valid=false and no TIFF
    std::array<int, data::kNumGrades> n_thermal_invalid{0, 0, 0, 0, 0, 0};
    int rgb_width = 160;
    int rgb_height = 120;
    double background_c = 22.0;
    double foot_c = 31.0;
    std::array<double, 4> hotspot_peak_c{33.5, 35.5, 37.5, 39.5};  // grades 2..5
    int hotspot_radius = 18;                                       // thermal-frame pixels
    double thermal_noise_c = 0.25;
    double rgb_noise = 0.03;
};

// Table 1's per-class counts: 1205 RGB images of which 1108 have a usable
// thermal pair.
inline SynthSpec table1_spec(std::uint64_t seed = 0) {
    SynthSpec s;
    s.seed = seed;
    s.n_per_class = {150, 106, 496, 226, 184, 43};
    const std::array<int, 6> thermal = {134, 84, 456, 214, 179, 41};
    for (int g = 0; g < data::kNumGrades; ++g)
        s.n_thermal_invalid[std::size_t(g)] =
            s.n_per_class[std::size_t(g)] - thermal[std::size_t(g)];
    return s;
}

struct GroundTruth {
    std::string id;
    int grade = 0;
    bool has_hotspot = false;
    int cx = 0, cy = 0, r = 0;   // thermal-frame pixels
    double peak_c = 0.0;
    std::array<int, 4> bbox_px{};      // x0,y0,x1,y1 in the thermal frame
    std::array<double, 4> bbox_norm{}; // same box divided by frame size
};

struct SynthResult {
    data::DatasetManifest manifest;
    std::vector<GroundTruth> truth;
    std::filesystem::path manifest_path;
    std::filesystem::path truth_path;
};

namespace detail {

// foot ellipse in normalized [0,1]^2 coordinates, shared by both modalities
constexpr double kFootCx = 0.5, kFootCy = 0.52;
constexpr double kFootAx = 0.375, kFootAy = 0.375;  // of width / height

inline bool in_foot(double nx, double ny, double shrink = 1.0) {
    const double dx = (nx - kFootCx) / (kFootAx * shrink);
    const double dy = (ny - kFootCy) / (kFootAy * shrink);
    return dx * dx + dy * dy <= 1.0;
}

inline float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

}  // namespace detail

inline void validate(const SynthSpec& spec) {
    long total = 0;
    for (int g = 0; g < data::kNumGrades; ++g) {
        const int n = spec.n_per_class[std::size_t(g)];
        const int bad = spec.n_thermal_invalid[std::size_t(g)];
        if (n < 0) throw BadSpec("negative count for grade " + std::to_string(g));
        if (bad < 0 || bad > n) throw BadSpec("thermal-invalid count out of range for grade " +
                                              std::to_string(g));
        total += n;
    }
    if (total == 0) throw BadSpec("no samples requested");
    if (spec.rgb_width < 32 || spec.rgb_height < 32) throw BadSpec("rgb frame too small");
    if (spec.hotspot_radius < 4 || spec.hotspot_radius > 28)
        throw BadSpec("hotspot radius must be within the foot");
    if (spec.thermal_noise_c < 0 || spec.rgb_noise < 0) throw BadSpec("negative noise level");
}

namespace detail {

// hotspot center is kept far enough inside the foot that the whole disk
// stays on foot pixels
inline void draw_hotspot_center(Rng& rng, const SynthSpec& spec, int& cx, int& cy) {
    const int W = thermal::kFrameWidth, H = thermal::kFrameHeight;
    const int margin = spec.hotspot_radius;
    for (;;) {
        const int x = int(rng.uniform_int(0, W - 1));
        const int y = int(rng.uniform_int(0, H - 1));
        const double nx = (x + 0.5) / W, ny = (y + 0.5) / H;
        const double pad_x = double(margin + 4) / W / kFootAx;
        const double pad_y = double(margin + 4) / H / kFootAy;
        const double dx = (nx - kFootCx) / kFootAx;
        const double dy = (ny - kFootCy) / kFootAy;
        if (dx * dx + dy * dy <= (1.0 - std::max(pad_x, pad_y)) * (1.0 - std::max(pad_x, pad_y))) {
            cx = x;
            cy = y;
            return;
        }
    }
}

inline thermal::RawThermalFrame render_thermal(Rng& rng, const SynthSpec& spec,
                                               const GroundTruth& gt) {
    const int W = thermal::kFrameWidth, H = thermal::kFrameHeight;
    thermal::RawThermalFrame frame;
    frame.pixels.resize(std::size_t(W) * H);
    const double sigma = spec.hotspot_radius / 2.0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double nx = (x + 0.5) / W, ny = (y + 0.5) / H;
            double t = in_foot(nx, ny) ? spec.foot_c : spec.background_c;
            t += rng.normal(0.0, spec.thermal_noise_c);
            if (gt.has_hotspot) {
                const double dx = x - gt.cx, dy = y - gt.cy;
                const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                // at the exact center w = 1, so the count there inverts Eq. (1)
                t = (1.0 - w) * t + w * gt.peak_c;
            }
            const double count = std::round((t + 273.15) * 100.0);
            frame.pixels[std::size_t(y) * W + x] =
                std::uint16_t(std::clamp(count, 0.0, 65535.0));
        }
    }
    return frame;
}

inline ImageF render_rgb(Rng& rng, const SynthSpec& spec, const GroundTruth& gt) {
    const int W = spec.rgb_width, H = spec.rgb_height;
    ImageF img(3, H, W);
    const float bg[3] = {0.16f, 0.18f, 0.22f};
    const float foot[3] = {0.82f, 0.62f, 0.52f};
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double nx = (x + 0.5) / W, ny = (y + 0.5) / H;
            const bool f = in_foot(nx, ny);
            for (int c = 0; c < 3; ++c)
                img.at(c, y, x) =
                    clamp01((f ? foot[c] : bg[c]) + float(rng.normal(0.0, spec.rgb_noise)));
        }

    if (gt.grade == 1) {
        // speckle: many small dark dots scattered over the foot
        const float dot[3] = {0.42f, 0.28f, 0.22f};
        for (int k = 0; k < 60; ++k) {
            int sx, sy;
            do {
                sx = int(rng.uniform_int(0, W - 1));
                sy = int(rng.uniform_int(0, H - 1));
            } while (!in_foot((sx + 0.5) / W, (sy + 0.5) / H, 0.9));
            const int r = int(rng.uniform_int(2, 3));
            for (int y = std::max(0, sy - r); y <= std::min(H - 1, sy + r); ++y)
                for (int x = std::max(0, sx - r); x <= std::min(W - 1, sx + r); ++x)
                    if ((x - sx) * (x - sx) + (y - sy) * (y - sy) <= r * r)
                        for (int c = 0; c < 3; ++c) img.at(c, y, x) = dot[c];
        }
    } else if (gt.has_hotspot) {
        // one wound patch, identical for every advanced grade, colocated with
        // the thermal hotspot (normalized coordinates are shared)
        const float wound[3] = {0.55f, 0.10f, 0.10f};
        const double wx = (gt.cx + 0.5) / thermal::kFrameWidth * W;
        const double wy = (gt.cy + 0.5) / thermal::kFrameHeight * H;
        const double wr = double(gt.r) / thermal::kFrameWidth * W;
        const int x0 = std::max(0, int(wx - wr - 2)), x1 = std::min(W - 1, int(wx + wr + 2));
        const int y0 = std::max(0, int(wy - wr - 2)), y1 = std::min(H - 1, int(wy + wr + 2));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double d = std::sqrt((x - wx) * (x - wx) + (y - wy) * (y - wy));
                const float a = float(std::clamp((wr - d) / 2.0 + 0.5, 0.0, 1.0));
                if (a > 0.0f)
                    for (int c = 0; c < 3; ++c)
                        img.at(c, y, x) = (1.0f - a) * img.at(c, y, x) + a * wound[c];
            }
    }
    return img;
}

}  // namespace detail

// Writes rgb/<id>.png, thermal/<id>.tif, manifest.csv and ground_truth.json
// under out_dir. Byte-identical across runs with the same spec.
inline SynthResult generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
    validate(spec);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "rgb");
    fs::create_directories(out_dir / "thermal");

    data::DatasetManifest manifest;
    std::vector<GroundTruth> truth;
    std::uint64_t index = 0;

    for (int g = 0; g < data::kNumGrades; ++g) {
        const int n = spec.n_per_class[std::size_t(g)];
        const int n_valid = n - spec.n_thermal_invalid[std::size_t(g)];
        for (int k = 0; k < n; ++k, ++index) {
            Rng rng(derive_seed(spec.seed, index));
            char buf[32];
            std::snprintf(buf, sizeof buf, "synth_g%d_%04d", g, k);

            GroundTruth gt;
            gt.id = buf;
            gt.grade = g;
            gt.has_hotspot = g >= 2;
            if (gt.has_hotspot) {
                detail::draw_hotspot_center(rng, spec, gt.cx, gt.cy);
                gt.r = spec.hotspot_radius;
                gt.peak_c = spec.hotspot_peak_c[std::size_t(g - 2)];
                gt.bbox_px = {gt.cx - gt.r, gt.cy - gt.r, gt.cx + gt.r, gt.cy + gt.r};
                gt.bbox_norm = {double(gt.bbox_px[0]) / thermal::kFrameWidth,
                                double(gt.bbox_px[1]) / thermal::kFrameHeight,
                                double(gt.bbox_px[2] + 1) / thermal::kFrameWidth,
                                double(gt.bbox_px[3] + 1) / thermal::kFrameHeight};
            }

            const bool thermal_ok = k < n_valid;
            data::SampleRecord rec;
            rec.id = gt.id;
            rec.grade = g;
            rec.thermal_valid = thermal_ok;
            rec.rgb_path = (out_dir / "rgb" / (gt.id + ".png")).string();

            thermal::RawThermalFrame frame = detail::render_thermal(rng, spec, gt);
            if (thermal_ok) {
                rec.thermal_raw_path = (out_dir / "thermal" / (gt.id + ".tif")).string();
                io::write_file(rec.thermal_raw_path,
                               thermal::encode_raw(frame, io::TiffCompression::Deflate));
            }
            ImageF rgb = detail::render_rgb(rng, spec, gt);
            io::write_file(rec.rgb_path, io::write_png(image_to_png8(rgb)));

            manifest.records.push_back(std::move(rec));
            truth.push_back(std::move(gt));
        }
    }

    SynthResult res;
    res.manifest_path = out_dir / "manifest.csv";
    res.truth_path = out_dir / "ground_truth.json";
    data::save_manifest(manifest, res.manifest_path.string());

    nlohmann::json j;
    j["seed"] = spec.seed;
    j["samples"] = nlohmann::json::array();
    for (const auto& gt : truth) {
        nlohmann::json s;
        s["id"] = gt.id;
        s["grade"] = gt.grade;
        if (gt.has_hotspot) {
            s["hotspot"] = {{"cx", gt.cx},
                            {"cy", gt.cy},
                            {"r", gt.r},
                            {"peak_c", gt.peak_c},
                            {"bbox_px", gt.bbox_px},
                            {"bbox_norm", gt.bbox_norm}};
        } else {
            s["hotspot"] = nullptr;
        }
        j["samples"].push_back(std::move(s));
    }
    std::ofstream out(res.truth_path, std::ios::binary);
    out << j.dump(2) << '\n';

    // reload through the same code path the consumers use; also validates
    res.manifest = data::load_manifest(res.manifest_path.string());
    res.truth = std::move(truth);
    return res;
}

}  // namespace thermofuse::synth

#endif
