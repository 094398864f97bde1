#ifndef THERMOFUSE_DATA_LOADER_HPP
#define THERMOFUSE_DATA_LOADER_HPP

#include <cstring>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "thermofuse/core/image.hpp"
#include "thermofuse/core/tensor.hpp"
#include "thermofuse/data/manifest.hpp"
#include "thermofuse/data/sample.hpp"
#include "thermofuse/io/png.hpp"
#include "thermofuse/io/tiff.hpp"
#include "thermofuse/thermal/pipeline.hpp"

namespace thermofuse::data {

struct UnsupportedImageFormat : std::runtime_error {
    explicit UnsupportedImageFormat(const std::string& path)
        : std::runtime_error("UnsupportedImageFormat (PNG expected): " + path) {}
};

struct LeakageDetected : std::runtime_error {
    explicit LeakageDetected(const std::string& id)
        : std::runtime_error("LeakageDetected: held-out sample '" + id + "' requested by training") {}
};

struct LoaderOptions {
    Modality modality = Modality::FUSED;
    int input_size = 224;
    double window_step = 1.0;
    double window_floor = 0.0;
    bool cache = true;
};

namespace detail {

// any PNG layout -> 3 planes (gray replicated, alpha dropped)
inline ImageF to_rgb3(const ImageF& img) {
    if (img.channels == 3) return img;
    ImageF out(3, img.height, img.width);
    const std::size_t npx = std::size_t(img.height) * img.width;
    if (img.channels >= 3) {
        std::memcpy(out.v.data(), img.v.data(), 3 * npx * sizeof(float));
    } else {
        for (int c = 0; c < 3; ++c)
            std::memcpy(out.plane(c), img.plane(0), npx * sizeof(float));
    }
    return out;
}

}  // namespace detail

inline ImageF load_rgb_png(const std::string& path) {
    const auto bytes = io::read_file(path);
    static const std::uint8_t sig[4] = {0x89, 'P', 'N', 'G'};
    if (bytes.size() < 4 || std::memcmp(bytes.data(), sig, 4) != 0)
        throw UnsupportedImageFormat(path);
    return detail::to_rgb3(image_from_png(io::read_png(bytes)));
}

// 16-bit TIFF -> adaptive-window normalized plane at native 160x120
inline ImageF load_thermal_plane(const std::string& path, double step, double floor_c) {
    const auto frame = thermal::decode_raw(io::read_file(path));
    const auto processed = thermal::process_frame(frame, step, floor_c);
    ImageF out(1, thermal::kFrameHeight, thermal::kFrameWidth);
    std::memcpy(out.plane(0), processed.normalized.values.data(),
                out.v.size() * sizeof(float));
    return out;
}

// Assembles one model-ready sample: RGB and thermal are each resized straight
// to the square input size (accepting the 4:3 squeeze so the two modalities
// stay spatially aligned), then stacked per the requested modality.
inline FusedSample assemble_sample(const SampleRecord& rec, const LoaderOptions& opt) {
    if (!rec.in_modality(opt.modality))
        throw std::invalid_argument("sample " + rec.id + " is not eligible for modality " +
                                    to_string(opt.modality));
    FusedSample s;
    s.id = rec.id;
    s.label = rec.grade;
    s.modality = opt.modality;
    const int sz = opt.input_size;

    ImageF thermal_plane;
    if (opt.modality != Modality::RGB) {
        thermal_plane = load_thermal_plane(rec.thermal_raw_path, opt.window_step, opt.window_floor);
        if (thermal_plane.height != sz || thermal_plane.width != sz)
            thermal_plane = resize_bilinear(thermal_plane, sz, sz);
    }

    const std::size_t npx = std::size_t(sz) * sz;
    if (opt.modality == Modality::THERMAL) {
        s.image = ImageF(3, sz, sz);
        for (int c = 0; c < 3; ++c)
            std::memcpy(s.image.plane(c), thermal_plane.plane(0), npx * sizeof(float));
        return s;
    }

    ImageF rgb = load_rgb_png(rec.rgb_path);
    if (rgb.height != sz || rgb.width != sz) rgb = resize_bilinear(rgb, sz, sz);
    if (opt.modality == Modality::RGB) {
        s.image = std::move(rgb);
        return s;
    }

    s.image = ImageF(4, sz, sz);
    std::memcpy(s.image.v.data(), rgb.v.data(), 3 * npx * sizeof(float));
    std::memcpy(s.image.plane(3), thermal_plane.plane(0), npx * sizeof(float));
    return s;
}

// Decode cache keyed by sample id. Not thread-safe; training is
// single-threaded and per-worker loaders are the intended scaling path.
class SampleLoader {
public:
    SampleLoader(const DatasetManifest& mf, LoaderOptions opt) : opt_(opt) {
        for (const auto& r : mf.records) by_id_.emplace(r.id, r);
    }

    const LoaderOptions& options() const { return opt_; }

    const SampleRecord& record(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) throw std::out_of_range("unknown sample id: " + id);
        return it->second;
    }

    // ids that must never be served (the frozen test set during training);
    // violating a forbid is a hard failure, not a skip
    void forbid(const std::set<std::string>& ids) { forbidden_ = ids; }
    void clear_forbidden() { forbidden_.clear(); }

    FusedSample load(const std::string& id) {
        if (forbidden_.count(id)) throw LeakageDetected(id);
        if (opt_.cache) {
            auto it = cache_.find(id);
            if (it != cache_.end()) return it->second;
        }
        FusedSample s = assemble_sample(record(id), opt_);
        if (opt_.cache) cache_.emplace(id, s);
        return s;
    }

    void clear_cache() { cache_.clear(); }

private:
    LoaderOptions opt_;
    std::unordered_map<std::string, SampleRecord> by_id_;
    std::unordered_map<std::string, FusedSample> cache_;
    std::set<std::string> forbidden_;
};

// NCHW batch assembly; all samples must share shape
template <typename T>
Tensor<T> stack_batch(const std::vector<FusedSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("empty batch");
    const auto& first = samples.front().image;
    Tensor<T> t(int(samples.size()), first.channels, first.height, first.width);
    const std::size_t per = std::size_t(first.channels) * first.height * first.width;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& img = samples[i].image;
        if (img.channels != first.channels || img.height != first.height ||
            img.width != first.width)
            throw std::invalid_argument("batch samples disagree on shape");
        for (std::size_t k = 0; k < per; ++k) t.data[i * per + k] = T(img.v[k]);
    }
    return t;
}

template <typename T>
Tensor<T> sample_to_tensor(const FusedSample& s) {
    Tensor<T> t(1, s.image.channels, s.image.height, s.image.width);
    for (std::size_t k = 0; k < s.image.v.size(); ++k) t.data[k] = T(s.image.v[k]);
    return t;
}

}  // namespace thermofuse::data

#endif
