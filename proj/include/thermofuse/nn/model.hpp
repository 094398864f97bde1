#ifndef THERMOFUSE_NN_MODEL_HPP
#define THERMOFUSE_NN_MODEL_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermofuse/data/loader.hpp"
#include "thermofuse/data/sample.hpp"
#include "thermofuse/nn/backbones.hpp"
#include "thermofuse/nn/checkpoint.hpp"
#include "thermofuse/nn/graph.hpp"
#include "thermofuse/nn/loss.hpp"

namespace thermofuse::nn {

enum class InflationMode { MeanRgb, Zeros };

inline const char* to_string(InflationMode m) {
    return m == InflationMode::MeanRgb ? "mean_rgb" : "zeros";
}

inline InflationMode inflation_from_string(const std::string& s) {
    if (s == "mean_rgb") return InflationMode::MeanRgb;
    if (s == "zeros") return InflationMode::Zeros;
    throw std::invalid_argument("unknown inflation mode '" + s + "'");
}

struct WrongChannelCount : std::runtime_error {
    explicit WrongChannelCount(int got)
        : std::runtime_error("WrongChannelCount: first-layer kernels have " + std::to_string(got) +
                             " input channels, expected 3") {}
};

struct WeightsUnavailable : std::runtime_error {
    explicit WeightsUnavailable(const std::string& what)
        : std::runtime_error("WeightsUnavailable: " + what) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what)
        : std::runtime_error("ShapeMismatch: " + what) {}
};

// channels 1-3 copied; the new 4th kernel slice is their per-filter mean
// (mean_rgb) or zero
template <typename T>
Tensor<T> inflate_input_layer(const Tensor<T>& w3, InflationMode mode) {
    if (w3.c != 3) throw WrongChannelCount(w3.c);
    Tensor<T> w4(w3.n, 4, w3.h, w3.w);
    const std::size_t plane = std::size_t(w3.h) * w3.w;
    for (int f = 0; f < w3.n; ++f) {
        const T* src = w3.sample_ptr(f);
        T* dst = w4.sample_ptr(f);
        for (std::size_t i = 0; i < 3 * plane; ++i) dst[i] = src[i];
        T* th = dst + 3 * plane;
        if (mode == InflationMode::MeanRgb) {
            for (std::size_t i = 0; i < plane; ++i)
                th[i] = (src[i] + src[plane + i] + src[2 * plane + i]) / T(3);
        } else {
            for (std::size_t i = 0; i < plane; ++i) th[i] = T(0);
        }
    }
    return w4;
}

struct ModelConfig {
    BackboneId backbone = BackboneId::TinyDfu;
    data::Modality modality = data::Modality::FUSED;
    InflationMode inflation = InflationMode::MeanRgb;
    std::string pretrained_path;  // empty = fresh random weights
    std::uint64_t seed = 0;
    int num_classes = 6;
};

template <typename T>
struct Model {
    Network<T> net;
    BackboneSpec spec{};
    BuiltBackbone built{};
    ModelConfig config{};
    int in_channels = 3;
    int head_node = -1;

    Tensor<T> logits(const Tensor<T>& x, bool training = false) {
        if (x.c != in_channels)
            throw ShapeMismatch("input has " + std::to_string(x.c) + " channels, model wants " +
                                std::to_string(in_channels));
        if (x.h != spec.input_size || x.w != spec.input_size)
            throw ShapeMismatch("input is " + std::to_string(x.h) + "x" + std::to_string(x.w) +
                                ", model wants " + std::to_string(spec.input_size) + " square");
        return net.forward(x, training);
    }
};

namespace detail {

template <typename T>
Conv2d<T>& stem_conv(Model<T>& m) {
    auto* conv = dynamic_cast<Conv2d<T>*>(&m.net.layer(m.built.stem_conv));
    if (!conv) throw std::logic_error("stem node is not a conv layer");
    return *conv;
}

// restores backbone.* tensors from a checkpoint file; the stored stem may be
// the 3-channel original, in which case it is inflated on the way in
template <typename T>
void load_pretrained_backbone(Model<T>& m, const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw WeightsUnavailable(path.string() + " does not exist");
    auto stored = read_checkpoint(path);
    const std::string stem_weight_name = m.built.stem_conv + ".weight";
    auto restore = [&](const std::string& name, Tensor<T>* dst) {
        if (name.rfind("backbone.", 0) != 0) return;  // head stays freshly initialized
        auto it = stored.find(name);
        if (it == stored.end())
            throw WeightsUnavailable("tensor '" + name + "' missing from " + path.string());
        Tensor<double>& src = it->second;
        if (name == stem_weight_name && src.c == 3 && dst->c == 4) {
            // inflate in model precision so a loaded stem matches a fresh one bit for bit
            Tensor<T> w3(src.n, src.c, src.h, src.w);
            for (std::size_t j = 0; j < src.size(); ++j) w3.data[j] = T(src.data[j]);
            Tensor<T> inflated = inflate_input_layer(w3, m.config.inflation);
            if (inflated.n != dst->n || inflated.c != dst->c || inflated.h != dst->h ||
                inflated.w != dst->w)
                throw WeightsUnavailable("shape mismatch for '" + name + "' in " + path.string());
            *dst = std::move(inflated);
            return;
        }
        if (src.n != dst->n || src.c != dst->c || src.h != dst->h || src.w != dst->w)
            throw WeightsUnavailable("shape mismatch for '" + name + "' in " + path.string());
        for (std::size_t j = 0; j < src.size(); ++j) dst->data[j] = T(src.data[j]);
    };
    for (auto& p : m.net.params()) restore(p.name, p.value);
    for (auto& b : m.net.buffers()) restore(b.name, b.value);
}

}  // namespace detail

// Backbone + the fixed head. With no pretrained_path the weights are drawn
// from config.seed; a FUSED stem is always derived from the 3-channel draw via
// inflate_input_layer, so RGB and FUSED models from one seed agree everywhere
// but the stem's thermal slice.
template <typename T>
Model<T> build_model(const ModelConfig& config) {
    Model<T> m;
    m.config = config;
    m.spec = spec_for(config.backbone);
    m.in_channels = data::channels_for(config.modality);
    m.built = build_backbone(m.net, config.backbone, m.in_channels);
    m.head_node = build_head(m.net, m.built.feature_node, m.spec.feature_dim, config.num_classes);

    m.net.init_params(config.seed);
    if (m.in_channels == 4) {
        auto& stem = detail::stem_conv(m);
        Tensor<T> w3(stem.weight().n, 3, stem.weight().h, stem.weight().w);
        Rng rng(m.net.node_init_seed(config.seed, m.net.node_by_name(m.built.stem_conv)));
        detail::he_normal(w3, rng);
        stem.weight() = inflate_input_layer(w3, config.inflation);
    }
    if (!config.pretrained_path.empty()) detail::load_pretrained_backbone(m, config.pretrained_path);
    return m;
}

struct ParamCounts {
    long long backbone = 0;
    long long head = 0;
    long long total() const { return backbone + head; }
};

// exact integer counts, partitioned at the backbone/head boundary (learnable
// parameters only — running statistics are buffers, not parameters)
template <typename T>
ParamCounts count_params(Model<T>& m) {
    ParamCounts pc;
    for (const auto& p : m.net.params()) {
        if (p.name.rfind("head.", 0) == 0)
            pc.head += (long long)(p.value->size());
        else
            pc.backbone += (long long)(p.value->size());
    }
    return pc;
}

// inference-mode class probabilities for one sample
template <typename T>
std::vector<double> predict(Model<T>& m, const data::FusedSample& sample) {
    if (sample.image.channels != m.in_channels)
        throw ShapeMismatch("sample has " + std::to_string(sample.image.channels) +
                            " channels, model wants " + std::to_string(m.in_channels));
    Tensor<T> x = data::sample_to_tensor<T>(sample);
    Tensor<T> z = m.logits(x, false);
    Tensor<T> p = softmax(z);
    std::vector<double> out(std::size_t(p.c));
    for (int c = 0; c < p.c; ++c) out[std::size_t(c)] = double(p.data[std::size_t(c)]);
    return out;
}

}  // namespace thermofuse::nn

#endif
