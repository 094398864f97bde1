#ifndef THERMOFUSE_NN_BACKBONES_HPP
#define THERMOFUSE_NN_BACKBONES_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermofuse/nn/graph.hpp"
#include "thermofuse/nn/layers.hpp"

namespace thermofuse::nn {

enum class BackboneId { DenseNet121, EfficientNetV2S, InceptionV3, ResNet50, VGG16, TinyDfu };

struct BackboneSpec {
    BackboneId id;
    const char* name;
    int feature_dim;
    int input_size;
    long long backbone_params_expected;  // 3-channel input; 0 = no reference count
};

inline BackboneSpec spec_for(BackboneId id) {
    switch (id) {
        case BackboneId::DenseNet121:
            return {id, "densenet121", 1024, 224, 6953856LL};
        case BackboneId::EfficientNetV2S:
            return {id, "efficientnet_v2_s", 1280, 224, 20177488LL};
        case BackboneId::InceptionV3:
            return {id, "inception_v3", 2048, 299, 21785568LL};
        case BackboneId::ResNet50:
            return {id, "resnet50", 2048, 224, 23508032LL};
        case BackboneId::VGG16:
            return {id, "vgg16", 4096, 224, 134260544LL};
        case BackboneId::TinyDfu:
            return {id, "tiny_dfu", 96, 64, 0LL};
    }
    throw std::invalid_argument("unknown backbone id");
}

inline BackboneSpec backbone_from_string(const std::string& name) {
    for (BackboneId id : {BackboneId::DenseNet121, BackboneId::EfficientNetV2S,
                          BackboneId::InceptionV3, BackboneId::ResNet50, BackboneId::VGG16,
                          BackboneId::TinyDfu}) {
        const auto s = spec_for(id);
        if (name == s.name) return s;
    }
    throw std::invalid_argument("unknown backbone '" + name + "'");
}

// What model assembly needs to know about the graph it just grew.
struct BuiltBackbone {
    int feature_node = -1;        // (N, feature_dim, 1, 1)
    std::string stem_conv;        // first conv node (input-inflation target)
    std::string cam_node;         // last conv block output (Grad-CAM default)
};

namespace detail {

enum class Act { None, Relu, Silu };

template <typename T>
int conv_bn_act(Network<T>& net, const std::string& p, int in_node, int in_c, int out_c, int kh,
                int kw, int sh, int sw, int ph, int pw, Act act, double bn_eps, int groups = 1) {
    int n = net.add(p + ".conv",
                    std::make_unique<Conv2d<T>>(in_c, out_c, kh, kw, sh, sw, ph, pw, groups, false),
                    {in_node});
    n = net.add(p + ".bn", std::make_unique<BatchNorm<T>>(out_c, bn_eps), {n});
    if (act == Act::Relu) n = net.add(p + ".relu", std::make_unique<ReLU<T>>(), {n});
    if (act == Act::Silu) n = net.add(p + ".silu", std::make_unique<SiLU<T>>(), {n});
    return n;
}

template <typename T>
int conv_bn_act(Network<T>& net, const std::string& p, int in_node, int in_c, int out_c, int k,
                int stride, int pad, Act act, double bn_eps, int groups = 1) {
    return conv_bn_act(net, p, in_node, in_c, out_c, k, k, stride, stride, pad, pad, act, bn_eps,
                       groups);
}

// ---- DenseNet121 -----------------------------------------------------------
template <typename T>
BuiltBackbone build_densenet121(Network<T>& net, int in_channels) {
    const double eps = 1e-5;
    BuiltBackbone out;
    out.stem_conv = "backbone.stem.conv";
    int n = conv_bn_act(net, "backbone.stem", Network<T>::kInput, in_channels, 64, 7, 2, 3,
                        Act::Relu, eps);
    n = net.add("backbone.pool0", std::make_unique<MaxPool<T>>(3, 2, 1), {n});

    int c_in = 64;
    const int block_sizes[4] = {6, 12, 24, 16};
    for (int b = 0; b < 4; ++b) {
        for (int l = 0; l < block_sizes[b]; ++l) {
            const std::string p =
                "backbone.block" + std::to_string(b + 1) + ".layer" + std::to_string(l + 1);
            int t = net.add(p + ".bn1", std::make_unique<BatchNorm<T>>(c_in, eps), {n});
            t = net.add(p + ".relu1", std::make_unique<ReLU<T>>(), {t});
            t = net.add(p + ".conv1", std::make_unique<Conv2d<T>>(c_in, 128, 1, 1, 1, 0, 1, false),
                        {t});
            t = net.add(p + ".bn2", std::make_unique<BatchNorm<T>>(128, eps), {t});
            t = net.add(p + ".relu2", std::make_unique<ReLU<T>>(), {t});
            t = net.add(p + ".conv2", std::make_unique<Conv2d<T>>(128, 32, 3, 3, 1, 1, 1, false),
                        {t});
            n = net.add(p + ".cat", std::make_unique<Concat<T>>(), {n, t});
            c_in += 32;
        }
        if (b < 3) {
            const std::string p = "backbone.trans" + std::to_string(b + 1);
            n = net.add(p + ".bn", std::make_unique<BatchNorm<T>>(c_in, eps), {n});
            n = net.add(p + ".relu", std::make_unique<ReLU<T>>(), {n});
            n = net.add(p + ".conv",
                        std::make_unique<Conv2d<T>>(c_in, c_in / 2, 1, 1, 1, 0, 1, false), {n});
            n = net.add(p + ".pool", std::make_unique<AvgPool<T>>(2, 2, 0), {n});
            c_in /= 2;
        }
    }
    n = net.add("backbone.norm5", std::make_unique<BatchNorm<T>>(c_in, eps), {n});
    n = net.add("backbone.relu5", std::make_unique<ReLU<T>>(), {n});
    out.cam_node = "backbone.relu5";
    out.feature_node = net.add("backbone.gap", std::make_unique<GlobalAvgPool<T>>(), {n});
    return out;
}

// ---- ResNet50 ---------------------------------------------------------------
template <typename T>
BuiltBackbone build_resnet50(Network<T>& net, int in_channels) {
    const double eps = 1e-5;
    BuiltBackbone out;
    out.stem_conv = "backbone.stem.conv";
    int n = conv_bn_act(net, "backbone.stem", Network<T>::kInput, in_channels, 64, 7, 2, 3,
                        Act::Relu, eps);
    n = net.add("backbone.pool0", std::make_unique<MaxPool<T>>(3, 2, 1), {n});

    int c_in = 64;
    const int widths[4] = {64, 128, 256, 512};
    const int depths[4] = {3, 4, 6, 3};
    std::string last;
    for (int stage = 0; stage < 4; ++stage) {
        const int w = widths[stage];
        for (int b = 0; b < depths[stage]; ++b) {
            const std::string p =
                "backbone.layer" + std::to_string(stage + 1) + ".block" + std::to_string(b + 1);
            const int stride = (b == 0 && stage > 0) ? 2 : 1;
            const int skip_in = n;
            // stride sits on the 3x3, the v1.5 placement
            int t = conv_bn_act(net, p + ".a", n, c_in, w, 1, 1, 0, Act::Relu, eps);
            t = conv_bn_act(net, p + ".b", t, w, w, 3, stride, 1, Act::Relu, eps);
            t = conv_bn_act(net, p + ".c", t, w, 4 * w, 1, 1, 0, Act::None, eps);
            int skip = skip_in;
            if (b == 0)
                skip = conv_bn_act(net, p + ".down", skip_in, c_in, 4 * w, 1, stride, 0, Act::None,
                                   eps);
            n = net.add(p + ".add", std::make_unique<Add<T>>(), {t, skip});
            last = p + ".relu";
            n = net.add(last, std::make_unique<ReLU<T>>(), {n});
            c_in = 4 * w;
        }
    }
    out.cam_node = last;
    out.feature_node = net.add("backbone.gap", std::make_unique<GlobalAvgPool<T>>(), {n});
    return out;
}

// ---- VGG16 ------------------------------------------------------------------
// Classifier is kept through its second 4096-wide layer: that is the 134.26 M
// backbone boundary, and feature_dim is 4096. Requires 224 px input.
template <typename T>
BuiltBackbone build_vgg16(Network<T>& net, int in_channels) {
    BuiltBackbone out;
    out.stem_conv = "backbone.stem.conv";
    const int plan[5][3] = {{64, 64, 0}, {128, 128, 0}, {256, 256, 256}, {512, 512, 512},
                            {512, 512, 512}};
    int n = Network<T>::kInput;
    int c_in = in_channels;
    std::string last;
    for (int g = 0; g < 5; ++g) {
        for (int l = 0; l < 3; ++l) {
            const int oc = plan[g][l];
            if (oc == 0) continue;
            const std::string p = (g == 0 && l == 0)
                                      ? "backbone.stem"
                                      : "backbone.conv" + std::to_string(g + 1) + "_" +
                                            std::to_string(l + 1);
            n = net.add(p + ".conv", std::make_unique<Conv2d<T>>(c_in, oc, 3, 3, 1, 1, 1, true),
                        {n});
            last = p + ".relu";
            n = net.add(last, std::make_unique<ReLU<T>>(), {n});
            c_in = oc;
        }
        n = net.add("backbone.pool" + std::to_string(g + 1), std::make_unique<MaxPool<T>>(2, 2, 0),
                    {n});
    }
    out.cam_node = last;  // final conv activation, before pool5
    n = net.add("backbone.flatten", std::make_unique<Flatten<T>>(), {n});
    n = net.add("backbone.fc1", std::make_unique<Linear<T>>(512 * 7 * 7, 4096, true), {n});
    n = net.add("backbone.fc1_relu", std::make_unique<ReLU<T>>(), {n});
    n = net.add("backbone.fc1_drop", std::make_unique<Dropout<T>>(0.5), {n});
    n = net.add("backbone.fc2", std::make_unique<Linear<T>>(4096, 4096, true), {n});
    n = net.add("backbone.fc2_relu", std::make_unique<ReLU<T>>(), {n});
    out.feature_node = net.add("backbone.fc2_drop", std::make_unique<Dropout<T>>(0.5), {n});
    return out;
}

// ---- InceptionV3 (aux head disabled) -----------------------------------------
template <typename T>
BuiltBackbone build_inceptionv3(Network<T>& net, int in_channels) {
    const double eps = 1e-3;
    BuiltBackbone out;
    out.stem_conv = "backbone.stem.conv";

    auto basic = [&](const std::string& p, int in_node, int ic, int oc, int kh, int kw, int sh,
                     int sw, int ph, int pw) {
        return conv_bn_act(net, p, in_node, ic, oc, kh, kw, sh, sw, ph, pw, Act::Relu, eps);
    };

    int n = basic("backbone.stem", Network<T>::kInput, in_channels, 32, 3, 3, 2, 2, 0, 0);
    n = basic("backbone.conv2a", n, 32, 32, 3, 3, 1, 1, 0, 0);
    n = basic("backbone.conv2b", n, 32, 64, 3, 3, 1, 1, 1, 1);
    n = net.add("backbone.pool1", std::make_unique<MaxPool<T>>(3, 2, 0), {n});
    n = basic("backbone.conv3b", n, 64, 80, 1, 1, 1, 1, 0, 0);
    n = basic("backbone.conv4a", n, 80, 192, 3, 3, 1, 1, 0, 0);
    n = net.add("backbone.pool2", std::make_unique<MaxPool<T>>(3, 2, 0), {n});

    int c_in = 192;
    auto incA = [&](const std::string& p, int in_node, int ic, int pf) {
        const int b1 = basic(p + ".b1", in_node, ic, 64, 1, 1, 1, 1, 0, 0);
        int b5 = basic(p + ".b5a", in_node, ic, 48, 1, 1, 1, 1, 0, 0);
        b5 = basic(p + ".b5b", b5, 48, 64, 5, 5, 1, 1, 2, 2);
        int b3 = basic(p + ".b3a", in_node, ic, 64, 1, 1, 1, 1, 0, 0);
        b3 = basic(p + ".b3b", b3, 64, 96, 3, 3, 1, 1, 1, 1);
        b3 = basic(p + ".b3c", b3, 96, 96, 3, 3, 1, 1, 1, 1);
        int bp = net.add(p + ".pool", std::make_unique<AvgPool<T>>(3, 1, 1), {in_node});
        bp = basic(p + ".bp", bp, ic, pf, 1, 1, 1, 1, 0, 0);
        return net.add(p + ".cat", std::make_unique<Concat<T>>(), {b1, b5, b3, bp});
    };
    n = incA("backbone.mixed5b", n, c_in, 32);
    c_in = 256;
    n = incA("backbone.mixed5c", n, c_in, 64);
    c_in = 288;
    n = incA("backbone.mixed5d", n, c_in, 64);

    {  // InceptionB reduction
        const std::string p = "backbone.mixed6a";
        const int b3 = basic(p + ".b3", n, c_in, 384, 3, 3, 2, 2, 0, 0);
        int bd = basic(p + ".bda", n, c_in, 64, 1, 1, 1, 1, 0, 0);
        bd = basic(p + ".bdb", bd, 64, 96, 3, 3, 1, 1, 1, 1);
        bd = basic(p + ".bdc", bd, 96, 96, 3, 3, 2, 2, 0, 0);
        const int bp = net.add(p + ".pool", std::make_unique<MaxPool<T>>(3, 2, 0), {n});
        n = net.add(p + ".cat", std::make_unique<Concat<T>>(), {b3, bd, bp});
        c_in = 768;
    }

    auto incC = [&](const std::string& p, int in_node, int ic, int c7) {
        const int b1 = basic(p + ".b1", in_node, ic, 192, 1, 1, 1, 1, 0, 0);
        int b7 = basic(p + ".b7a", in_node, ic, c7, 1, 1, 1, 1, 0, 0);
        b7 = basic(p + ".b7b", b7, c7, c7, 1, 7, 1, 1, 0, 3);
        b7 = basic(p + ".b7c", b7, c7, 192, 7, 1, 1, 1, 3, 0);
        int bd = basic(p + ".bda", in_node, ic, c7, 1, 1, 1, 1, 0, 0);
        bd = basic(p + ".bdb", bd, c7, c7, 7, 1, 1, 1, 3, 0);
        bd = basic(p + ".bdc", bd, c7, c7, 1, 7, 1, 1, 0, 3);
        bd = basic(p + ".bdd", bd, c7, c7, 7, 1, 1, 1, 3, 0);
        bd = basic(p + ".bde", bd, c7, 192, 1, 7, 1, 1, 0, 3);
        int bp = net.add(p + ".pool", std::make_unique<AvgPool<T>>(3, 1, 1), {in_node});
        bp = basic(p + ".bp", bp, ic, 192, 1, 1, 1, 1, 0, 0);
        return net.add(p + ".cat", std::make_unique<Concat<T>>(), {b1, b7, bd, bp});
    };
    n = incC("backbone.mixed6b", n, c_in, 128);
    n = incC("backbone.mixed6c", n, c_in, 160);
    n = incC("backbone.mixed6d", n, c_in, 160);
    n = incC("backbone.mixed6e", n, c_in, 192);

    {  // InceptionD reduction
        const std::string p = "backbone.mixed7a";
        int b3 = basic(p + ".b3a", n, c_in, 192, 1, 1, 1, 1, 0, 0);
        b3 = basic(p + ".b3b", b3, 192, 320, 3, 3, 2, 2, 0, 0);
        int b7 = basic(p + ".b7a", n, c_in, 192, 1, 1, 1, 1, 0, 0);
        b7 = basic(p + ".b7b", b7, 192, 192, 1, 7, 1, 1, 0, 3);
        b7 = basic(p + ".b7c", b7, 192, 192, 7, 1, 1, 1, 3, 0);
        b7 = basic(p + ".b7d", b7, 192, 192, 3, 3, 2, 2, 0, 0);
        const int bp = net.add(p + ".pool", std::make_unique<MaxPool<T>>(3, 2, 0), {n});
        n = net.add(p + ".cat", std::make_unique<Concat<T>>(), {b3, b7, bp});
        c_in = 1280;
    }

    auto incE = [&](const std::string& p, int in_node, int ic) {
        const int b1 = basic(p + ".b1", in_node, ic, 320, 1, 1, 1, 1, 0, 0);
        const int b3 = basic(p + ".b3a", in_node, ic, 384, 1, 1, 1, 1, 0, 0);
        const int b3l = basic(p + ".b3b1", b3, 384, 384, 1, 3, 1, 1, 0, 1);
        const int b3r = basic(p + ".b3b2", b3, 384, 384, 3, 1, 1, 1, 1, 0);
        const int b3c = net.add(p + ".b3cat", std::make_unique<Concat<T>>(), {b3l, b3r});
        int bd = basic(p + ".bda", in_node, ic, 448, 1, 1, 1, 1, 0, 0);
        bd = basic(p + ".bdb", bd, 448, 384, 3, 3, 1, 1, 1, 1);
        const int bdl = basic(p + ".bdc1", bd, 384, 384, 1, 3, 1, 1, 0, 1);
        const int bdr = basic(p + ".bdc2", bd, 384, 384, 3, 1, 1, 1, 1, 0);
        const int bdc = net.add(p + ".bdcat", std::make_unique<Concat<T>>(), {bdl, bdr});
        int bp = net.add(p + ".pool", std::make_unique<AvgPool<T>>(3, 1, 1), {in_node});
        bp = basic(p + ".bp", bp, ic, 192, 1, 1, 1, 1, 0, 0);
        return net.add(p + ".cat", std::make_unique<Concat<T>>(), {b1, b3c, bdc, bp});
    };
    n = incE("backbone.mixed7b", n, c_in);
    c_in = 2048;
    n = incE("backbone.mixed7c", n, c_in);

    out.cam_node = "backbone.mixed7c.cat";
    out.feature_node = net.add("backbone.gap", std::make_unique<GlobalAvgPool<T>>(), {n});
    return out;
}

// ---- EfficientNetV2-S ---------------------------------------------------------
template <typename T>
BuiltBackbone build_efficientnetv2s(Network<T>& net, int in_channels) {
    const double eps = 1e-3;
    BuiltBackbone out;
    out.stem_conv = "backbone.stem.conv";
    int n = conv_bn_act(net, "backbone.stem", Network<T>::kInput, in_channels, 24, 3, 2, 1,
                        Act::Silu, eps);

    struct StageCfg {
        bool fused;
        int expand, in, out, count, stride;
    };
    const StageCfg stages[6] = {
        {true, 1, 24, 24, 2, 1},  {true, 4, 24, 48, 4, 2},  {true, 4, 48, 64, 4, 2},
        {false, 4, 64, 128, 6, 2}, {false, 6, 128, 160, 9, 1}, {false, 6, 160, 256, 15, 2},
    };
    for (int s = 0; s < 6; ++s) {
        const auto& st = stages[s];
        for (int b = 0; b < st.count; ++b) {
            const int ic = b == 0 ? st.in : st.out;
            const int stride = b == 0 ? st.stride : 1;
            const bool residual = stride == 1 && ic == st.out;
            const std::string p =
                "backbone.stage" + std::to_string(s + 1) + ".block" + std::to_string(b + 1);
            const int block_in = n;
            int t;
            if (st.fused) {
                if (st.expand == 1) {
                    t = conv_bn_act(net, p + ".f", block_in, ic, st.out, 3, stride, 1, Act::Silu,
                                    eps);
                } else {
                    const int ec = ic * st.expand;
                    t = conv_bn_act(net, p + ".e", block_in, ic, ec, 3, stride, 1, Act::Silu, eps);
                    t = conv_bn_act(net, p + ".pr", t, ec, st.out, 1, 1, 0, Act::None, eps);
                }
            } else {
                const int ec = ic * st.expand;
                const int sq = std::max(1, ic / 4);
                t = conv_bn_act(net, p + ".e", block_in, ic, ec, 1, 1, 0, Act::Silu, eps);
                t = conv_bn_act(net, p + ".dw", t, ec, ec, 3, stride, 1, Act::Silu, eps, ec);
                int se = net.add(p + ".se.gap", std::make_unique<GlobalAvgPool<T>>(), {t});
                se = net.add(p + ".se.fc1", std::make_unique<Conv2d<T>>(ec, sq, 1, 1, 1, 0, 1, true),
                             {se});
                se = net.add(p + ".se.act", std::make_unique<SiLU<T>>(), {se});
                se = net.add(p + ".se.fc2", std::make_unique<Conv2d<T>>(sq, ec, 1, 1, 1, 0, 1, true),
                             {se});
                se = net.add(p + ".se.gate", std::make_unique<Sigmoid<T>>(), {se});
                t = net.add(p + ".se.mul", std::make_unique<Mul<T>>(), {t, se});
                t = conv_bn_act(net, p + ".pr", t, ec, st.out, 1, 1, 0, Act::None, eps);
            }
            n = residual ? net.add(p + ".add", std::make_unique<Add<T>>(), {t, block_in}) : t;
        }
    }
    n = conv_bn_act(net, "backbone.head", n, 256, 1280, 1, 1, 0, Act::Silu, eps);
    out.cam_node = "backbone.head.silu";
    out.feature_node = net.add("backbone.gap", std::make_unique<GlobalAvgPool<T>>(), {n});
    return out;
}

// ---- TinyDfu ------------------------------------------------------------------
// In-house desk-scale backbone: four conv blocks, 8x8 final feature map at a
// 64 px input, 96-dim embedding. Exists so the full train/eval/explain path
// runs in minutes on one core; not part of the reference table.
template <typename T>
BuiltBackbone build_tinydfu(Network<T>& net, int in_channels) {
    const double eps = 1e-5;
    BuiltBackbone out;
    out.stem_conv = "backbone.stem.conv";
    int n = conv_bn_act(net, "backbone.stem", Network<T>::kInput, in_channels, 16, 3, 2, 1,
                        Act::Relu, eps);
    n = conv_bn_act(net, "backbone.block2", n, 16, 32, 3, 2, 1, Act::Relu, eps);
    n = conv_bn_act(net, "backbone.block3", n, 32, 64, 3, 2, 1, Act::Relu, eps);
    n = conv_bn_act(net, "backbone.block4", n, 64, 96, 3, 1, 1, Act::Relu, eps);
    out.cam_node = "backbone.block4.relu";
    out.feature_node = net.add("backbone.gap", std::make_unique<GlobalAvgPool<T>>(), {n});
    return out;
}

}  // namespace detail

template <typename T>
BuiltBackbone build_backbone(Network<T>& net, BackboneId id, int in_channels) {
    switch (id) {
        case BackboneId::DenseNet121: return detail::build_densenet121(net, in_channels);
        case BackboneId::EfficientNetV2S: return detail::build_efficientnetv2s(net, in_channels);
        case BackboneId::InceptionV3: return detail::build_inceptionv3(net, in_channels);
        case BackboneId::ResNet50: return detail::build_resnet50(net, in_channels);
        case BackboneId::VGG16: return detail::build_vgg16(net, in_channels);
        case BackboneId::TinyDfu: return detail::build_tinydfu(net, in_channels);
    }
    throw std::invalid_argument("unknown backbone id");
}

// The published fixed head: d -> 1024 -> 512 -> 6, each hidden stage ordered
// linear -> rectifier -> batch-norm -> dropout(0.5). Closed-form parameter
// count: 1024*d + 531,974.
template <typename T>
int build_head(Network<T>& net, int feature_node, int feature_dim, int num_classes = 6) {
    int n = net.add("head.fc1", std::make_unique<Linear<T>>(feature_dim, 1024, true),
                    {feature_node});
    n = net.add("head.relu1", std::make_unique<ReLU<T>>(), {n});
    n = net.add("head.bn1", std::make_unique<BatchNorm<T>>(1024), {n});
    n = net.add("head.drop1", std::make_unique<Dropout<T>>(0.5), {n});
    n = net.add("head.fc2", std::make_unique<Linear<T>>(1024, 512, true), {n});
    n = net.add("head.relu2", std::make_unique<ReLU<T>>(), {n});
    n = net.add("head.bn2", std::make_unique<BatchNorm<T>>(512), {n});
    n = net.add("head.drop2", std::make_unique<Dropout<T>>(0.5), {n});
    n = net.add("head.fc3", std::make_unique<Linear<T>>(512, num_classes, true), {n});
    return n;
}

inline long long head_param_closed_form(int feature_dim) {
    return 1024LL * feature_dim + 531974LL;
}

}  // namespace thermofuse::nn

#endif
