#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "thermofuse/core/rng.hpp"
#include "thermofuse/data/sample.hpp"
#include "thermofuse/nn/backbones.hpp"
#include "thermofuse/nn/checkpoint.hpp"
#include "thermofuse/nn/model.hpp"

using namespace thermofuse;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const nn::BackboneId kReferenceFive[] = {
    nn::BackboneId::DenseNet121, nn::BackboneId::EfficientNetV2S, nn::BackboneId::InceptionV3,
    nn::BackboneId::ResNet50, nn::BackboneId::VGG16,
};

// graph construction without weight init: cheap enough to sweep every backbone
template <typename T>
std::size_t built_param_count(nn::BackboneId id, int in_channels, std::size_t* head_out = nullptr) {
    nn::Network<T> net;
    const auto built = nn::build_backbone(net, id, in_channels);
    const auto spec = nn::spec_for(id);
    nn::build_head(net, built.feature_node, spec.feature_dim);
    std::size_t backbone = 0, head = 0;
    for (const auto& p : net.params()) {
        if (p.name.rfind("head.", 0) == 0)
            head += p.value->size();
        else
            backbone += p.value->size();
    }
    if (head_out) *head_out = head;
    return backbone;
}

Tensor<double> random_input(int c, int hw, std::uint64_t seed) {
    Tensor<double> x(1, c, hw, hw);
    Rng rng(seed);
    for (auto& v : x.data) v = rng.uniform();
    return x;
}

}  // namespace

TEST_CASE("head parameter count matches the closed form for every feature width") {
    const std::map<int, long long> expected = {
        {1024, 1580550LL}, {1280, 1842694LL}, {2048, 2629126LL}, {4096, 4726278LL}};
    for (const auto& [d, want] : expected) {
        REQUIRE(nn::head_param_closed_form(d) == want);
        nn::Network<float> net;
        nn::build_head(net, nn::Network<float>::kInput, d);
        std::size_t got = 0;
        for (const auto& p : net.params()) got += p.value->size();
        REQUIRE(static_cast<long long>(got) == want);
    }
}

TEST_CASE("reference backbones hit their published parameter counts") {
    for (const auto id : kReferenceFive) {
        const auto spec = nn::spec_for(id);
        std::size_t head = 0;
        const std::size_t backbone = built_param_count<float>(id, 3, &head);
        INFO(spec.name);
        REQUIRE(static_cast<long long>(backbone) == spec.backbone_params_expected);
        REQUIRE(static_cast<long long>(head) == nn::head_param_closed_form(spec.feature_dim));
    }
    // ... and sit within half a percent of the rounded literature values
    const std::map<nn::BackboneId, double> rounded_m = {
        {nn::BackboneId::DenseNet121, 6.95e6},
        {nn::BackboneId::EfficientNetV2S, 20.17e6},
        {nn::BackboneId::ResNet50, 23.50e6},
        {nn::BackboneId::VGG16, 134.26e6},
    };
    for (const auto& [id, want] : rounded_m) {
        const double got = double(nn::spec_for(id).backbone_params_expected);
        REQUIRE(std::abs(got - want) / want < 0.005);
    }
}

TEST_CASE("the fused stem adds exactly one kernel plane per filter") {
    for (const auto id : {nn::BackboneId::DenseNet121, nn::BackboneId::EfficientNetV2S,
                          nn::BackboneId::InceptionV3, nn::BackboneId::ResNet50,
                          nn::BackboneId::VGG16, nn::BackboneId::TinyDfu}) {
        const std::size_t three = built_param_count<float>(id, 3);
        const std::size_t four = built_param_count<float>(id, 4);

        nn::Network<float> net;
        const auto built = nn::build_backbone(net, id, 3);
        auto& stem = dynamic_cast<nn::Conv2d<float>&>(net.layer(built.stem_conv));
        const std::size_t delta =
            std::size_t(stem.kernel_h()) * stem.kernel_w() * stem.out_channels();
        INFO(nn::spec_for(id).name);
        REQUIRE(four - three == delta);
    }
}

TEST_CASE("inflate_input_layer fills the thermal slice per mode") {
    Tensor<double> w3(2, 3, 3, 3);
    Rng rng(61);
    for (auto& v : w3.data) v = rng.uniform(-1, 1);

    const auto mean = nn::inflate_input_layer(w3, nn::InflationMode::MeanRgb);
    REQUIRE(mean.c == 4);
    for (int f = 0; f < 2; ++f)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) {
                for (int c = 0; c < 3; ++c) REQUIRE(mean.at(f, c, y, x) == w3.at(f, c, y, x));
                const double avg =
                    (w3.at(f, 0, y, x) + w3.at(f, 1, y, x) + w3.at(f, 2, y, x)) / 3.0;
                REQUIRE(mean.at(f, 3, y, x) == Approx(avg).margin(1e-15));
            }

    const auto zeros = nn::inflate_input_layer(w3, nn::InflationMode::Zeros);
    for (int f = 0; f < 2; ++f)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) REQUIRE(zeros.at(f, 3, y, x) == 0.0);

    Tensor<double> w4(2, 4, 3, 3);
    REQUIRE_THROWS_AS(nn::inflate_input_layer(w4, nn::InflationMode::Zeros),
                      nn::WrongChannelCount);
}

TEST_CASE("zeros-inflated fused model reproduces the rgb model on zero thermal") {
    nn::ModelConfig rgb_cfg;
    rgb_cfg.backbone = nn::BackboneId::TinyDfu;
    rgb_cfg.modality = data::Modality::RGB;
    rgb_cfg.seed = 2101;
    auto rgb = nn::build_model<double>(rgb_cfg);

    nn::ModelConfig fused_cfg = rgb_cfg;
    fused_cfg.modality = data::Modality::FUSED;
    fused_cfg.inflation = nn::InflationMode::Zeros;
    auto fused = nn::build_model<double>(fused_cfg);

    for (int trial = 0; trial < 5; ++trial) {
        const auto x3 = random_input(3, 64, 7000 + std::uint64_t(trial));
        Tensor<double> x4(1, 4, 64, 64);
        std::copy(x3.data.begin(), x3.data.end(), x4.data.begin());  // 4th plane stays zero

        const auto z3 = rgb.logits(x3, false);
        const auto z4 = fused.logits(x4, false);
        REQUIRE(z3.c == 6);
        double worst = 0;
        for (int c = 0; c < 6; ++c)
            worst = std::max(worst, std::abs(double(z3.data[std::size_t(c)]) -
                                             double(z4.data[std::size_t(c)])));
        REQUIRE(worst < 1e-9);
    }
    rgb.net.clear_state();
    fused.net.clear_state();
}

TEST_CASE("mean_rgb inflation responds to the thermal plane") {
    nn::ModelConfig cfg;
    cfg.backbone = nn::BackboneId::TinyDfu;
    cfg.modality = data::Modality::FUSED;
    cfg.inflation = nn::InflationMode::MeanRgb;
    cfg.seed = 31;
    auto m = nn::build_model<double>(cfg);

    auto x = random_input(4, 64, 99);
    const auto za = m.logits(x, false);
    for (std::size_t i = 3 * 64 * 64; i < x.data.size(); ++i) x.data[i] = 1.0 - x.data[i];
    const auto zb = m.logits(x, false);
    double diff = 0;
    for (int c = 0; c < 6; ++c)
        diff = std::max(diff, std::abs(double(za.data[std::size_t(c)]) -
                                       double(zb.data[std::size_t(c)])));
    REQUIRE(diff > 1e-6);
    m.net.clear_state();
}

TEST_CASE("weight init is a pure function of the seed") {
    nn::ModelConfig cfg;
    cfg.backbone = nn::BackboneId::TinyDfu;
    cfg.seed = 555;
    auto a = nn::build_model<float>(cfg);
    auto b = nn::build_model<float>(cfg);
    cfg.seed = 556;
    auto c = nn::build_model<float>(cfg);

    auto pa = a.net.params(), pb = b.net.params(), pc = c.net.params();
    REQUIRE(pa.size() == pb.size());
    bool any_diff_c = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        REQUIRE(pa[i].name == pb[i].name);
        REQUIRE(pa[i].value->data == pb[i].value->data);
        if (pa[i].value->data != pc[i].value->data) any_diff_c = true;
    }
    REQUIRE(any_diff_c);
}

TEST_CASE("logits guards channel count and input size") {
    nn::ModelConfig cfg;
    cfg.backbone = nn::BackboneId::TinyDfu;
    cfg.modality = data::Modality::FUSED;
    auto m = nn::build_model<float>(cfg);

    Tensor<float> wrong_c(1, 3, 64, 64);
    REQUIRE_THROWS_AS(m.logits(wrong_c), nn::ShapeMismatch);
    Tensor<float> wrong_size(1, 4, 32, 32);
    REQUIRE_THROWS_AS(m.logits(wrong_size), nn::ShapeMismatch);
}

TEST_CASE("checkpoint restores a model bit for bit") {
    const fs::path p = fs::temp_directory_path() / "tf_model_ckpt.tfwt";

    nn::ModelConfig cfg;
    cfg.backbone = nn::BackboneId::TinyDfu;
    cfg.modality = data::Modality::FUSED;
    cfg.seed = 808;
    auto src = nn::build_model<float>(cfg);
    nn::save_checkpoint(src.net, p);

    cfg.seed = 809;  // different init, then restored over
    auto dst = nn::build_model<float>(cfg);
    nn::load_checkpoint(dst.net, p);

    const auto x = random_input(4, 64, 1).cast<float>();
    auto za = src.logits(x, false);
    auto zb = dst.logits(x, false);
    REQUIRE(za.data == zb.data);

    // stored names cover both halves of the graph
    const auto stored = nn::read_checkpoint(p);
    REQUIRE(stored.count("backbone.stem.conv.weight") == 1);
    REQUIRE(stored.count("head.fc3.bias") == 1);
    REQUIRE(stored.count("head.bn1.running_mean") == 1);

    // strict: a different topology refuses the file
    nn::ModelConfig other = cfg;
    other.modality = data::Modality::RGB;
    auto rgb = nn::build_model<float>(other);
    REQUIRE_THROWS_AS(nn::load_checkpoint(rgb.net, p), nn::CheckpointMismatch);

    fs::remove(p);
    REQUIRE_THROWS_AS(nn::read_checkpoint(p), nn::CheckpointError);
    src.net.clear_state();
    dst.net.clear_state();
}

TEST_CASE("pretrained backbone load keeps the head fresh and inflates the stem") {
    const fs::path p = fs::temp_directory_path() / "tf_pretrain.tfwt";

    nn::ModelConfig rgb_cfg;
    rgb_cfg.backbone = nn::BackboneId::TinyDfu;
    rgb_cfg.modality = data::Modality::RGB;
    rgb_cfg.seed = 1;
    auto donor = nn::build_model<float>(rgb_cfg);
    nn::save_checkpoint(donor.net, p);

    nn::ModelConfig cfg;
    cfg.backbone = nn::BackboneId::TinyDfu;
    cfg.modality = data::Modality::FUSED;
    cfg.inflation = nn::InflationMode::MeanRgb;
    cfg.seed = 2;
    cfg.pretrained_path = p.string();
    auto m = nn::build_model<float>(cfg);

    // stem: first three planes copied from the donor, fourth is their mean
    auto& stem = dynamic_cast<nn::Conv2d<float>&>(m.net.layer(m.built.stem_conv));
    auto& dstem = dynamic_cast<nn::Conv2d<float>&>(donor.net.layer(donor.built.stem_conv));
    const auto want = nn::inflate_input_layer(dstem.weight(), nn::InflationMode::MeanRgb);
    REQUIRE(stem.weight().data == want.data);

    // head differs from the donor's (fresh draw from seed 2)
    auto head_w = [](nn::Model<float>& mm) {
        for (auto& pr : mm.net.params())
            if (pr.name == "head.fc1.weight") return pr.value->data;
        return std::vector<float>{};
    };
    REQUIRE(head_w(m) != head_w(donor));

    cfg.pretrained_path = (fs::temp_directory_path() / "missing.tfwt").string();
    REQUIRE_THROWS_AS(nn::build_model<float>(cfg), nn::WeightsUnavailable);
    fs::remove(p);
}

TEST_CASE("predict returns a probability vector over the six grades") {
    nn::ModelConfig cfg;
    cfg.backbone = nn::BackboneId::TinyDfu;
    cfg.modality = data::Modality::FUSED;
    auto m = nn::build_model<float>(cfg);

    data::FusedSample s;
    s.modality = data::Modality::FUSED;
    s.image = ImageF(4, 64, 64);
    Rng rng(4);
    for (auto& v : s.image.v) v = float(rng.uniform());
    const auto probs = nn::predict(m, s);
    REQUIRE(probs.size() == 6);
    double acc = 0;
    for (double v : probs) {
        REQUIRE(v >= 0.0);
        acc += v;
    }
    REQUIRE(acc == Approx(1.0).epsilon(1e-5));
    m.net.clear_state();
}

TEST_CASE("tiny_dfu exposes an 8x8 cam node and a 96-wide embedding") {
    nn::ModelConfig cfg;
    cfg.backbone = nn::BackboneId::TinyDfu;
    cfg.modality = data::Modality::FUSED;
    auto m = nn::build_model<float>(cfg);
    REQUIRE(m.spec.feature_dim == 96);
    REQUIRE(m.spec.input_size == 64);

    const auto x = random_input(4, 64, 3).cast<float>();
    (void)m.logits(x, false);
    const int cam = m.net.node_by_name(m.built.cam_node);
    const auto& fmap = m.net.node_output(cam);
    REQUIRE(fmap.c == 96);
    REQUIRE(fmap.h == 8);
    REQUIRE(fmap.w == 8);
    const auto& feat = m.net.node_output(m.built.feature_node);
    REQUIRE(feat.c == 96);
    REQUIRE(feat.h == 1);
    m.net.clear_state();

    REQUIRE_THROWS_AS(m.net.node_by_name("backbone.nope"), nn::UnknownLayer);
}

TEST_CASE("backbone name strings round-trip") {
    for (const char* name : {"densenet121", "efficientnet_v2_s", "inception_v3", "resnet50",
                             "vgg16", "tiny_dfu"}) {
        const auto spec = nn::backbone_from_string(name);
        REQUIRE(std::string(spec.name) == name);
        REQUIRE(spec.feature_dim > 0);
    }
    REQUIRE_THROWS_AS(nn::backbone_from_string("alexnet"), std::invalid_argument);
    REQUIRE_THROWS_AS(nn::inflation_from_string("tile"), std::invalid_argument);
    REQUIRE(nn::inflation_from_string("mean_rgb") == nn::InflationMode::MeanRgb);
    REQUIRE(nn::inflation_from_string("zeros") == nn::InflationMode::Zeros);
}
