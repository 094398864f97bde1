#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <thread>

#include "thermofuse/bench/timing.hpp"
#include "thermofuse/core/rng.hpp"
#include "thermofuse/explain/gradcam.hpp"
#include "thermofuse/explain/overlay.hpp"
#include "thermofuse/nn/model.hpp"

using namespace thermofuse;
using Catch::Approx;

namespace {

nn::Model<float> tiny_model(std::uint64_t seed) {
    nn::ModelConfig cfg;
    cfg.backbone = nn::BackboneId::TinyDfu;
    cfg.modality = data::Modality::FUSED;
    cfg.seed = seed;
    return nn::build_model<float>(cfg);
}

data::FusedSample random_sample(std::uint64_t seed) {
    data::FusedSample s;
    s.modality = data::Modality::FUSED;
    s.image = ImageF(4, 64, 64);
    Rng rng(seed);
    for (auto& v : s.image.v) v = float(rng.uniform());
    return s;
}

}  // namespace

TEST_CASE("cam maps are normalized, non-negative and input-sized") {
    auto model = tiny_model(3001);
    const auto sample = random_sample(1);
    const auto cam = explain::gradcam(model, sample);

    REQUIRE(cam.layer == "backbone.block4.relu");
    REQUIRE(cam.raw.height == 8);
    REQUIRE(cam.raw.width == 8);
    REQUIRE(cam.heat.height == 64);
    REQUIRE(cam.heat.width == 64);
    REQUIRE(cam.probs.size() == 6);

    float peak = 0.f;
    for (float v : cam.raw.v) {
        REQUIRE(v >= 0.0f);
        REQUIRE(v <= 1.0f);
        peak = std::max(peak, v);
    }
    REQUIRE(peak == 1.0f);  // max-normalized unless identically zero
    for (float v : cam.heat.v) {
        REQUIRE(v >= 0.0f);
        REQUIRE(v <= 1.0f);
    }
    double psum = 0;
    for (double p : cam.probs) psum += p;
    REQUIRE(psum == Approx(1.0).epsilon(1e-5));
}

TEST_CASE("the default target is the argmax class, and explicit targets stick") {
    auto model = tiny_model(3002);
    const auto sample = random_sample(2);
    const auto cam = explain::gradcam(model, sample);
    int arg = 0;
    for (int c = 1; c < 6; ++c)
        if (cam.probs[std::size_t(c)] > cam.probs[std::size_t(arg)]) arg = c;
    REQUIRE(cam.target_class == arg);

    const auto cam4 = explain::gradcam(model, sample, 4);
    REQUIRE(cam4.target_class == 4);
    REQUIRE_THROWS_AS(explain::gradcam(model, sample, 6), std::invalid_argument);
}

TEST_CASE("gradcam is deterministic and layer-addressable") {
    auto model = tiny_model(3003);
    const auto sample = random_sample(3);
    const auto a = explain::gradcam(model, sample, 2);
    const auto b = explain::gradcam(model, sample, 2);
    REQUIRE(a.raw.v == b.raw.v);
    REQUIRE(a.heat.v == b.heat.v);

    const auto earlier = explain::gradcam(model, sample, 2, "backbone.block3.relu");
    REQUIRE(earlier.raw.height == 8);  // block3 runs at stride 8 too
    REQUIRE(earlier.layer == "backbone.block3.relu");

    REQUIRE_THROWS_AS(explain::gradcam(model, sample, 2, "backbone.missing"),
                      nn::UnknownLayer);
    // the pooled embedding has no spatial extent to map
    REQUIRE_THROWS_AS(explain::gradcam(model, sample, 2, "backbone.gap"),
                      explain::NonSpatialLayer);
}

TEST_CASE("a zero-gradient head yields an all-zero map") {
    auto model = tiny_model(3004);
    // zero the final classifier row: d(logit_c)/d(anything upstream) == 0
    for (auto& p : model.net.params())
        if (p.name.rfind("head.fc3", 0) == 0) p.value->fill(0.f);
    const auto cam = explain::gradcam(model, random_sample(4), 1);
    for (float v : cam.raw.v) REQUIRE(v == 0.0f);
    for (float v : cam.heat.v) REQUIRE(v == 0.0f);
}

TEST_CASE("overlay blends by heat strength") {
    ImageF rgb(3, 8, 8);
    for (auto& v : rgb.v) v = 0.5f;
    ImageF heat(1, 8, 8);       // zero left half, one right half
    for (int y = 0; y < 8; ++y)
        for (int x = 4; x < 8; ++x) heat.at(0, y, x) = 1.0f;

    const auto out = explain::overlay_cam(rgb, heat, 0.4);
    REQUIRE(out.channels == 3);
    // zero heat: the photo passes through untouched
    REQUIRE(out.at(0, 3, 1) == Approx(0.5f));
    REQUIRE(out.at(2, 3, 1) == Approx(0.5f));
    // full heat at alpha 0.4: 60% photo + 40% colormap(1) = white
    REQUIRE(out.at(0, 3, 6) == Approx(0.6f * 0.5f + 0.4f * 1.0f));

    ImageF wrong(1, 8, 8);
    REQUIRE_THROWS_AS(explain::overlay_cam(wrong, heat, 0.4), std::invalid_argument);
    ImageF small(1, 4, 4);
    REQUIRE_THROWS_AS(explain::overlay_cam(rgb, small, 0.4), std::invalid_argument);
}

TEST_CASE("the hot colormap runs black to white") {
    const auto lo = explain::colormap_hot(0.0f);
    REQUIRE(lo[0] == 0.0f);
    REQUIRE(lo[1] == 0.0f);
    REQUIRE(lo[2] == 0.0f);
    const auto hi = explain::colormap_hot(1.0f);
    REQUIRE(hi[0] == 1.0f);
    REQUIRE(hi[1] == 1.0f);
    REQUIRE(hi[2] == 1.0f);
    const auto mid = explain::colormap_hot(0.4f);  // red fully on, green rising
    REQUIRE(mid[0] == Approx(1.0f));
    REQUIRE(mid[1] == Approx(0.2f));
    REQUIRE(mid[2] == 0.0f);
}

TEST_CASE("timing report is internally consistent") {
    int calls = 0;
    const auto rep = bench::time_inference([&] { ++calls; }, 5, 50);
    REQUIRE(calls == 55);
    REQUIRE(rep.n_warmup == 5);
    REQUIRE(rep.n_iter == 50);
    REQUIRE(rep.min_ms <= rep.mean_ms);
    REQUIRE(rep.mean_ms <= rep.max_ms);
    REQUIRE(rep.fps == Approx(1000.0 / rep.mean_ms).epsilon(1e-12));
    REQUIRE(std::abs(rep.fps - 1000.0 / rep.mean_ms) / rep.fps < 0.005);
}

TEST_CASE("a 5ms sleep stub times out around 5ms") {
    const auto rep = bench::time_inference(
        [] { std::this_thread::sleep_for(std::chrono::milliseconds(5)); }, 2, 20);
    REQUIRE(rep.mean_ms >= 5.0);
    REQUIRE(rep.mean_ms <= 7.0);  // sleep overshoot budget
    REQUIRE(rep.min_ms >= 5.0);
}

TEST_CASE("fps figures reproduce the published latency table") {
    // 3.29 ms -> 303.95 fps, matching the FUSED DenseNet row
    const double fps = 1000.0 / 3.29;
    REQUIRE(std::abs(fps - 303.94) / 303.94 < 1e-3);
    REQUIRE(fps == Approx(303.951).epsilon(1e-4));
}

TEST_CASE("markdown rows carry the seven benchmark columns") {
    bench::TimingReport r;
    r.model_id = "tiny_dfu";
    r.modality = "FUSED";
    r.mean_ms = 3.291;
    r.min_ms = 3.001;
    r.max_ms = 4.105;
    r.fps = 1000.0 / r.mean_ms;
    const auto header = bench::markdown_header();
    REQUIRE(header.find("| Model | Modality | Params (M) | Mean (ms) | Max (ms) | Min (ms) | FPS |")
            == 0);
    const auto row = bench::markdown_row(r, 8.53);
    REQUIRE(row.find("tiny_dfu") != std::string::npos);
    REQUIRE(row.find("3.29") != std::string::npos);   // mean, 2 dp
    REQUIRE(row.find("303.86") != std::string::npos); // fps of 3.291 ms
    REQUIRE(row.find("8.53") != std::string::npos);
}
