#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

#include "thermofuse/core/rng.hpp"
#include "thermofuse/thermal/pipeline.hpp"

using namespace thermofuse;

TEST_CASE("count to celsius matches the calibration formula exhaustively") {
    for (int c = 0; c <= 65535; ++c) {
        const double expect = double(c) / 100.0 - 273.15;
        const double got = thermal::count_to_celsius(std::uint16_t(c));
        REQUIRE(got == Catch::Approx(expect).margin(1e-12));
    }
    // anchor points
    REQUIRE(thermal::count_to_celsius(27315) == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(thermal::count_to_celsius(31015) == Catch::Approx(37.0).margin(1e-9));
}

TEST_CASE("window stays at the default when the mean is inside") {
    const auto d = thermal::adaptive_window_for_mean(36.0);
    REQUIRE(d.window.lo == 30.0);
    REQUIRE(d.window.hi == 45.0);
    REQUIRE(d.steps == 0);
    REQUIRE_FALSE(d.floor_saturated);
}

TEST_CASE("window slides down in whole steps to reach a cool mean") {
    const auto d = thermal::adaptive_window_for_mean(26.05);
    REQUIRE(d.window.lo == 26.0);
    REQUIRE(d.window.hi == 41.0);
    REQUIRE(d.steps == -4);
    REQUIRE_FALSE(d.floor_saturated);
}

TEST_CASE("window slides up for a hot mean") {
    const auto d = thermal::adaptive_window_for_mean(47.5);
    REQUIRE(d.window.hi == 48.0);
    REQUIRE(d.window.lo == 33.0);
    REQUIRE(d.steps == 3);
}

TEST_CASE("downward slide saturates at the floor") {
    const auto d = thermal::adaptive_window_for_mean(-40.0);
    REQUIRE(d.window.lo == 0.0);
    REQUIRE(d.window.hi == 15.0);
    REQUIRE(d.floor_saturated);
}

TEST_CASE("window width is exactly 15 for random means") {
    Rng r(6);
    for (int i = 0; i < 10000; ++i) {
        const double mean = r.uniform(-60.0, 120.0);
        const auto d = thermal::adaptive_window_for_mean(mean);
        REQUIRE(d.window.hi - d.window.lo == Catch::Approx(15.0).margin(1e-12));
        if (!d.floor_saturated) {
            REQUIRE(mean >= d.window.lo);
            REQUIRE(mean <= d.window.hi);
        } else {
            REQUIRE(d.window.lo == 0.0);
        }
        // pure function of the mean
        const auto again = thermal::adaptive_window_for_mean(mean);
        REQUIRE(again.window.lo == d.window.lo);
        REQUIRE(again.steps == d.steps);
    }
}

TEST_CASE("normalization clamps out-of-window temperatures") {
    thermal::TemperatureMap map;
    map.celsius.assign(thermal::kFramePixels, 35.0);
    map.celsius[0] = 20.0;   // below
    map.celsius[1] = 50.0;   // above
    map.celsius[2] = 30.0;   // exactly lo
    map.celsius[3] = 45.0;   // exactly hi
    map.mean_c = 35.0;
    const auto norm = thermal::normalize(map, thermal::ThermalWindow{30.0, 45.0});
    REQUIRE(norm.values[0] == 0.0f);
    REQUIRE(norm.values[1] == 1.0f);
    REQUIRE(norm.values[2] == 0.0f);
    REQUIRE(norm.values[3] == 1.0f);
    REQUIRE(norm.values[4] == Catch::Approx((35.0 - 30.0) / 15.0).margin(1e-6));
    REQUIRE(norm.mask[0] == 0);
    REQUIRE(norm.mask[1] == 0);
    REQUIRE(norm.mask[2] == 1);
    REQUIRE(norm.mask[3] == 1);
}

TEST_CASE("decode_raw rejects frames that are not 160x120") {
    io::Gray16 img;
    img.width = 100;
    img.height = 100;
    img.pixels.assign(100 * 100, 30000);
    const auto bytes = io::write_tiff_gray16(img);
    REQUIRE_THROWS_AS(thermal::decode_raw(bytes), thermal::WrongShape);
}

TEST_CASE("process_frame is deterministic and round-trips encode_raw") {
    Rng r(7);
    thermal::RawThermalFrame frame;
    frame.pixels.resize(thermal::kFramePixels);
    for (auto& p : frame.pixels) p = std::uint16_t(r.uniform_int(29000, 32000));

    const auto bytes = io::write_tiff_gray16({thermal::kFrameWidth, thermal::kFrameHeight,
                                              frame.pixels});
    const auto decoded = thermal::decode_raw(bytes);
    REQUIRE(decoded.pixels == frame.pixels);

    const auto a = thermal::process_frame(frame);
    const auto b = thermal::process_frame(frame);
    REQUIRE(a.normalized.values == b.normalized.values);
    REQUIRE(a.diagnostics.window.lo == b.diagnostics.window.lo);

    // the mean the pipeline reports is the plain average of the field
    double sum = 0;
    for (auto p : frame.pixels) sum += thermal::count_to_celsius(p);
    REQUIRE(a.diagnostics.mean_c == Catch::Approx(sum / double(thermal::kFramePixels)).margin(1e-9));
}
