#ifndef THERMOFUSE_THERMAL_PIPELINE_HPP
#define THERMOFUSE_THERMAL_PIPELINE_HPP

// Radiometric thermal preprocessing: decode raw centi-Kelvin frames, convert
// to Celsius, pick an adaptive temperature window around the scene mean, and
// normalize into [0,1] for use as a model input channel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermofuse/io/tiff.hpp"

namespace thermofuse::thermal {

constexpr int kFrameWidth = 160;
constexpr int kFrameHeight = 120;
constexpr std::size_t kFramePixels = std::size_t(kFrameWidth) * kFrameHeight;

struct WrongShape : std::runtime_error {
    explicit WrongShape(const std::string& what) : std::runtime_error("WrongShape: " + what) {}
};

// 160x120 matrix of unsigned 16-bit counts (Kelvin * 100), row-major.
struct RawThermalFrame {
    std::vector<std::uint16_t> pixels;

    std::uint16_t at(int y, int x) const { return pixels[std::size_t(y) * kFrameWidth + x]; }
};

struct TemperatureMap {
    std::vector<double> celsius;  // row-major, 160x120
    double mean_c = 0.0;

    double at(int y, int x) const { return celsius[std::size_t(y) * kFrameWidth + x]; }
};

struct ThermalWindow {
    double lo = 30.0;
    double hi = 45.0;
};

struct WindowDiagnostics {
    ThermalWindow window;
    double mean_c = 0.0;
    bool floor_saturated = false;
    int steps = 0;  // signed: negative for downward shifts
};

struct NormalizedThermal {
    std::vector<float> values;  // row-major, in [0,1]
    std::vector<std::uint8_t> mask;  // 1 where lo <= celsius <= hi
    ThermalWindow window;

    float at(int y, int x) const { return values[std::size_t(y) * kFrameWidth + x]; }
};

constexpr double kDefaultWindowLo = 30.0;
constexpr double kDefaultWindowHi = 45.0;
constexpr double kWindowWidth = kDefaultWindowHi - kDefaultWindowLo;  // 15 degC, kept under shifting

inline double count_to_celsius(std::uint16_t count) {
    return static_cast<double>(count) / 100.0 - 273.15;
}

inline RawThermalFrame decode_raw(const std::uint8_t* bytes, std::size_t n) {
    io::Gray16 img = io::read_tiff_gray16(bytes, n);
    if (img.width != kFrameWidth || img.height != kFrameHeight)
        throw WrongShape("expected 160x120, got " + std::to_string(img.width) + "x" +
                         std::to_string(img.height));
    RawThermalFrame frame;
    frame.pixels = std::move(img.pixels);
    return frame;
}

inline RawThermalFrame decode_raw(const std::vector<std::uint8_t>& bytes) {
    return decode_raw(bytes.data(), bytes.size());
}

inline std::vector<std::uint8_t> encode_raw(const RawThermalFrame& frame,
                                            io::TiffCompression comp = io::TiffCompression::None) {
    io::Gray16 img;
    img.width = kFrameWidth;
    img.height = kFrameHeight;
    img.pixels = frame.pixels;
    return io::write_tiff_gray16(img, comp);
}

inline TemperatureMap to_celsius(const RawThermalFrame& frame) {
    TemperatureMap map;
    map.celsius.resize(frame.pixels.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        map.celsius[i] = count_to_celsius(frame.pixels[i]);
        sum += map.celsius[i];
    }
    map.mean_c = sum / static_cast<double>(frame.pixels.size());
    return map;
}

// Window selection is a pure function of the scene mean. Starting from
// [30,45], the 15 degC window is stepped toward the mean until it contains
// it; downward steps stop at `floor_c` and flag saturation.
inline WindowDiagnostics adaptive_window_for_mean(double mean_c, double step = 1.0,
                                                  double floor_c = 0.0) {
    WindowDiagnostics diag;
    diag.mean_c = mean_c;
    double lo = kDefaultWindowLo, hi = kDefaultWindowHi;
    int steps = 0;
    if (mean_c < lo) {
        while (mean_c < lo && lo > floor_c) {
            lo = std::max(lo - step, floor_c);
            hi = lo + kWindowWidth;
            ++steps;
        }
        diag.floor_saturated = mean_c < lo;
        diag.steps = -steps;
    } else if (mean_c > hi) {
        while (mean_c > hi) {
            hi += step;
            lo = hi - kWindowWidth;
            ++steps;
        }
        diag.steps = steps;
    }
    diag.window = ThermalWindow{lo, hi};
    return diag;
}

inline WindowDiagnostics adaptive_window(const TemperatureMap& map, double step = 1.0,
                                         double floor_c = 0.0) {
    return adaptive_window_for_mean(map.mean_c, step, floor_c);
}

// Out-of-window pixels clamp to the bounds instead of being zeroed, so
// hotter-than-window tissue keeps full intensity.
inline NormalizedThermal normalize(const TemperatureMap& map, const ThermalWindow& window) {
    NormalizedThermal out;
    out.window = window;
    out.values.resize(map.celsius.size());
    out.mask.resize(map.celsius.size());
    const double lo = window.lo, span = window.hi - window.lo;
    for (std::size_t i = 0; i < map.celsius.size(); ++i) {
        const double c = map.celsius[i];
        double v = (c - lo) / span;
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        out.values[i] = static_cast<float>(v);
        out.mask[i] = (c >= window.lo && c <= window.hi) ? 1 : 0;
    }
    return out;
}

// Full per-frame pipeline; the usual entry point for callers.
struct ProcessedThermal {
    NormalizedThermal normalized;
    WindowDiagnostics diagnostics;
};

inline ProcessedThermal process_frame(const RawThermalFrame& frame, double step = 1.0,
                                      double floor_c = 0.0) {
    const TemperatureMap map = to_celsius(frame);
    const WindowDiagnostics diag = adaptive_window(map, step, floor_c);
    ProcessedThermal out;
    out.normalized = normalize(map, diag.window);
    out.diagnostics = diag;
    return out;
}

}  // namespace thermofuse::thermal

#endif
