#ifndef THERMOFUSE_BENCH_TIMING_HPP
#define THERMOFUSE_BENCH_TIMING_HPP

#include <algorithm>
#include <chrono>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

namespace thermofuse::bench {

struct TimingReport {
    std::string model_id;
    std::string modality;
    double mean_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
    double fps = 0.0;
    int n_warmup = 0;
    int n_iter = 0;
    int batch_size = 1;
};

// Single-image latency: untimed warmup passes, then n_iter timed calls on a
// steady clock. fps is defined as 1000/mean so the report is self-consistent
// by construction.
inline TimingReport time_inference(const std::function<void()>& pass, int n_warmup = 20,
                                   int n_iter = 200) {
    using clock = std::chrono::steady_clock;
    TimingReport r;
    r.n_warmup = n_warmup;
    r.n_iter = n_iter;
    for (int i = 0; i < n_warmup; ++i) pass();
    double total = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int i = 0; i < n_iter; ++i) {
        const auto t0 = clock::now();
        pass();
        const auto t1 = clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        total += ms;
        lo = std::min(lo, ms);
        hi = std::max(hi, ms);
    }
    r.mean_ms = n_iter > 0 ? total / n_iter : 0.0;
    r.min_ms = n_iter > 0 ? lo : 0.0;
    r.max_ms = hi;
    r.fps = r.mean_ms > 0.0 ? 1000.0 / r.mean_ms : 0.0;
    return r;
}

inline std::string markdown_row(const TimingReport& r, double params_m) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << "| " << r.model_id << " | " << r.modality << " | " << params_m << " | " << r.mean_ms
       << " | " << r.max_ms << " | " << r.min_ms << " | " << r.fps << " |";
    return os.str();
}

inline std::string markdown_header() {
    return "| Model | Modality | Params (M) | Mean (ms) | Max (ms) | Min (ms) | FPS |\n"
           "|---|---|---|---|---|---|---|";
}

}  // namespace thermofuse::bench

#endif
