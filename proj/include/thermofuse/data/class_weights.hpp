#ifndef THERMOFUSE_DATA_CLASS_WEIGHTS_HPP
#define THERMOFUSE_DATA_CLASS_WEIGHTS_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "thermofuse/data/manifest.hpp"

namespace thermofuse::data {

struct EmptyClass : std::runtime_error {
    explicit EmptyClass(int grade)
        : std::runtime_error("EmptyClass: class " + std::to_string(grade) + " has no samples") {}
};

struct ClassWeights {
    std::array<double, kNumGrades> w{};

    double operator[](std::size_t c) const { return w[c]; }
};

// Mean-normalized inverse frequency: w_c = N / (6 * n_c), so w_c * n_c is the
// same for every class and the average weight per *sample* is exactly 1
// (sum_c n_c * w_c = N), keeping the weighted loss on the unweighted scale.
inline ClassWeights class_weights(const std::array<std::int64_t, kNumGrades>& counts) {
    std::int64_t total = 0;
    for (int c = 0; c < kNumGrades; ++c) {
        if (counts[std::size_t(c)] <= 0) throw EmptyClass(c);
        total += counts[std::size_t(c)];
    }
    ClassWeights cw;
    for (int c = 0; c < kNumGrades; ++c)
        cw.w[std::size_t(c)] = double(total) / (double(kNumGrades) * double(counts[std::size_t(c)]));
    return cw;
}

inline ClassWeights class_weights(const DatasetManifest& mf, Modality m) {
    return class_weights(mf.class_counts(m));
}

}  // namespace thermofuse::data

#endif
