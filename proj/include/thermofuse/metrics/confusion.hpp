#ifndef THERMOFUSE_METRICS_CONFUSION_HPP
#define THERMOFUSE_METRICS_CONFUSION_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermofuse::metrics {

constexpr int kNumClasses = 6;

struct LengthMismatch : std::runtime_error {
    LengthMismatch() : std::runtime_error("LengthMismatch: label sequences differ in length") {}
};
struct BadLabel : std::runtime_error {
    explicit BadLabel(int v) : std::runtime_error("BadLabel: " + std::to_string(v)) {}
};
struct EmptyMatrix : std::runtime_error {
    EmptyMatrix() : std::runtime_error("EmptyMatrix: no evaluated samples") {}
};

// m[i][j] = count of true class i predicted as class j.
struct ConfusionMatrix {
    int k = kNumClasses;
    std::vector<std::int64_t> m;
    std::int64_t total = 0;

    explicit ConfusionMatrix(int k_ = kNumClasses) : k(k_), m(std::size_t(k_) * k_, 0) {}

    std::int64_t& at(int i, int j) { return m[std::size_t(i) * k + j]; }
    std::int64_t at(int i, int j) const { return m[std::size_t(i) * k + j]; }

    std::int64_t row_sum(int i) const {
        std::int64_t s = 0;
        for (int j = 0; j < k; ++j) s += at(i, j);
        return s;
    }
    std::int64_t col_sum(int j) const {
        std::int64_t s = 0;
        for (int i = 0; i < k; ++i) s += at(i, j);
        return s;
    }
    std::int64_t trace() const {
        std::int64_t s = 0;
        for (int i = 0; i < k; ++i) s += at(i, i);
        return s;
    }

    void add(int true_label, int predicted, std::int64_t count = 1) {
        if (true_label < 0 || true_label >= k) throw BadLabel(true_label);
        if (predicted < 0 || predicted >= k) throw BadLabel(predicted);
        at(true_label, predicted) += count;
        total += count;
    }
};

inline ConfusionMatrix confusion(const std::vector<int>& true_labels,
                                 const std::vector<int>& predicted_labels,
                                 int k = kNumClasses) {
    if (true_labels.size() != predicted_labels.size()) throw LengthMismatch();
    ConfusionMatrix cm(k);
    for (std::size_t i = 0; i < true_labels.size(); ++i)
        cm.add(true_labels[i], predicted_labels[i]);
    return cm;
}

}  // namespace thermofuse::metrics

#endif
