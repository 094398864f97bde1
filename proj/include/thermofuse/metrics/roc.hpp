#ifndef THERMOFUSE_METRICS_ROC_HPP
#define THERMOFUSE_METRICS_ROC_HPP

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "thermofuse/metrics/confusion.hpp"

namespace thermofuse::metrics {

struct SingleClassOnly : std::runtime_error {
    SingleClassOnly() : std::runtime_error("SingleClassOnly: AUC needs at least two classes") {}
};

struct RocResult {
    std::vector<std::optional<double>> per_class;  // absent when the class has no pos or neg
    double macro = 0.0;  // over defined classes
};

// Tie-aware one-vs-rest AUC via the rank statistic: ties contribute 1/2.
inline std::optional<double> binary_auc(const std::vector<double>& scores,
                                        const std::vector<char>& is_positive) {
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (char p : is_positive) n_pos += p ? 1 : 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks within tie groups (1-based)
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * (double(i + 1) + double(j + 1));
        for (std::size_t t = i; t <= j; ++t)
            if (is_positive[idx[t]]) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double u = rank_sum_pos - 0.5 * double(n_pos) * double(n_pos + 1);
    return u / (double(n_pos) * double(n_neg));
}

// labels in 0..k-1; prob_matrix is row-major n x k (scores per class; a
// softmax output in the usual case, any ranking scores work).
inline RocResult roc_auc(const std::vector<int>& labels,
                         const std::vector<double>& prob_matrix, int k = kNumClasses) {
    const std::size_t n = labels.size();
    if (prob_matrix.size() != n * std::size_t(k)) throw LengthMismatch();
    for (int lb : labels)
        if (lb < 0 || lb >= k) throw BadLabel(lb);

    RocResult res;
    res.per_class.resize(k);
    double sum = 0.0;
    int defined = 0;
    std::vector<double> scores(n);
    std::vector<char> pos(n);
    for (int c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = prob_matrix[i * k + c];
            pos[i] = labels[i] == c ? 1 : 0;
        }
        res.per_class[c] = binary_auc(scores, pos);
        if (res.per_class[c]) {
            sum += *res.per_class[c];
            ++defined;
        }
    }
    if (defined == 0) throw SingleClassOnly();
    res.macro = sum / defined;
    return res;
}

}  // namespace thermofuse::metrics

#endif
