#ifndef THERMOFUSE_NN_LOSS_HPP
#define THERMOFUSE_NN_LOSS_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermofuse/core/tensor.hpp"

namespace thermofuse::nn {

template <typename T>
struct LossResult {
    double value = 0.0;
    Tensor<T> grad;  // d(loss)/d(logits)
};

// Class-weighted softmax cross-entropy with the reduction pinned to
//   loss = (1/N) * sum_i w[y_i] * CE_i
// so uniform weights reduce it to plain mean CE, and doubling w_c exactly
// doubles the loss of an all-class-c batch.
template <typename T>
LossResult<T> weighted_cross_entropy(const Tensor<T>& logits, const std::vector<int>& labels,
                                     const std::vector<double>& class_weights) {
    const int n = logits.n, k = logits.c;
    if (logits.h != 1 || logits.w != 1)
        throw std::invalid_argument("cross_entropy: logits must be (N,K,1,1), got " +
                                    logits.shape_str());
    if (int(labels.size()) != n) throw std::invalid_argument("cross_entropy: label count mismatch");
    if (int(class_weights.size()) != k)
        throw std::invalid_argument("cross_entropy: weight count mismatch");

    LossResult<T> res;
    res.grad = Tensor<T>(n, k, 1, 1);
    double total = 0.0;
    std::vector<double> p(static_cast<std::size_t>(k));
    for (int s = 0; s < n; ++s) {
        const int y = labels[std::size_t(s)];
        if (y < 0 || y >= k) throw std::invalid_argument("cross_entropy: label out of range");
        const T* z = logits.sample_ptr(s);
        double zmax = double(z[0]);
        for (int c = 1; c < k; ++c) zmax = std::max(zmax, double(z[c]));
        double denom = 0.0;
        for (int c = 0; c < k; ++c) {
            p[std::size_t(c)] = std::exp(double(z[c]) - zmax);
            denom += p[std::size_t(c)];
        }
        const double wy = class_weights[std::size_t(y)];
        total += wy * (std::log(denom) - (double(z[y]) - zmax));
        T* gp = res.grad.sample_ptr(s);
        const double scale = wy / double(n);
        for (int c = 0; c < k; ++c)
            gp[c] = T(scale * (p[std::size_t(c)] / denom - (c == y ? 1.0 : 0.0)));
    }
    res.value = total / double(n);
    return res;
}

// softmax over the channel axis of (N,K,1,1) logits
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
    Tensor<T> out(logits.n, logits.c, 1, 1);
    for (int s = 0; s < logits.n; ++s) {
        const T* z = logits.sample_ptr(s);
        T* o = out.sample_ptr(s);
        double zmax = double(z[0]);
        for (int c = 1; c < logits.c; ++c) zmax = std::max(zmax, double(z[c]));
        double denom = 0.0;
        for (int c = 0; c < logits.c; ++c) denom += std::exp(double(z[c]) - zmax);
        for (int c = 0; c < logits.c; ++c) o[c] = T(std::exp(double(z[c]) - zmax) / denom);
    }
    return out;
}

}  // namespace thermofuse::nn

#endif
