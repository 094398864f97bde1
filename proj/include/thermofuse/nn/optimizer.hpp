#ifndef THERMOFUSE_NN_OPTIMIZER_HPP
#define THERMOFUSE_NN_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "thermofuse/core/tensor.hpp"
#include "thermofuse/nn/layers.hpp"

namespace thermofuse::nn {

// Adam with bias correction; state is bound to the parameter list passed in,
// so freezing a subtree = constructing the optimizer over a filtered list.
template <typename T>
class Adam {
public:
    explicit Adam(std::vector<ParamRef<T>> params, double lr = 1e-4, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (const auto& p : params_) {
            m_.emplace_back(p.value->n, p.value->c, p.value->h, p.value->w);
            v_.emplace_back(p.value->n, p.value->c, p.value->h, p.value->w);
        }
    }

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    std::int64_t steps() const { return t_; }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(b1_, double(t_));
        const double bc2 = 1.0 - std::pow(b2_, double(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Tensor<T>& w = *params_[i].value;
            const Tensor<T>& g = *params_[i].grad;
            Tensor<T>& m = m_[i];
            Tensor<T>& v = v_[i];
            for (std::size_t j = 0; j < w.size(); ++j) {
                const double gj = double(g.data[j]);
                const double mj = b1_ * double(m.data[j]) + (1.0 - b1_) * gj;
                const double vj = b2_ * double(v.data[j]) + (1.0 - b2_) * gj * gj;
                m.data[j] = T(mj);
                v.data[j] = T(vj);
                w.data[j] -= T(lr_ * (mj / bc1) / (std::sqrt(vj / bc2) + eps_));
            }
        }
    }

private:
    std::vector<ParamRef<T>> params_;
    double lr_, b1_, b2_, eps_;
    std::int64_t t_ = 0;
    std::vector<Tensor<T>> m_, v_;
};

}  // namespace thermofuse::nn

#endif
