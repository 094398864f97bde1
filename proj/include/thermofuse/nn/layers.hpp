#ifndef THERMOFUSE_NN_LAYERS_HPP
#define THERMOFUSE_NN_LAYERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "thermofuse/core/rng.hpp"
#include "thermofuse/core/tensor.hpp"

namespace thermofuse::nn {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapRM = Eigen::Map<const MatRM<T>>;

template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
};

template <typename T>
struct BufferRef {
    std::string name;
    Tensor<T>* value;
};

struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& what) : std::invalid_argument("ShapeError: " + what) {}
};

// One graph op. The graph keeps inputs/outputs alive between forward and
// backward, so layers only cache op-specific state (BN batch stats, pooling
// argmax, dropout masks). backward() accumulates nothing itself — it returns
// fresh per-input gradients and adds into its own parameter grads.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool training) = 0;
    virtual std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in,
                                            const Tensor<T>& out, const Tensor<T>& grad_out) = 0;
    virtual void collect(const std::string& prefix, std::vector<ParamRef<T>>* params,
                         std::vector<BufferRef<T>>* buffers) {
        (void)prefix;
        (void)params;
        (void)buffers;
    }
    virtual void init_params(Rng& rng) { (void)rng; }
    virtual const char* kind() const = 0;
};

namespace detail {

template <typename T>
inline const Tensor<T>& only(const std::vector<const Tensor<T>*>& in, const char* who) {
    if (in.size() != 1) throw ShapeError(std::string(who) + ": expects exactly one input");
    return *in[0];
}

template <typename T>
inline void he_normal(Tensor<T>& w, Rng& rng) {
    const double fan_in = double(w.per_sample());
    const double sd = std::sqrt(2.0 / (fan_in > 0 ? fan_in : 1.0));
    for (auto& v : w.data) v = T(rng.normal(0.0, sd));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution (grouped, symmetric padding) via im2col + GEMM. The column
// buffer is rebuilt in backward instead of cached: recompute is cheap next to
// holding K x L floats per layer for a whole graph.
template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(int in_c, int out_c, int kh, int kw, int stride = 1, int pad = 0, int groups = 1,
           bool bias = true)
        : Conv2d(in_c, out_c, kh, kw, stride, stride, pad, pad, groups, bias) {}

    Conv2d(int in_c, int out_c, int kh, int kw, int sh, int sw, int ph, int pw, int groups,
           bool bias)
        : in_c_(in_c), out_c_(out_c), kh_(kh), kw_(kw), sh_(sh), sw_(sw), ph_(ph),
          pw_(pw), groups_(groups), has_bias_(bias) {
        if (in_c % groups || out_c % groups) throw ShapeError("conv: channels not divisible by groups");
        weight_ = Tensor<T>(out_c, in_c / groups, kh, kw);
        weight_grad_ = Tensor<T>(out_c, in_c / groups, kh, kw);
        if (bias) {
            bias_ = Tensor<T>(1, out_c, 1, 1);
            bias_grad_ = Tensor<T>(1, out_c, 1, 1);
        }
    }

    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        const Tensor<T>& x = detail::only(in, "conv");
        if (x.c != in_c_) throw ShapeError("conv: got " + std::to_string(x.c) + " channels, want " +
                                           std::to_string(in_c_));
        const int oh = (x.h + 2 * ph_ - kh_) / sh_ + 1;
        const int ow = (x.w + 2 * pw_ - kw_) / sw_ + 1;
        if (oh < 1 || ow < 1) throw ShapeError("conv: output would be empty for input " + x.shape_str());
        Tensor<T> y(x.n, out_c_, oh, ow);

        const int icg = in_c_ / groups_, ocg = out_c_ / groups_;
        const std::size_t K = std::size_t(icg) * kh_ * kw_;
        const std::size_t L = std::size_t(oh) * ow;
        std::vector<T> col(K * L);
        for (int s = 0; s < x.n; ++s) {
            for (int g = 0; g < groups_; ++g) {
                im2col(x, s, g * icg, icg, oh, ow, col.data());
                CMapRM<T> W(weight_.data.data() + std::size_t(g) * ocg * K, ocg, Eigen::Index(K));
                CMapRM<T> C(col.data(), Eigen::Index(K), Eigen::Index(L));
                MapRM<T> O(y.sample_ptr(s) + std::size_t(g) * ocg * L, ocg, Eigen::Index(L));
                O.noalias() = W * C;
            }
            if (has_bias_) {
                for (int oc = 0; oc < out_c_; ++oc) {
                    T* p = y.sample_ptr(s) + std::size_t(oc) * L;
                    const T b = bias_.data[std::size_t(oc)];
                    for (std::size_t i = 0; i < L; ++i) p[i] += b;
                }
            }
        }
        return y;
    }

    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>& out,
                                    const Tensor<T>& g) override {
        const Tensor<T>& x = *in[0];
        const int oh = out.h, ow = out.w;
        const int icg = in_c_ / groups_, ocg = out_c_ / groups_;
        const std::size_t K = std::size_t(icg) * kh_ * kw_;
        const std::size_t L = std::size_t(oh) * ow;
        Tensor<T> dx(x.n, x.c, x.h, x.w);
        std::vector<T> col(K * L), dcol(K * L);
        for (int s = 0; s < x.n; ++s) {
            for (int g_ = 0; g_ < groups_; ++g_) {
                im2col(x, s, g_ * icg, icg, oh, ow, col.data());
                CMapRM<T> G(g.sample_ptr(s) + std::size_t(g_) * ocg * L, ocg, Eigen::Index(L));
                CMapRM<T> C(col.data(), Eigen::Index(K), Eigen::Index(L));
                MapRM<T> dW(weight_grad_.data.data() + std::size_t(g_) * ocg * K, ocg,
                            Eigen::Index(K));
                dW.noalias() += G * C.transpose();
                CMapRM<T> W(weight_.data.data() + std::size_t(g_) * ocg * K, ocg, Eigen::Index(K));
                MapRM<T> dC(dcol.data(), Eigen::Index(K), Eigen::Index(L));
                dC.noalias() = W.transpose() * G;
                col2im(dcol.data(), s, g_ * icg, icg, oh, ow, dx);
            }
            if (has_bias_) {
                for (int oc = 0; oc < out_c_; ++oc) {
                    const T* p = g.sample_ptr(s) + std::size_t(oc) * L;
                    T acc = 0;
                    for (std::size_t i = 0; i < L; ++i) acc += p[i];
                    bias_grad_.data[std::size_t(oc)] += acc;
                }
            }
        }
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }

    void collect(const std::string& prefix, std::vector<ParamRef<T>>* params,
                 std::vector<BufferRef<T>>* buffers) override {
        (void)buffers;
        if (!params) return;
        params->push_back({prefix + ".weight", &weight_, &weight_grad_});
        if (has_bias_) params->push_back({prefix + ".bias", &bias_, &bias_grad_});
    }

    void init_params(Rng& rng) override {
        detail::he_normal(weight_, rng);
        if (has_bias_) bias_.fill(T(0));
    }

    const char* kind() const override { return "conv"; }

    Tensor<T>& weight() { return weight_; }
    Tensor<T>& bias() { return bias_; }
    int in_channels() const { return in_c_; }
    int out_channels() const { return out_c_; }
    int kernel_h() const { return kh_; }
    int kernel_w() const { return kw_; }

private:
    void im2col(const Tensor<T>& x, int s, int c0, int icg, int oh, int ow, T* col) const {
        const T* xs = x.sample_ptr(s);
        const std::size_t plane = std::size_t(x.h) * x.w;
        std::size_t row = 0;
        for (int ic = 0; ic < icg; ++ic) {
            const T* xp = xs + std::size_t(c0 + ic) * plane;
            for (int ky = 0; ky < kh_; ++ky)
                for (int kx = 0; kx < kw_; ++kx, ++row) {
                    T* out_row = col + row * std::size_t(oh) * ow;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * sh_ - ph_ + ky;
                        T* dst = out_row + std::size_t(oy) * ow;
                        if (iy < 0 || iy >= x.h) {
                            for (int ox = 0; ox < ow; ++ox) dst[ox] = T(0);
                            continue;
                        }
                        const T* src = xp + std::size_t(iy) * x.w;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * sw_ - pw_ + kx;
                            dst[ox] = (ix >= 0 && ix < x.w) ? src[ix] : T(0);
                        }
                    }
                }
        }
    }

    void col2im(const T* dcol, int s, int c0, int icg, int oh, int ow, Tensor<T>& dx) const {
        T* xs = dx.sample_ptr(s);
        const std::size_t plane = std::size_t(dx.h) * dx.w;
        std::size_t row = 0;
        for (int ic = 0; ic < icg; ++ic) {
            T* xp = xs + std::size_t(c0 + ic) * plane;
            for (int ky = 0; ky < kh_; ++ky)
                for (int kx = 0; kx < kw_; ++kx, ++row) {
                    const T* src_row = dcol + row * std::size_t(oh) * ow;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * sh_ - ph_ + ky;
                        if (iy < 0 || iy >= dx.h) continue;
                        const T* src = src_row + std::size_t(oy) * ow;
                        T* dst = xp + std::size_t(iy) * dx.w;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * sw_ - pw_ + kx;
                            if (ix >= 0 && ix < dx.w) dst[ix] += src[ox];
                        }
                    }
                }
        }
    }

    int in_c_, out_c_, kh_, kw_, sh_, sw_, ph_, pw_, groups_;
    bool has_bias_;
    Tensor<T> weight_, weight_grad_, bias_, bias_grad_;
};

// ---------------------------------------------------------------------------
// BatchNorm over (N,H,W) per channel; covers both the 2d and the 1d case
// (vectors ride through as (N,C,1,1)). Running stats use the unbiased
// variance, normalization the biased one.
template <typename T>
class BatchNorm final : public Layer<T> {
public:
    explicit BatchNorm(int channels, double eps = 1e-5, double momentum = 0.1)
        : c_(channels), eps_(T(eps)), momentum_(T(momentum)) {
        gamma_ = Tensor<T>(1, channels, 1, 1);
        gamma_.fill(T(1));
        beta_ = Tensor<T>(1, channels, 1, 1);
        gamma_grad_ = Tensor<T>(1, channels, 1, 1);
        beta_grad_ = Tensor<T>(1, channels, 1, 1);
        running_mean_ = Tensor<T>(1, channels, 1, 1);
        running_var_ = Tensor<T>(1, channels, 1, 1);
        running_var_.fill(T(1));
        mean_ = Tensor<T>(1, channels, 1, 1);
        invstd_ = Tensor<T>(1, channels, 1, 1);
    }

    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool training) override {
        const Tensor<T>& x = detail::only(in, "batchnorm");
        if (x.c != c_) throw ShapeError("batchnorm: channel mismatch");
        const std::size_t m = std::size_t(x.n) * x.h * x.w;
        if (training && m < 2) throw ShapeError("batchnorm: needs more than one value per channel in training");
        Tensor<T> y(x.n, x.c, x.h, x.w);
        last_training_ = training;
        const std::size_t plane = std::size_t(x.h) * x.w;

        for (int c = 0; c < c_; ++c) {
            T mean, inv;
            if (training) {
                double acc = 0;
                for (int s = 0; s < x.n; ++s) {
                    const T* p = x.sample_ptr(s) + std::size_t(c) * plane;
                    for (std::size_t i = 0; i < plane; ++i) acc += double(p[i]);
                }
                mean = T(acc / double(m));
                double vacc = 0;
                for (int s = 0; s < x.n; ++s) {
                    const T* p = x.sample_ptr(s) + std::size_t(c) * plane;
                    for (std::size_t i = 0; i < plane; ++i) {
                        const double d = double(p[i]) - double(mean);
                        vacc += d * d;
                    }
                }
                const T var = T(vacc / double(m));
                inv = T(1) / std::sqrt(var + eps_);
                mean_.data[std::size_t(c)] = mean;
                invstd_.data[std::size_t(c)] = inv;
                const T var_unbiased = m > 1 ? T(vacc / double(m - 1)) : var;
                running_mean_.data[std::size_t(c)] =
                    (T(1) - momentum_) * running_mean_.data[std::size_t(c)] + momentum_ * mean;
                running_var_.data[std::size_t(c)] =
                    (T(1) - momentum_) * running_var_.data[std::size_t(c)] + momentum_ * var_unbiased;
            } else {
                mean = running_mean_.data[std::size_t(c)];
                inv = T(1) / std::sqrt(running_var_.data[std::size_t(c)] + eps_);
            }
            const T gp = gamma_.data[std::size_t(c)], bp = beta_.data[std::size_t(c)];
            for (int s = 0; s < x.n; ++s) {
                const T* p = x.sample_ptr(s) + std::size_t(c) * plane;
                T* q = y.sample_ptr(s) + std::size_t(c) * plane;
                for (std::size_t i = 0; i < plane; ++i) q[i] = gp * (p[i] - mean) * inv + bp;
            }
        }
        return y;
    }

    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        const Tensor<T>& x = *in[0];
        Tensor<T> dx(x.n, x.c, x.h, x.w);
        const std::size_t plane = std::size_t(x.h) * x.w;
        const std::size_t m = std::size_t(x.n) * plane;

        for (int c = 0; c < c_; ++c) {
            const T mean = last_training_ ? mean_.data[std::size_t(c)] : running_mean_.data[std::size_t(c)];
            const T inv = last_training_
                              ? invstd_.data[std::size_t(c)]
                              : T(1) / std::sqrt(running_var_.data[std::size_t(c)] + eps_);
            const T gp = gamma_.data[std::size_t(c)];
            double sum_g = 0, sum_gx = 0;
            for (int s = 0; s < x.n; ++s) {
                const T* xp = x.sample_ptr(s) + std::size_t(c) * plane;
                const T* gq = g.sample_ptr(s) + std::size_t(c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const T xhat = (xp[i] - mean) * inv;
                    sum_g += double(gq[i]);
                    sum_gx += double(gq[i]) * double(xhat);
                }
            }
            gamma_grad_.data[std::size_t(c)] += T(sum_gx);
            beta_grad_.data[std::size_t(c)] += T(sum_g);
            const T mg = T(sum_g / double(m)), mgx = T(sum_gx / double(m));
            for (int s = 0; s < x.n; ++s) {
                const T* xp = x.sample_ptr(s) + std::size_t(c) * plane;
                const T* gq = g.sample_ptr(s) + std::size_t(c) * plane;
                T* dq = dx.sample_ptr(s) + std::size_t(c) * plane;
                if (last_training_) {
                    for (std::size_t i = 0; i < plane; ++i) {
                        const T xhat = (xp[i] - mean) * inv;
                        dq[i] = gp * inv * (gq[i] - mg - xhat * mgx);
                    }
                } else {
                    for (std::size_t i = 0; i < plane; ++i) dq[i] = gp * inv * gq[i];
                }
            }
        }
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }

    void collect(const std::string& prefix, std::vector<ParamRef<T>>* params,
                 std::vector<BufferRef<T>>* buffers) override {
        if (params) {
            params->push_back({prefix + ".weight", &gamma_, &gamma_grad_});
            params->push_back({prefix + ".bias", &beta_, &beta_grad_});
        }
        if (buffers) {
            buffers->push_back({prefix + ".running_mean", &running_mean_});
            buffers->push_back({prefix + ".running_var", &running_var_});
        }
    }

    const char* kind() const override { return "bn"; }

private:
    int c_;
    T eps_, momentum_;
    bool last_training_ = false;
    Tensor<T> gamma_, beta_, gamma_grad_, beta_grad_;
    Tensor<T> running_mean_, running_var_;
    Tensor<T> mean_, invstd_;  // batch stats of the last training forward
};

// ---------------------------------------------------------------------------
template <typename T>
class ReLU final : public Layer<T> {
public:
    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        Tensor<T> y = detail::only(in, "relu");
        for (auto& v : y.data) v = v > T(0) ? v : T(0);
        return y;
    }
    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>&, const Tensor<T>& out,
                                    const Tensor<T>& g) override {
        Tensor<T> dx = g;
        for (std::size_t i = 0; i < dx.data.size(); ++i)
            if (!(out.data[i] > T(0))) dx.data[i] = T(0);
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }
    const char* kind() const override { return "relu"; }
};

template <typename T>
class SiLU final : public Layer<T> {
public:
    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        Tensor<T> y = detail::only(in, "silu");
        for (auto& v : y.data) v = v / (T(1) + std::exp(-v));
        return y;
    }
    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        const Tensor<T>& x = *in[0];
        Tensor<T> dx = g;
        for (std::size_t i = 0; i < dx.data.size(); ++i) {
            const T s = T(1) / (T(1) + std::exp(-x.data[i]));
            dx.data[i] *= s * (T(1) + x.data[i] * (T(1) - s));
        }
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }
    const char* kind() const override { return "silu"; }
};

template <typename T>
class Sigmoid final : public Layer<T> {
public:
    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        Tensor<T> y = detail::only(in, "sigmoid");
        for (auto& v : y.data) v = T(1) / (T(1) + std::exp(-v));
        return y;
    }
    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>&, const Tensor<T>& out,
                                    const Tensor<T>& g) override {
        Tensor<T> dx = g;
        for (std::size_t i = 0; i < dx.data.size(); ++i)
            dx.data[i] *= out.data[i] * (T(1) - out.data[i]);
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }
    const char* kind() const override { return "sigmoid"; }
};

// ---------------------------------------------------------------------------
template <typename T>
class MaxPool final : public Layer<T> {
public:
    MaxPool(int k, int stride, int pad = 0) : kh_(k), kw_(k), sh_(stride), sw_(stride), ph_(pad), pw_(pad) {}

    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        const Tensor<T>& x = detail::only(in, "maxpool");
        const int oh = (x.h + 2 * ph_ - kh_) / sh_ + 1;
        const int ow = (x.w + 2 * pw_ - kw_) / sw_ + 1;
        if (oh < 1 || ow < 1) throw ShapeError("maxpool: output would be empty");
        Tensor<T> y(x.n, x.c, oh, ow);
        argmax_.assign(y.size(), -1);
        std::size_t o = 0;
        for (int s = 0; s < x.n; ++s)
            for (int c = 0; c < x.c; ++c) {
                const std::size_t base = (std::size_t(s) * x.c + c) * x.h * x.w;
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox, ++o) {
                        T best = -std::numeric_limits<T>::infinity();
                        std::int64_t bi = -1;
                        for (int ky = 0; ky < kh_; ++ky) {
                            const int iy = oy * sh_ - ph_ + ky;
                            if (iy < 0 || iy >= x.h) continue;
                            for (int kx = 0; kx < kw_; ++kx) {
                                const int ix = ox * sw_ - pw_ + kx;
                                if (ix < 0 || ix >= x.w) continue;
                                const T v = x.data[base + std::size_t(iy) * x.w + ix];
                                if (v > best) {
                                    best = v;
                                    bi = std::int64_t(base + std::size_t(iy) * x.w + ix);
                                }
                            }
                        }
                        y.data[o] = bi >= 0 ? best : T(0);
                        argmax_[o] = bi;
                    }
            }
        return y;
    }

    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        const Tensor<T>& x = *in[0];
        Tensor<T> dx(x.n, x.c, x.h, x.w);
        for (std::size_t o = 0; o < g.size(); ++o)
            if (argmax_[o] >= 0) dx.data[std::size_t(argmax_[o])] += g.data[o];
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }

    const char* kind() const override { return "maxpool"; }

private:
    int kh_, kw_, sh_, sw_, ph_, pw_;
    std::vector<std::int64_t> argmax_;
};

template <typename T>
class AvgPool final : public Layer<T> {
public:
    AvgPool(int k, int stride, int pad = 0) : kh_(k), kw_(k), sh_(stride), sw_(stride), ph_(pad), pw_(pad) {}

    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        const Tensor<T>& x = detail::only(in, "avgpool");
        const int oh = (x.h + 2 * ph_ - kh_) / sh_ + 1;
        const int ow = (x.w + 2 * pw_ - kw_) / sw_ + 1;
        if (oh < 1 || ow < 1) throw ShapeError("avgpool: output would be empty");
        Tensor<T> y(x.n, x.c, oh, ow);
        const T inv = T(1) / T(kh_ * kw_);  // padding counts, matching the usual default
        std::size_t o = 0;
        for (int s = 0; s < x.n; ++s)
            for (int c = 0; c < x.c; ++c) {
                const std::size_t base = (std::size_t(s) * x.c + c) * x.h * x.w;
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox, ++o) {
                        T acc = 0;
                        for (int ky = 0; ky < kh_; ++ky) {
                            const int iy = oy * sh_ - ph_ + ky;
                            if (iy < 0 || iy >= x.h) continue;
                            for (int kx = 0; kx < kw_; ++kx) {
                                const int ix = ox * sw_ - pw_ + kx;
                                if (ix >= 0 && ix < x.w) acc += x.data[base + std::size_t(iy) * x.w + ix];
                            }
                        }
                        y.data[o] = acc * inv;
                    }
            }
        return y;
    }

    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>& out,
                                    const Tensor<T>& g) override {
        const Tensor<T>& x = *in[0];
        Tensor<T> dx(x.n, x.c, x.h, x.w);
        const T inv = T(1) / T(kh_ * kw_);
        std::size_t o = 0;
        for (int s = 0; s < x.n; ++s)
            for (int c = 0; c < x.c; ++c) {
                const std::size_t base = (std::size_t(s) * x.c + c) * x.h * x.w;
                for (int oy = 0; oy < out.h; ++oy)
                    for (int ox = 0; ox < out.w; ++ox, ++o) {
                        const T go = g.data[o] * inv;
                        for (int ky = 0; ky < kh_; ++ky) {
                            const int iy = oy * sh_ - ph_ + ky;
                            if (iy < 0 || iy >= x.h) continue;
                            for (int kx = 0; kx < kw_; ++kx) {
                                const int ix = ox * sw_ - pw_ + kx;
                                if (ix >= 0 && ix < x.w) dx.data[base + std::size_t(iy) * x.w + ix] += go;
                            }
                        }
                    }
            }
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }

    const char* kind() const override { return "avgpool"; }

private:
    int kh_, kw_, sh_, sw_, ph_, pw_;
};

// adaptive average pool to 1x1
template <typename T>
class GlobalAvgPool final : public Layer<T> {
public:
    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        const Tensor<T>& x = detail::only(in, "gap");
        Tensor<T> y(x.n, x.c, 1, 1);
        const std::size_t plane = std::size_t(x.h) * x.w;
        for (int s = 0; s < x.n; ++s)
            for (int c = 0; c < x.c; ++c) {
                const T* p = x.sample_ptr(s) + std::size_t(c) * plane;
                double acc = 0;
                for (std::size_t i = 0; i < plane; ++i) acc += double(p[i]);
                y.at(s, c, 0, 0) = T(acc / double(plane));
            }
        return y;
    }
    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        const Tensor<T>& x = *in[0];
        Tensor<T> dx(x.n, x.c, x.h, x.w);
        const std::size_t plane = std::size_t(x.h) * x.w;
        const T inv = T(1) / T(plane);
        for (int s = 0; s < x.n; ++s)
            for (int c = 0; c < x.c; ++c) {
                T* q = dx.sample_ptr(s) + std::size_t(c) * plane;
                const T go = g.at(s, c, 0, 0) * inv;
                for (std::size_t i = 0; i < plane; ++i) q[i] = go;
            }
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }
    const char* kind() const override { return "gap"; }
};

// ---------------------------------------------------------------------------
template <typename T>
class Linear final : public Layer<T> {
public:
    Linear(int in_f, int out_f, bool bias = true) : in_f_(in_f), out_f_(out_f), has_bias_(bias) {
        weight_ = Tensor<T>(out_f, in_f, 1, 1);
        weight_grad_ = Tensor<T>(out_f, in_f, 1, 1);
        if (bias) {
            bias_ = Tensor<T>(1, out_f, 1, 1);
            bias_grad_ = Tensor<T>(1, out_f, 1, 1);
        }
    }

    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        const Tensor<T>& x = detail::only(in, "linear");
        if (int(x.per_sample()) != in_f_)
            throw ShapeError("linear: got " + std::to_string(x.per_sample()) + " features, want " +
                             std::to_string(in_f_));
        Tensor<T> y(x.n, out_f_, 1, 1);
        CMapRM<T> X(x.data.data(), x.n, in_f_);
        CMapRM<T> W(weight_.data.data(), out_f_, in_f_);
        MapRM<T> Y(y.data.data(), x.n, out_f_);
        Y.noalias() = X * W.transpose();
        if (has_bias_)
            for (int s = 0; s < x.n; ++s)
                for (int f = 0; f < out_f_; ++f) y.at(s, f, 0, 0) += bias_.data[std::size_t(f)];
        return y;
    }

    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        const Tensor<T>& x = *in[0];
        Tensor<T> dx(x.n, x.c, x.h, x.w);
        CMapRM<T> X(x.data.data(), x.n, in_f_);
        CMapRM<T> G(g.data.data(), x.n, out_f_);
        MapRM<T> dW(weight_grad_.data.data(), out_f_, in_f_);
        dW.noalias() += G.transpose() * X;
        MapRM<T> dX(dx.data.data(), x.n, in_f_);
        CMapRM<T> W(weight_.data.data(), out_f_, in_f_);
        dX.noalias() = G * W;
        if (has_bias_)
            for (int s = 0; s < x.n; ++s)
                for (int f = 0; f < out_f_; ++f) bias_grad_.data[std::size_t(f)] += g.at(s, f, 0, 0);
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }

    void collect(const std::string& prefix, std::vector<ParamRef<T>>* params,
                 std::vector<BufferRef<T>>* buffers) override {
        (void)buffers;
        if (!params) return;
        params->push_back({prefix + ".weight", &weight_, &weight_grad_});
        if (has_bias_) params->push_back({prefix + ".bias", &bias_, &bias_grad_});
    }

    void init_params(Rng& rng) override {
        detail::he_normal(weight_, rng);
        if (has_bias_) bias_.fill(T(0));
    }

    const char* kind() const override { return "linear"; }

    Tensor<T>& weight() { return weight_; }

private:
    int in_f_, out_f_;
    bool has_bias_;
    Tensor<T> weight_, weight_grad_, bias_, bias_grad_;
};

// inverted dropout: scaling happens at train time, eval is the identity
template <typename T>
class Dropout final : public Layer<T> {
public:
    explicit Dropout(double p) : p_(p), rng_(0x7f5u) {}

    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool training) override {
        Tensor<T> y = detail::only(in, "dropout");
        if (!training || p_ <= 0.0) {
            mask_.clear();
            return y;
        }
        const T scale = T(1.0 / (1.0 - p_));
        mask_.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            const bool keep = !rng_.bernoulli(p_);
            mask_[i] = keep ? 1 : 0;
            y.data[i] = keep ? y.data[i] * scale : T(0);
        }
        return y;
    }

    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>&, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        Tensor<T> dx = g;
        if (!mask_.empty()) {
            const T scale = T(1.0 / (1.0 - p_));
            for (std::size_t i = 0; i < dx.data.size(); ++i)
                dx.data[i] = mask_[i] ? dx.data[i] * scale : T(0);
        }
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(dx));
        return dins;
    }

    void init_params(Rng& rng) override { rng_ = Rng(rng.next_u64()); }

    const char* kind() const override { return "dropout"; }

private:
    double p_;
    Rng rng_;
    std::vector<std::uint8_t> mask_;
};

template <typename T>
class Flatten final : public Layer<T> {
public:
    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        return detail::only(in, "flatten").flattened();
    }
    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        const Tensor<T>& x = *in[0];
        std::vector<Tensor<T>> dins;
        dins.push_back(g.reshaped(x.n, x.c, x.h, x.w));
        return dins;
    }
    const char* kind() const override { return "flatten"; }
};

// ---------------------------------------------------------------------------
// channel-axis concatenation of any number of inputs
template <typename T>
class Concat final : public Layer<T> {
public:
    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        if (in.empty()) throw ShapeError("concat: no inputs");
        int total_c = 0;
        for (const auto* t : in) {
            if (t->n != in[0]->n || t->h != in[0]->h || t->w != in[0]->w)
                throw ShapeError("concat: inputs disagree on N/H/W");
            total_c += t->c;
        }
        Tensor<T> y(in[0]->n, total_c, in[0]->h, in[0]->w);
        const std::size_t plane = std::size_t(y.h) * y.w;
        for (int s = 0; s < y.n; ++s) {
            T* dst = y.sample_ptr(s);
            for (const auto* t : in) {
                const std::size_t chunk = std::size_t(t->c) * plane;
                const T* src = t->sample_ptr(s);
                std::copy(src, src + chunk, dst);
                dst += chunk;
            }
        }
        return y;
    }

    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        std::vector<Tensor<T>> dins;
        const std::size_t plane = std::size_t(g.h) * g.w;
        std::size_t offset = 0;
        for (const auto* t : in) {
            Tensor<T> d(t->n, t->c, t->h, t->w);
            const std::size_t chunk = std::size_t(t->c) * plane;
            for (int s = 0; s < g.n; ++s) {
                const T* src = g.sample_ptr(s) + offset;
                std::copy(src, src + chunk, d.sample_ptr(s));
            }
            offset += chunk;
            dins.push_back(std::move(d));
        }
        return dins;
    }

    const char* kind() const override { return "concat"; }
};

template <typename T>
class Add final : public Layer<T> {
public:
    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        if (in.size() < 2) throw ShapeError("add: needs at least two inputs");
        Tensor<T> y = *in[0];
        for (std::size_t k = 1; k < in.size(); ++k) {
            if (!y.same_shape(*in[k])) throw ShapeError("add: shape mismatch");
            for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += in[k]->data[i];
        }
        return y;
    }
    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        return std::vector<Tensor<T>>(in.size(), g);
    }
    const char* kind() const override { return "add"; }
};

// elementwise product of two inputs; the second may be a per-channel gate
// (N,C,1,1) broadcast over space — the squeeze-excitation case
template <typename T>
class Mul final : public Layer<T> {
public:
    Tensor<T> forward(const std::vector<const Tensor<T>*>& in, bool) override {
        if (in.size() != 2) throw ShapeError("mul: needs exactly two inputs");
        const Tensor<T>& a = *in[0];
        const Tensor<T>& b = *in[1];
        Tensor<T> y = a;
        if (a.same_shape(b)) {
            for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= b.data[i];
        } else if (b.n == a.n && b.c == a.c && b.h == 1 && b.w == 1) {
            const std::size_t plane = std::size_t(a.h) * a.w;
            for (int s = 0; s < a.n; ++s)
                for (int c = 0; c < a.c; ++c) {
                    const T gate = b.at(s, c, 0, 0);
                    T* p = y.sample_ptr(s) + std::size_t(c) * plane;
                    for (std::size_t i = 0; i < plane; ++i) p[i] *= gate;
                }
        } else {
            throw ShapeError("mul: incompatible shapes " + a.shape_str() + " vs " + b.shape_str());
        }
        return y;
    }

    std::vector<Tensor<T>> backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&,
                                    const Tensor<T>& g) override {
        const Tensor<T>& a = *in[0];
        const Tensor<T>& b = *in[1];
        Tensor<T> da(a.n, a.c, a.h, a.w), db(b.n, b.c, b.h, b.w);
        if (a.same_shape(b)) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                da.data[i] = g.data[i] * b.data[i];
                db.data[i] = g.data[i] * a.data[i];
            }
        } else {
            const std::size_t plane = std::size_t(a.h) * a.w;
            for (int s = 0; s < a.n; ++s)
                for (int c = 0; c < a.c; ++c) {
                    const T gate = b.at(s, c, 0, 0);
                    const T* gp = g.sample_ptr(s) + std::size_t(c) * plane;
                    const T* ap = a.sample_ptr(s) + std::size_t(c) * plane;
                    T* dap = da.sample_ptr(s) + std::size_t(c) * plane;
                    double acc = 0;
                    for (std::size_t i = 0; i < plane; ++i) {
                        dap[i] = gp[i] * gate;
                        acc += double(gp[i]) * double(ap[i]);
                    }
                    db.at(s, c, 0, 0) = T(acc);
                }
        }
        std::vector<Tensor<T>> dins;
        dins.push_back(std::move(da));
        dins.push_back(std::move(db));
        return dins;
    }

    const char* kind() const override { return "mul"; }
};

}  // namespace thermofuse::nn

#endif
