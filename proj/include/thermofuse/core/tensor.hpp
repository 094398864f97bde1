#ifndef THERMOFUSE_CORE_TENSOR_HPP
#define THERMOFUSE_CORE_TENSOR_HPP

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermofuse {

// Dense NCHW tensor. Vectors and matrices are represented with the trailing
// spatial dims set to 1, so one type flows through the whole network.
template <typename T>
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(n_) * c_ * h_ * w_, T(0)) {}

    static Tensor zeros(int n_, int c_, int h_ = 1, int w_ = 1) { return Tensor(n_, c_, h_, w_); }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    std::size_t per_sample() const { return static_cast<std::size_t>(c) * h * w; }

    T& at(int in, int ic, int ih, int iw) {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw];
    }
    const T& at(int in, int ic, int ih, int iw) const {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw];
    }

    T* sample_ptr(int in) { return data.data() + static_cast<std::size_t>(in) * per_sample(); }
    const T* sample_ptr(int in) const { return data.data() + static_cast<std::size_t>(in) * per_sample(); }

    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

    // Reinterpret (N,C,H,W) as (N,C*H*W,1,1); data order is unchanged.
    Tensor flattened() const {
        Tensor out = *this;
        out.c = c * h * w;
        out.h = 1;
        out.w = 1;
        return out;
    }

    Tensor<T> reshaped(int n_, int c_, int h_, int w_) const {
        if (static_cast<std::size_t>(n_) * c_ * h_ * w_ != size())
            throw std::invalid_argument("tensor reshape: element count mismatch");
        Tensor out = *this;
        out.n = n_; out.c = c_; out.h = h_; out.w = w_;
        return out;
    }

    std::string shape_str() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
               std::to_string(h) + "," + std::to_string(w) + ")";
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.n = n; out.c = c; out.h = h; out.w = w;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

}  // namespace thermofuse

#endif
