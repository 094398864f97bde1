#ifndef THERMOFUSE_NN_CHECKPOINT_HPP
#define THERMOFUSE_NN_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermofuse/core/tensor.hpp"
#include "thermofuse/nn/graph.hpp"

namespace thermofuse::nn {

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& what)
        : std::runtime_error("CheckpointError: " + what) {}
};

struct CheckpointMismatch : std::runtime_error {
    explicit CheckpointMismatch(const std::string& what)
        : std::runtime_error("CheckpointMismatch: " + what) {}
};

// "TFWT" container: named tensors, little-endian, no alignment games.
//   magic[4] "TFWT" | u32 version | u64 count
//   per tensor: u32 name_len | name | u8 dtype (0=f32, 1=f64) | 4 x i32 shape | raw data
namespace detail {

inline constexpr char kMagic[4] = {'T', 'F', 'W', 'T'};
inline constexpr std::uint32_t kVersion = 1;

template <typename V>
void put(std::ofstream& out, V v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get(std::ifstream& in) {
    V v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(V));
    if (!in) throw CheckpointError("truncated file");
    return v;
}

template <typename T>
void write_tensor(std::ofstream& out, const std::string& name, const Tensor<T>& t) {
    put(out, std::uint32_t(name.size()));
    out.write(name.data(), std::streamsize(name.size()));
    put(out, std::uint8_t(sizeof(T) == 4 ? 0 : 1));
    put(out, std::int32_t(t.n));
    put(out, std::int32_t(t.c));
    put(out, std::int32_t(t.h));
    put(out, std::int32_t(t.w));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              std::streamsize(t.size() * sizeof(T)));
}

}  // namespace detail

template <typename T>
void save_checkpoint(Network<T>& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + path.string());
    out.write(detail::kMagic, 4);
    detail::put(out, detail::kVersion);
    auto params = net.params();
    auto buffers = net.buffers();
    detail::put(out, std::uint64_t(params.size() + buffers.size()));
    for (const auto& p : params) detail::write_tensor(out, p.name, *p.value);
    for (const auto& b : buffers) detail::write_tensor(out, b.name, *b.value);
    if (!out) throw CheckpointError("write failed for " + path.string());
}

// raw read; values come back as double regardless of stored precision
inline std::map<std::string, Tensor<double>> read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot read " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::kMagic, 4) != 0)
        throw CheckpointError("bad magic in " + path.string());
    const auto version = detail::get<std::uint32_t>(in);
    if (version != detail::kVersion)
        throw CheckpointError("unsupported version " + std::to_string(version));
    const auto count = detail::get<std::uint64_t>(in);
    std::map<std::string, Tensor<double>> tensors;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto name_len = detail::get<std::uint32_t>(in);
        if (name_len > 4096) throw CheckpointError("implausible name length");
        std::string name(name_len, '\0');
        in.read(name.data(), std::streamsize(name_len));
        const auto dtype = detail::get<std::uint8_t>(in);
        if (dtype > 1) throw CheckpointError("unknown dtype for tensor " + name);
        const auto n = detail::get<std::int32_t>(in);
        const auto c = detail::get<std::int32_t>(in);
        const auto h = detail::get<std::int32_t>(in);
        const auto w = detail::get<std::int32_t>(in);
        if (n < 0 || c < 0 || h < 0 || w < 0) throw CheckpointError("negative dim for " + name);
        Tensor<double> t(n, c, h, w);
        if (dtype == 0) {
            std::vector<float> tmp(t.size());
            in.read(reinterpret_cast<char*>(tmp.data()), std::streamsize(tmp.size() * 4));
            for (std::size_t j = 0; j < tmp.size(); ++j) t.data[j] = double(tmp[j]);
        } else {
            in.read(reinterpret_cast<char*>(t.data.data()), std::streamsize(t.size() * 8));
        }
        if (!in) throw CheckpointError("truncated tensor data for " + name);
        if (!tensors.emplace(name, std::move(t)).second)
            throw CheckpointError("duplicate tensor " + name);
    }
    return tensors;
}

// Strict restore: the stored name set must exactly cover the model's
// params+buffers, shape for shape.
template <typename T>
void load_checkpoint(Network<T>& net, const std::filesystem::path& path) {
    auto stored = read_checkpoint(path);
    std::size_t used = 0;
    auto restore = [&](const std::string& name, Tensor<T>* dst) {
        auto it = stored.find(name);
        if (it == stored.end()) throw CheckpointMismatch("model tensor '" + name + "' not in file");
        const Tensor<double>& src = it->second;
        if (src.n != dst->n || src.c != dst->c || src.h != dst->h || src.w != dst->w)
            throw CheckpointMismatch("shape mismatch for '" + name + "': file " + src.shape_str() +
                                     " vs model " + dst->shape_str());
        for (std::size_t j = 0; j < src.size(); ++j) dst->data[j] = T(src.data[j]);
        ++used;
    };
    for (auto& p : net.params()) restore(p.name, p.value);
    for (auto& b : net.buffers()) restore(b.name, b.value);
    if (used != stored.size())
        throw CheckpointMismatch("file has " + std::to_string(stored.size()) +
                                 " tensors, model consumed " + std::to_string(used));
}

}  // namespace thermofuse::nn

#endif
