#ifndef THERMOFUSE_NN_GRAPH_HPP
#define THERMOFUSE_NN_GRAPH_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "thermofuse/nn/layers.hpp"

namespace thermofuse::nn {

struct UnknownLayer : std::runtime_error {
    explicit UnknownLayer(const std::string& name)
        : std::runtime_error("UnknownLayer: " + name) {}
};

// DAG of layers in topological order (every node may only consume earlier
// nodes or the network input). Node outputs and output-gradients are retained
// across forward/backward so callers can inspect any intermediate — that is
// what Grad-CAM hooks into.
template <typename T>
class Network {
public:
    static constexpr int kInput = -1;

    int add(const std::string& name, std::unique_ptr<Layer<T>> layer, std::vector<int> inputs) {
        const int id = int(nodes_.size());
        for (int in : inputs)
            if (in < kInput || in >= id)
                throw std::invalid_argument("node '" + name + "': input id " + std::to_string(in) +
                                            " out of range");
        if (!by_name_.emplace(name, id).second)
            throw std::invalid_argument("duplicate node name '" + name + "'");
        nodes_.push_back(Node{name, std::move(layer), std::move(inputs)});
        return id;
    }

    // chain helper: input defaults to the previous node
    int add(const std::string& name, std::unique_ptr<Layer<T>> layer) {
        return add(name, std::move(layer), {int(nodes_.size()) - 1});
    }

    std::size_t node_count() const { return nodes_.size(); }

    int node_by_name(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw UnknownLayer(name);
        return it->second;
    }

    bool has_node(const std::string& name) const { return by_name_.count(name) != 0; }

    const std::string& node_name(int id) const { return nodes_.at(std::size_t(id)).name; }
    const char* node_kind(int id) const { return nodes_.at(std::size_t(id)).layer->kind(); }

    Layer<T>& layer(int id) { return *nodes_.at(std::size_t(id)).layer; }
    Layer<T>& layer(const std::string& name) { return layer(node_by_name(name)); }

    Tensor<T> forward(const Tensor<T>& x, bool training = false) {
        if (nodes_.empty()) throw std::logic_error("empty network");
        input_ = x;
        outs_.assign(nodes_.size(), Tensor<T>());
        grads_.assign(nodes_.size(), Tensor<T>());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto ins = gather(int(i));
            outs_[i] = nodes_[i].layer->forward(ins, training);
        }
        return outs_.back();
    }

    // grad_out is d(loss)/d(final output); returns d(loss)/d(input).
    // Parameter grads accumulate (call zero_grad between steps).
    Tensor<T> backward(const Tensor<T>& grad_out) {
        if (outs_.empty() || outs_.back().empty())
            throw std::logic_error("backward before forward");
        if (!grad_out.same_shape(outs_.back()))
            throw ShapeError("backward: grad shape " + grad_out.shape_str() + " != output shape " +
                             outs_.back().shape_str());
        for (auto& g : grads_) g = Tensor<T>();
        Tensor<T> dinput(input_.n, input_.c, input_.h, input_.w);
        grads_.back() = grad_out;
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            if (grads_[i].empty()) continue;  // dead branch
            auto ins = gather(int(i));
            auto dins = nodes_[i].layer->backward(ins, outs_[i], grads_[i]);
            if (dins.size() != ins.size())
                throw std::logic_error("node '" + nodes_[i].name + "' returned " +
                                       std::to_string(dins.size()) + " grads for " +
                                       std::to_string(ins.size()) + " inputs");
            for (std::size_t k = 0; k < dins.size(); ++k) {
                const int src = nodes_[i].inputs[k];
                accumulate(src == kInput ? dinput : grads_[std::size_t(src)], std::move(dins[k]));
            }
        }
        return dinput;
    }

    const Tensor<T>& node_output(int id) const { return outs_.at(std::size_t(id)); }
    // gradient of the loss w.r.t. a node's output (valid after backward)
    const Tensor<T>& node_grad(int id) const { return grads_.at(std::size_t(id)); }

    std::vector<ParamRef<T>> params() {
        std::vector<ParamRef<T>> ps;
        for (auto& nd : nodes_) nd.layer->collect(nd.name, &ps, nullptr);
        return ps;
    }

    std::vector<BufferRef<T>> buffers() {
        std::vector<BufferRef<T>> bs;
        for (auto& nd : nodes_) nd.layer->collect(nd.name, nullptr, &bs);
        return bs;
    }

    void zero_grad() {
        for (auto& p : params()) p.grad->fill(T(0));
    }

    // Each node draws from its own derived stream, so two graphs that share
    // topology get identical weights at every matching node even when one
    // node's parameter shape differs (the 4-channel stem case).
    void init_params(std::uint64_t master_seed) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            Rng rng(derive_seed(master_seed, std::uint64_t(i)));
            nodes_[i].layer->init_params(rng);
        }
    }

    std::uint64_t node_init_seed(std::uint64_t master_seed, int id) const {
        return derive_seed(master_seed, std::uint64_t(id));
    }

    std::size_t param_count() {
        std::size_t total = 0;
        for (auto& p : params()) total += p.value->size();
        return total;
    }

    // drops cached activations/grads (frees memory between uses)
    void clear_state() {
        outs_.clear();
        grads_.clear();
        input_ = Tensor<T>();
    }

private:
    struct Node {
        std::string name;
        std::unique_ptr<Layer<T>> layer;
        std::vector<int> inputs;
    };

    std::vector<const Tensor<T>*> gather(int id) const {
        std::vector<const Tensor<T>*> ins;
        ins.reserve(nodes_[std::size_t(id)].inputs.size());
        for (int src : nodes_[std::size_t(id)].inputs)
            ins.push_back(src == kInput ? &input_ : &outs_[std::size_t(src)]);
        return ins;
    }

    static void accumulate(Tensor<T>& dst, Tensor<T>&& src) {
        if (dst.empty()) {
            dst = std::move(src);
            return;
        }
        if (!dst.same_shape(src)) throw ShapeError("gradient accumulation shape mismatch");
        for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
    }

    std::vector<Node> nodes_;
    std::unordered_map<std::string, int> by_name_;
    Tensor<T> input_;
    std::vector<Tensor<T>> outs_;
    std::vector<Tensor<T>> grads_;
};

}  // namespace thermofuse::nn

#endif
