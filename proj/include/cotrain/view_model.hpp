#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cotrain/autograd.hpp"
#include "cotrain/tensor.hpp"

namespace cotrain {

enum class Activation { relu, identity };

struct DenseLayer {
    Tensor weight;  // [out x in]
    Tensor bias;    // [out]
    Activation activation = Activation::identity;

    std::size_t in() const { return weight.cols(); }
    std::size_t out() const { return weight.rows(); }
};

/// One view p(x) = softmax(f(v(x))): an MLP representation v followed by a
/// final linear classifier f. Hidden layers use ReLU.
class ViewModel {
public:
    /// Glorot-uniform weights, zero biases. `layer_dims` = {input, hidden..., classes}.
    static ViewModel init(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);
    /// Assembles a model from explicit layers (checked for chaining).
    static ViewModel from_layers(std::vector<DenseLayer> layers, std::uint64_t seed = 0);

    /// Class probabilities recorded on `graph`; parameters are bound into it.
    Var forward(Graph& graph, Var x);
    /// Same, with parameters recorded as constants (input gradients only).
    Var forward(Graph& graph, Var x) const;
    /// Graph-free forward pass; bit-identical to forward().
    Tensor predict(const Tensor& x) const;
    /// Argmax of predict() per row, lowest index on ties.
    std::vector<int> classify(const Tensor& x) const;

    std::vector<std::size_t> layer_dims() const;
    std::size_t input_dim() const { return layers_.front().in(); }
    std::size_t num_classes() const { return layers_.back().out(); }
    std::uint64_t seed() const noexcept { return seed_; }

    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    /// Parameter tensors in a fixed order: w0, b0, w1, b1, ...
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    std::size_t parameter_count() const;

    friend bool operator==(const ViewModel& a, const ViewModel& b);

private:
    std::vector<DenseLayer> layers_;
    std::uint64_t seed_ = 0;
};

/// Index of the largest entry; ties resolve to the lowest index.
int argmax(std::span<const double> row);

}  // namespace cotrain
