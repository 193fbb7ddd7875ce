#include "cotrain/view_model.hpp"

#include <cmath>
#include <random>

#include "cotrain/error.hpp"
#include "cotrain/kernels.hpp"
#include "cotrain/rng.hpp"

namespace cotrain {

ViewModel ViewModel::init(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2) {
        throw ConfigError("layer_dims needs at least an input and an output dimension");
    }
    for (auto d : layer_dims) {
        if (d == 0) throw ConfigError("layer_dims entries must be positive");
    }
    Rng rng(seed);
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
        const auto in = layer_dims[k];
        const auto out = layer_dims[k + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        DenseLayer layer{Tensor::matrix(out, in), Tensor({out}, 0.0),
                         k + 2 == layer_dims.size() ? Activation::identity : Activation::relu};
        for (auto& w : layer.weight.values()) w = dist(rng);
        layers.push_back(std::move(layer));
    }
    ViewModel model;
    model.layers_ = std::move(layers);
    model.seed_ = seed;
    return model;
}

ViewModel ViewModel::from_layers(std::vector<DenseLayer> layers, std::uint64_t seed) {
    if (layers.empty()) throw ConfigError("a view needs at least one layer");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        if (l.weight.rank() != 2 || l.bias.size() != l.out()) {
            throw ShapeError("layer " + std::to_string(k) + ": weight " + l.weight.shape_string() +
                             " and bias " + l.bias.shape_string() + " do not match");
        }
        if (k > 0 && layers[k - 1].out() != l.in()) {
            throw ShapeError("layer " + std::to_string(k) + " input does not chain to previous output");
        }
    }
    ViewModel model;
    model.layers_ = std::move(layers);
    model.seed_ = seed;
    return model;
}

Var ViewModel::forward(Graph& graph, Var x) {
    if (graph.value(x).cols() != input_dim()) {
        throw ShapeError("forward: input has " + std::to_string(graph.value(x).cols()) +
                         " columns, model expects " + std::to_string(input_dim()));
    }
    Var h = x;
    for (auto& layer : layers_) {
        h = linear(h, graph.parameter(layer.weight), graph.parameter(layer.bias));
        if (layer.activation == Activation::relu) h = relu(h);
    }
    return softmax_rows(h);
}

Var ViewModel::forward(Graph& graph, Var x) const {
    if (graph.value(x).cols() != input_dim()) {
        throw ShapeError("forward: input has " + std::to_string(graph.value(x).cols()) +
                         " columns, model expects " + std::to_string(input_dim()));
    }
    Var h = x;
    for (const auto& layer : layers_) {
        h = linear(h, graph.constant(layer.weight), graph.constant(layer.bias));
        if (layer.activation == Activation::relu) h = relu(h);
    }
    return softmax_rows(h);
}

Tensor ViewModel::predict(const Tensor& x) const {
    if (x.cols() != input_dim()) {
        throw ShapeError("predict: input has " + std::to_string(x.cols()) +
                         " columns, model expects " + std::to_string(input_dim()));
    }
    Tensor h = x;
    for (const auto& layer : layers_) {
        const kernels::LinearDims dims{h.rows(), layer.in(), layer.out()};
        Tensor out = Tensor::matrix(dims.batch, dims.out);
        kernels::linear_forward(dims, h.data(), layer.weight.data(), layer.bias.data(), out.data());
        if (layer.activation == Activation::relu) {
            for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
        }
        h = std::move(out);
    }
    for (std::size_t r = 0; r < h.rows(); ++r) softmax_inplace(h.row(r));
    return h;
}

std::vector<int> ViewModel::classify(const Tensor& x) const {
    const Tensor probs = predict(x);
    std::vector<int> labels(probs.rows());
    for (std::size_t r = 0; r < probs.rows(); ++r) labels[r] = argmax(probs.row(r));
    return labels;
}

std::vector<std::size_t> ViewModel::layer_dims() const {
    std::vector<std::size_t> dims{input_dim()};
    for (const auto& l : layers_) dims.push_back(l.out());
    return dims;
}

std::vector<Tensor*> ViewModel::parameters() {
    std::vector<Tensor*> params;
    for (auto& l : layers_) {
        params.push_back(&l.weight);
        params.push_back(&l.bias);
    }
    return params;
}

std::vector<const Tensor*> ViewModel::parameters() const {
    std::vector<const Tensor*> params;
    for (const auto& l : layers_) {
        params.push_back(&l.weight);
        params.push_back(&l.bias);
    }
    return params;
}

std::size_t ViewModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->size();
    return n;
}

bool operator==(const ViewModel& a, const ViewModel& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t k = 0; k < a.layers_.size(); ++k) {
        const auto& la = a.layers_[k];
        const auto& lb = b.layers_[k];
        if (la.activation != lb.activation || !(la.weight == lb.weight) || !(la.bias == lb.bias)) {
            return false;
        }
    }
    return true;
}

int argmax(std::span<const double> row) {
    int best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

}  // namespace cotrain
