#pragma once

// Tape-based reverse-mode differentiation over dense tensors.
//
// A Graph records every operation in creation order, which is already a
// topological order, so backward is a single reverse sweep. A graph can be
// differentiated exactly once; a second backward() throws StateError. Build a
// fresh Graph per loss evaluation.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cotrain/tensor.hpp"

namespace cotrain {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while the graph lives.
struct Var {
    Graph* graph = nullptr;
    std::size_t id = 0;

    bool valid() const noexcept { return graph != nullptr; }
    const Tensor& value() const;
};

/// Whether parameters bound into the graph receive gradients. Frozen graphs
/// treat parameters as constants (used when only input gradients are wanted).
enum class ParamMode { trainable, frozen };

class Graph {
public:
    explicit Graph(ParamMode mode = ParamMode::trainable) : mode_(mode) {}
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Leaf with no gradient.
    Var constant(Tensor value);
    /// Leaf whose gradient is retained and readable through grad().
    Var input(Tensor value);
    /// Leaf bound to an external parameter tensor. Binding the same tensor twice
    /// returns the same node. On backward the tensor's grad buffer is reset and
    /// filled (trainable mode only).
    Var parameter(Tensor& tensor);

    const Tensor& value(Var v) const;
    /// Gradient of the differentiated loss w.r.t. `v`; zeros if `v` did not
    /// contribute. Requires a completed backward().
    std::vector<double> grad(Var v) const;

    void backward(Var loss);
    bool differentiated() const noexcept { return differentiated_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    // Op plumbing. The backward callback receives the graph and the node id;
    // it reads the node's grad and accumulates into its parents.
    using BackwardFn = std::function<void(Graph&, std::size_t)>;
    Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::span<double> grad_buffer(std::size_t id);
    std::span<const double> node_grad(std::size_t id) const { return nodes_[id].grad; }
    const Tensor& node_value(std::size_t id) const { return nodes_[id].value; }
    std::size_t parent(std::size_t id, std::size_t k) const { return nodes_[id].parents[k]; }

private:
    struct Node {
        Tensor value;
        std::vector<std::size_t> parents;
        BackwardFn backward;
        std::vector<double> grad;
        Tensor* bound = nullptr;
        bool requires_grad = false;
    };

    void check_owned(Var v) const;

    ParamMode mode_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> bound_;
    bool differentiated_ = false;
};

// Differentiable operations. Operands must belong to the same graph.

/// x [B x in], w [out x in], b [out] -> x w^T + b  [B x out]
Var linear(Var x, Var w, Var b);
Var relu(Var x);
/// Row-wise softmax with max subtraction.
Var softmax_rows(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// ln(clamp(a, lo, hi)); gradient is zero where the clamp binds.
Var log_clamped(Var a, double lo, double hi);
/// Sum of all entries -> shape [1].
Var sum(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

/// Softmax of one row in place (shared by graph and graph-free forward paths).
void softmax_inplace(std::span<double> row);

}  // namespace cotrain
