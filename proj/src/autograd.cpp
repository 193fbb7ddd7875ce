#include "cotrain/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "cotrain/error.hpp"
#include "cotrain/kernels.hpp"

namespace cotrain {

const Tensor& Var::value() const {
    if (!graph) throw StateError("value() on an unbound Var");
    return graph->value(*this);
}

void Graph::check_owned(Var v) const {
    if (v.graph != this || v.id >= nodes_.size()) {
        throw StateError("Var does not belong to this graph");
    }
}

Var Graph::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, false});
    return Var{this, nodes_.size() - 1};
}

Var Graph::input(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, true});
    return Var{this, nodes_.size() - 1};
}

Var Graph::parameter(Tensor& tensor) {
    for (auto id : bound_) {
        if (nodes_[id].bound == &tensor) return Var{this, id};
    }
    const bool trainable = mode_ == ParamMode::trainable;
    // The value is copied so later in-place updates of the tensor cannot
    // corrupt a recorded graph.
    nodes_.push_back(Node{Tensor(tensor.shape(), tensor.values()), {}, {}, {},
                          &tensor, trainable});
    bound_.push_back(nodes_.size() - 1);
    return Var{this, nodes_.size() - 1};
}

const Tensor& Graph::value(Var v) const {
    check_owned(v);
    return nodes_[v.id].value;
}

std::vector<double> Graph::grad(Var v) const {
    check_owned(v);
    if (!differentiated_) throw StateError("grad() requested before backward()");
    const auto& node = nodes_[v.id];
    if (node.grad.empty()) return std::vector<double>(node.value.size(), 0.0);
    return node.grad;
}

std::span<double> Graph::grad_buffer(std::size_t id) {
    auto& node = nodes_[id];
    if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
    return node.grad;
}

Var Graph::record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
    bool needs = false;
    for (auto p : parents) needs = needs || nodes_[p].requires_grad;
    nodes_.push_back(Node{std::move(value), std::move(parents),
                          needs ? std::move(backward) : BackwardFn{}, {}, nullptr, needs});
    return Var{this, nodes_.size() - 1};
}

void Graph::backward(Var loss) {
    if (!loss.valid()) throw StateError("backward() without a recorded forward pass");
    check_owned(loss);
    if (differentiated_) throw StateError("backward() called twice on the same graph");
    if (nodes_[loss.id].value.size() != 1) {
        throw ShapeError("backward() needs a scalar loss, got " +
                         nodes_[loss.id].value.shape_string());
    }
    differentiated_ = true;
    if (nodes_[loss.id].requires_grad) {
        grad_buffer(loss.id)[0] = 1.0;
        for (std::size_t id = loss.id + 1; id-- > 0;) {
            auto& node = nodes_[id];
            if (node.backward && !node.grad.empty()) node.backward(*this, id);
        }
    }
    if (mode_ == ParamMode::trainable) {
        for (auto id : bound_) {
            auto& node = nodes_[id];
            node.bound->zero_grad();
            if (!node.grad.empty()) std::copy(node.grad.begin(), node.grad.end(),
                                              node.bound->grad().begin());
        }
    }
}

namespace {

void same_graph(Var a, Var b) {
    if (!a.valid() || a.graph != b.graph) throw StateError("operands belong to different graphs");
}

void same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
    }
}

}  // namespace

void softmax_inplace(std::span<double> row) {
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (auto& v : row) {
        v = std::exp(v - peak);
        total += v;
    }
    for (auto& v : row) v /= total;
}

Var linear(Var x, Var w, Var b) {
    same_graph(x, w);
    same_graph(x, b);
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    const Tensor& wv = g.value(w);
    const Tensor& bv = g.value(b);
    if (wv.rank() != 2 || bv.size() != wv.rows() || xv.cols() != wv.cols()) {
        throw ShapeError("linear: input " + xv.shape_string() + ", weight " + wv.shape_string() +
                         ", bias " + bv.shape_string());
    }
    const kernels::LinearDims dims{xv.rows(), wv.cols(), wv.rows()};
    Tensor out = Tensor::matrix(dims.batch, dims.out);
    kernels::linear_forward(dims, xv.data(), wv.data(), bv.data(), out.data());
    return g.record(std::move(out), {x.id, w.id, b.id}, [dims](Graph& gr, std::size_t self) {
        const auto dy = gr.node_grad(self);
        const auto xi = gr.parent(self, 0);
        const auto wi = gr.parent(self, 1);
        const auto bi = gr.parent(self, 2);
        if (gr.requires_grad(xi)) {
            kernels::linear_backward_input(dims, dy, gr.node_value(wi).data(), gr.grad_buffer(xi));
        }
        if (gr.requires_grad(wi) || gr.requires_grad(bi)) {
            // Parameters are always bound in pairs; buffers exist for both.
            kernels::linear_backward_params(dims, dy, gr.node_value(xi).data(), gr.grad_buffer(wi),
                                            gr.grad_buffer(bi));
        }
    });
}

Var relu(Var x) {
    Graph& g = *x.graph;
    Tensor out = g.value(x);
    for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
    return g.record(std::move(out), {x.id}, [](Graph& gr, std::size_t self) {
        const auto dy = gr.node_grad(self);
        const auto xi = gr.parent(self, 0);
        const auto xv = gr.node_value(xi).data();
        auto dx = gr.grad_buffer(xi);
        for (std::size_t i = 0; i < dx.size(); ++i) {
            if (xv[i] > 0.0) dx[i] += dy[i];
        }
    });
}

Var softmax_rows(Var x) {
    Graph& g = *x.graph;
    Tensor out = g.value(x);
    for (std::size_t r = 0; r < out.rows(); ++r) softmax_inplace(out.row(r));
    return g.record(std::move(out), {x.id}, [](Graph& gr, std::size_t self) {
        const auto dy = gr.node_grad(self);
        const Tensor& y = gr.node_value(self);
        const auto xi = gr.parent(self, 0);
        auto dx = gr.grad_buffer(xi);
        const auto cols = y.cols();
        for (std::size_t r = 0; r < y.rows(); ++r) {
            const auto yr = y.row(r);
            double dot = 0.0;
            for (std::size_t c = 0; c < cols; ++c) dot += dy[r * cols + c] * yr[c];
            for (std::size_t c = 0; c < cols; ++c) dx[r * cols + c] += yr[c] * (dy[r * cols + c] - dot);
        }
    });
}

Var add(Var a, Var b) {
    same_graph(a, b);
    Graph& g = *a.graph;
    same_shape(g.value(a), g.value(b), "add");
    Tensor out = g.value(a);
    const auto bv = g.value(b).data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return g.record(std::move(out), {a.id, b.id}, [](Graph& gr, std::size_t self) {
        const auto dy = gr.node_grad(self);
        for (std::size_t k = 0; k < 2; ++k) {
            const auto p = gr.parent(self, k);
            if (!gr.requires_grad(p)) continue;
            auto dp = gr.grad_buffer(p);
            for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += dy[i];
        }
    });
}

Var sub(Var a, Var b) {
    same_graph(a, b);
    Graph& g = *a.graph;
    same_shape(g.value(a), g.value(b), "sub");
    Tensor out = g.value(a);
    const auto bv = g.value(b).data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return g.record(std::move(out), {a.id, b.id}, [](Graph& gr, std::size_t self) {
        const auto dy = gr.node_grad(self);
        const auto pa = gr.parent(self, 0);
        const auto pb = gr.parent(self, 1);
        if (gr.requires_grad(pa)) {
            auto da = gr.grad_buffer(pa);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i];
        }
        if (gr.requires_grad(pb)) {
            auto db = gr.grad_buffer(pb);
            for (std::size_t i = 0; i < db.size(); ++i) db[i] -= dy[i];
        }
    });
}

Var mul(Var a, Var b) {
    same_graph(a, b);
    Graph& g = *a.graph;
    same_shape(g.value(a), g.value(b), "mul");
    Tensor out = g.value(a);
    const auto bv = g.value(b).data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return g.record(std::move(out), {a.id, b.id}, [](Graph& gr, std::size_t self) {
        const auto dy = gr.node_grad(self);
        const auto pa = gr.parent(self, 0);
        const auto pb = gr.parent(self, 1);
        if (gr.requires_grad(pa)) {
            const auto bv = gr.node_value(pb).data();
            auto da = gr.grad_buffer(pa);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * bv[i];
        }
        if (gr.requires_grad(pb)) {
            const auto av = gr.node_value(pa).data();
            auto db = gr.grad_buffer(pb);
            for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[i] * av[i];
        }
    });
}

Var scale(Var a, double factor) {
    Graph& g = *a.graph;
    Tensor out = g.value(a);
    for (auto& v : out.values()) v *= factor;
    return g.record(std::move(out), {a.id}, [factor](Graph& gr, std::size_t self) {
        const auto dy = gr.node_grad(self);
        auto da = gr.grad_buffer(gr.parent(self, 0));
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * factor;
    });
}

Var log_clamped(Var a, double lo, double hi) {
    Graph& g = *a.graph;
    Tensor out = g.value(a);
    for (auto& v : out.values()) v = std::log(std::clamp(v, lo, hi));
    return g.record(std::move(out), {a.id}, [lo, hi](Graph& gr, std::size_t self) {
        const auto dy = gr.node_grad(self);
        const auto pa = gr.parent(self, 0);
        const auto av = gr.node_value(pa).data();
        auto da = gr.grad_buffer(pa);
        for (std::size_t i = 0; i < da.size(); ++i) {
            if (av[i] > lo && av[i] < hi) da[i] += dy[i] / av[i];
        }
    });
}

Var sum(Var a) {
    Graph& g = *a.graph;
    double total = 0.0;
    for (double v : g.value(a).data()) total += v;
    return g.record(Tensor({1}, std::vector<double>{total}), {a.id},
                    [](Graph& gr, std::size_t self) {
                        const double dy = gr.node_grad(self)[0];
                        auto da = gr.grad_buffer(gr.parent(self, 0));
                        for (auto& v : da) v += dy;
                    });
}

}  // namespace cotrain
