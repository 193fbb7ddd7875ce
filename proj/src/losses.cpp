#include "cotrain/losses.hpp"

#include <algorithm>
#include <cmath>

#include "cotrain/error.hpp"

namespace cotrain {

namespace {

double clamped_log(double p) { return std::log(std::clamp(p, kProbFloor, 1.0)); }

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
    }
}

}  // namespace

double cross_entropy(std::span<const double> target, std::span<const double> pred) {
    if (target.size() != pred.size()) {
        throw ShapeError("cross_entropy: length mismatch " + std::to_string(target.size()) +
                         " vs " + std::to_string(pred.size()));
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < target.size(); ++c) acc += target[c] * clamped_log(pred[c]);
    return -acc;
}

double entropy(std::span<const double> p) {
    double acc = 0.0;
    for (double v : p) acc += v * clamped_log(v);
    return -acc;
}

double cot_loss(const Tensor& p1, const Tensor& p2) {
    check_same_shape(p1, p2, "cot_loss");
    const auto rows = p1.rows();
    if (rows == 0) return 0.0;
    // Mirrors graph::cot_loss term for term: batch sums first, then combine.
    double h_mix = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
    std::vector<double> mix(p1.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto a = p1.row(r);
        const auto b = p2.row(r);
        for (std::size_t c = 0; c < mix.size(); ++c) mix[c] = 0.5 * (a[c] + b[c]);
        h_mix += entropy(mix);
        h1 += entropy(a);
        h2 += entropy(b);
    }
    return (h_mix - 0.5 * (h1 + h2)) / static_cast<double>(rows);
}

double dif_loss(const Tensor& p1_x, const Tensor& p1_on_g2, const Tensor& p2_x,
                const Tensor& p2_on_g1) {
    check_same_shape(p1_x, p2_on_g1, "dif_loss");
    check_same_shape(p2_x, p1_on_g2, "dif_loss");
    check_same_shape(p1_x, p2_x, "dif_loss");
    const auto rows = p1_x.rows();
    if (rows == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        acc += cross_entropy(p1_x.row(r), p2_on_g1.row(r));
        acc += cross_entropy(p2_x.row(r), p1_on_g2.row(r));
    }
    return acc / static_cast<double>(rows);
}

double total_loss(double l_sup, double l_cot, double l_dif, double lambda_cot, double lambda_dif) {
    if (lambda_cot < 0.0 || lambda_dif < 0.0) {
        throw ConfigError("loss weights must be nonnegative");
    }
    return l_sup + lambda_cot * l_cot + lambda_dif * l_dif;
}

Tensor one_hot(std::span<const int> labels, std::size_t num_classes) {
    if (labels.empty()) return {};
    Tensor t = Tensor::matrix(labels.size(), num_classes);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= num_classes) {
            throw ShapeError("one_hot: label " + std::to_string(labels[r]) + " out of range");
        }
        t.at(r, static_cast<std::size_t>(labels[r])) = 1.0;
    }
    return t;
}

namespace graph {

Var cross_entropy_sum(const Tensor& target, Var pred) {
    Graph& g = *pred.graph;
    check_same_shape(target, g.value(pred), "cross_entropy");
    Var t = g.constant(target);
    return scale(sum(t * log_clamped(pred, kProbFloor, 1.0)), -1.0);
}

Var entropy_sum(Var p) {
    return scale(sum(p * log_clamped(p, kProbFloor, 1.0)), -1.0);
}

Var cot_loss(Var p1, Var p2) {
    Graph& g = *p1.graph;
    check_same_shape(g.value(p1), g.value(p2), "cot_loss");
    const auto rows = static_cast<double>(g.value(p1).rows());
    Var mix = scale(p1 + p2, 0.5);
    Var js = entropy_sum(mix) - scale(entropy_sum(p1) + entropy_sum(p2), 0.5);
    return scale(js, 1.0 / rows);
}

Var dif_loss(const Tensor& p1_x, Var p1_on_g2, const Tensor& p2_x, Var p2_on_g1) {
    check_same_shape(p1_x, p2_x, "dif_loss");
    const auto rows = static_cast<double>(p1_x.rows());
    Var both = cross_entropy_sum(p1_x, p2_on_g1) + cross_entropy_sum(p2_x, p1_on_g2);
    return scale(both, 1.0 / rows);
}

}  // namespace graph

}  // namespace cotrain
