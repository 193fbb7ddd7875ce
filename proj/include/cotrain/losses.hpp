#pragma once

// Co-training loss terms, in nats. Every log is taken of a probability
// clamped to [kProbFloor, 1].
//
// Two forms are provided: plain evaluators over probability vectors/batches,
// and graph builders used for training. Both follow the same arithmetic.

#include <span>

#include "cotrain/autograd.hpp"
#include "cotrain/tensor.hpp"

namespace cotrain {

inline constexpr double kProbFloor = 1e-7;

struct LossBreakdown {
    double l_sup = 0.0;
    double l_cot = 0.0;
    double l_dif = 0.0;
    double total = 0.0;
};

/// -sum_c target_c * ln(clamp(pred_c)).
double cross_entropy(std::span<const double> target, std::span<const double> pred);
/// -sum_c p_c * ln(clamp(p_c)); 0 ln 0 evaluates to 0.
double entropy(std::span<const double> p);
/// Batch mean of the Jensen-Shannon divergence H((p1+p2)/2) - (H(p1)+H(p2))/2.
double cot_loss(const Tensor& p1, const Tensor& p2);
/// [sum_x CE(p1(x), p2(g1(x))) + CE(p2(x), p1(g2(x)))] / rows.
double dif_loss(const Tensor& p1_x, const Tensor& p1_on_g2, const Tensor& p2_x,
                const Tensor& p2_on_g1);
/// l_sup + lambda_cot*l_cot + lambda_dif*l_dif; negative weights are a ConfigError.
double total_loss(double l_sup, double l_cot, double l_dif, double lambda_cot, double lambda_dif);

/// One-hot rows for class indices.
Tensor one_hot(std::span<const int> labels, std::size_t num_classes);

namespace graph {

/// Sum over rows of CE(target_row, pred_row). `target` is a constant.
Var cross_entropy_sum(const Tensor& target, Var pred);
/// Sum over rows of H(p_row).
Var entropy_sum(Var p);
/// Differentiable counterpart of cotrain::cot_loss; gradients reach p1 and p2.
Var cot_loss(Var p1, Var p2);
/// Differentiable counterpart of cotrain::dif_loss. The clean predictions are
/// constants; only the predictions on adversarial inputs receive gradients.
Var dif_loss(const Tensor& p1_x, Var p1_on_g2, const Tensor& p2_x, Var p2_on_g1);

}  // namespace graph

}  // namespace cotrain
