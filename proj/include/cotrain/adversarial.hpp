#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cotrain/tensor.hpp"
#include "cotrain/view_model.hpp"

namespace cotrain {

/// Closed interval every feature must stay within.
struct FeatureRange {
    double min = 0.0;
    double max = 1.0;
};

/// Adversarial counterpart g(x) of a batch, produced against one view.
struct AdvBatch {
    Tensor x_adv;
    std::size_t source_view = 0;
    double epsilon = 0.0;
};

/// One-step FGSM: x_adv = clip(x + eps * sign(d/dx CE(target, p(x)))).
///
/// Rows with a label use it as the one-hot target; rows without one (nullopt,
/// or an empty `labels` span) target the model's own argmax prediction. The
/// model is only read.
AdvBatch fgsm(const ViewModel& model, const Tensor& x, std::span<const std::optional<int>> labels,
              double epsilon, FeatureRange range = {}, std::size_t source_view = 0);

/// Fraction of rows whose victim argmax changes when x is replaced by the
/// attacker's label-free FGSM batch.
double transfer_rate(const ViewModel& attacker, const ViewModel& victim, const Tensor& x,
                     double epsilon, FeatureRange range = {});

}  // namespace cotrain
