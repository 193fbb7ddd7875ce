#pragma once

#include <vector>

#include "cotrain/view_model.hpp"

namespace cotrain {

/// Classic-momentum SGD state for one view. Weight decay applies to weights
/// and biases alike.
class OptimizerState {
public:
    OptimizerState(const ViewModel& model, double momentum, double weight_decay);

    double momentum() const noexcept { return momentum_; }
    double weight_decay() const noexcept { return weight_decay_; }
    std::vector<std::vector<double>>& velocities() noexcept { return velocities_; }
    const std::vector<std::vector<double>>& velocities() const noexcept { return velocities_; }

private:
    std::vector<std::vector<double>> velocities_;
    double momentum_;
    double weight_decay_;
};

/// v <- momentum*v + (grad + wd*theta); theta <- theta - lr*v. Consumes the
/// gradients (cleared afterwards); throws StateError if any is missing.
void sgd_step(ViewModel& model, OptimizerState& state, double lr);

}  // namespace cotrain
