#include "cotrain/optimizer.hpp"

#include "cotrain/error.hpp"

namespace cotrain {

OptimizerState::OptimizerState(const ViewModel& model, double momentum, double weight_decay)
    : momentum_(momentum), weight_decay_(weight_decay) {
    if (momentum < 0.0 || weight_decay < 0.0) {
        throw ConfigError("momentum and weight_decay must be nonnegative");
    }
    for (const auto* p : model.parameters()) velocities_.emplace_back(p->size(), 0.0);
}

void sgd_step(ViewModel& model, OptimizerState& state, double lr) {
    auto params = model.parameters();
    auto& velocities = state.velocities();
    if (params.size() != velocities.size()) {
        throw ShapeError("optimizer state does not match the model's parameter list");
    }
    for (const auto* p : params) {
        if (!p->has_grad()) throw StateError("sgd_step: parameter gradients are missing");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto theta = params[k]->data();
        const auto grad = params[k]->grad();
        auto& v = velocities[k];
        if (v.size() != theta.size()) throw ShapeError("velocity shape mismatch");
        for (std::size_t i = 0; i < theta.size(); ++i) {
            v[i] = state.momentum() * v[i] + (grad[i] + state.weight_decay() * theta[i]);
            theta[i] -= lr * v[i];
        }
        params[k]->clear_grad();
    }
}

}  // namespace cotrain
