#include "cotrain/adversarial.hpp"

#include <algorithm>

#include "cotrain/autograd.hpp"
#include "cotrain/error.hpp"
#include "cotrain/losses.hpp"

namespace cotrain {

AdvBatch fgsm(const ViewModel& model, const Tensor& x, std::span<const std::optional<int>> labels,
              double epsilon, FeatureRange range, std::size_t source_view) {
    if (epsilon < 0.0) throw ConfigError("fgsm: epsilon must be nonnegative");
    if (x.empty()) return AdvBatch{Tensor{}, source_view, epsilon};
    if (!labels.empty() && labels.size() != x.rows()) {
        throw ShapeError("fgsm: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(x.rows()) + " rows");
    }
    if (epsilon == 0.0) return AdvBatch{x, source_view, epsilon};

    Graph graph(ParamMode::frozen);
    Var input = graph.input(x);
    Var probs = model.forward(graph, input);

    const auto rows = x.rows();
    std::vector<int> targets(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!labels.empty() && labels[r].has_value()) {
            targets[r] = *labels[r];
        } else {
            targets[r] = argmax(graph.value(probs).row(r));
        }
    }
    graph.backward(graph::cross_entropy_sum(one_hot(targets, model.num_classes()), probs));
    const auto dx = graph.grad(input);

    Tensor adv(x.shape(), x.values());
    auto out = adv.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double s = dx[i] > 0.0 ? 1.0 : (dx[i] < 0.0 ? -1.0 : 0.0);
        out[i] = std::clamp(out[i] + epsilon * s, range.min, range.max);
    }
    return AdvBatch{std::move(adv), source_view, epsilon};
}

double transfer_rate(const ViewModel& attacker, const ViewModel& victim, const Tensor& x,
                     double epsilon, FeatureRange range) {
    if (attacker.input_dim() != victim.input_dim() ||
        attacker.num_classes() != victim.num_classes()) {
        throw ShapeError("transfer_rate: attacker and victim dimensions differ");
    }
    if (x.rows() == 0) return 0.0;
    const auto adv = fgsm(attacker, x, {}, epsilon, range);
    const auto clean = victim.classify(x);
    const auto attacked = victim.classify(adv.x_adv);
    std::size_t flipped = 0;
    for (std::size_t r = 0; r < clean.size(); ++r) flipped += clean[r] != attacked[r] ? 1 : 0;
    return static_cast<double>(flipped) / static_cast<double>(clean.size());
}

}  // namespace cotrain
