#include "cotrain/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "cotrain/error.hpp"
#include "cotrain/schedules.hpp"

namespace cotrain {

void HyperParams::validate() const {
    auto fail = [](const char* field, const std::string& why) {
        throw ConfigError(std::string("hyperparams.") + field + ": " + why);
    };
    if (lambda_cot_max < 0.0) fail("lambda_cot_max", "must be nonnegative");
    if (lambda_dif_max < 0.0) fail("lambda_dif_max", "must be nonnegative");
    if (warmup_epochs < 0) fail("warmup_epochs", "must be nonnegative");
    if (total_epochs < 1) fail("total_epochs", "must be at least 1");
    if (warmup_epochs > total_epochs) fail("warmup_epochs", "must not exceed total_epochs");
    if (lr0 < 0.0) fail("lr0", "must be nonnegative");
    if (momentum < 0.0) fail("momentum", "must be nonnegative");
    if (weight_decay < 0.0) fail("weight_decay", "must be nonnegative");
    if (batch_size == 0) fail("batch_size", "must be positive");
    if (fgsm_epsilon < 0.0) fail("fgsm_epsilon", "must be nonnegative");
    if (n_views < 2 || n_views % 2 != 0) fail("n_views", "must be an even number >= 2");
}

HyperParams hyperparams_preset(std::string_view name) {
    HyperParams hp;
    if (name == "desk") return hp;
    if (name == "svhn-like" || name == "cifar10-like" || name == "cifar100-like") {
        hp.lambda_cot_max = 10.0;
        hp.lambda_dif_max = name == "cifar100-like" ? 1.0 : 0.5;
        hp.warmup_epochs = 80;
        hp.total_epochs = 600;
        hp.lr0 = 0.05;
        hp.batch_size = 100;
        return hp;
    }
    if (name == "imagenet-like") {
        // Co-training phase after supervised pretraining; lambdas start at max.
        hp.lambda_cot_max = 1.0;
        hp.lambda_dif_max = 0.1;
        hp.warmup_epochs = 0;
        hp.total_epochs = 20;
        hp.lr0 = 0.005;
        hp.batch_size = 128;
        return hp;
    }
    throw ConfigError("unknown hyperparameter preset '" + std::string(name) + "'");
}

namespace {

std::vector<std::optional<int>> fgsm_labels(const Batch& b) {
    std::vector<std::optional<int>> labels(b.y_s.begin(), b.y_s.end());
    labels.resize(b.supervised() + b.unsupervised());
    return labels;
}

}  // namespace

LossBreakdown train_iteration(View& a, View& b, const BundleBatch& batch, const StepParams& params) {
    const Batch& ba = batch.first;
    const Batch& bb = batch.second;
    if (ba.supervised() != bb.supervised() || ba.unsupervised() != bb.unsupervised()) {
        throw ShapeError("train_iteration: bundle batches differ in size");
    }
    if (params.lambda_cot < 0.0 || params.lambda_dif < 0.0) {
        throw ConfigError("train_iteration: loss weights must be nonnegative");
    }
    const auto b_s = ba.supervised();
    const auto b_u = ba.unsupervised();
    const auto classes = a.model.num_classes();

    const Tensor xa = Tensor::concat_rows(ba.x_s, ba.x_u);
    const Tensor xb = Tensor::concat_rows(bb.x_s, bb.x_u);
    const auto ga = fgsm(a.model, xa, fgsm_labels(ba), params.epsilon, params.range, 0);
    const auto gb = fgsm(b.model, xb, fgsm_labels(bb), params.epsilon, params.range, 1);

    Graph graph;
    LossBreakdown out;

    Var pa_s, pb_s, pa_u, pb_u;
    Var l_sup;
    if (b_s > 0) {
        pa_s = a.model.forward(graph, graph.constant(ba.x_s));
        pb_s = b.model.forward(graph, graph.constant(bb.x_s));
        Var ce = graph::cross_entropy_sum(one_hot(ba.y_s, classes), pa_s) +
                 graph::cross_entropy_sum(one_hot(bb.y_s, classes), pb_s);
        l_sup = scale(ce, 1.0 / static_cast<double>(b_s));
        out.l_sup = graph.value(l_sup)[0];
    }

    Var l_cot;
    if (b_u > 0) {
        pa_u = a.model.forward(graph, graph.constant(ba.x_u));
        pb_u = b.model.forward(graph, graph.constant(bb.x_u));
        l_cot = graph::cot_loss(pa_u, pb_u);
        out.l_cot = graph.value(l_cot)[0];
    }

    Var l_dif;
    if (b_s + b_u > 0) {
        auto clean = [&](Var s, Var u) {
            return Tensor::concat_rows(s.valid() ? graph.value(s) : Tensor{},
                                       u.valid() ? graph.value(u) : Tensor{});
        };
        const Tensor pa_clean = clean(pa_s, pa_u);
        const Tensor pb_clean = clean(pb_s, pb_u);
        Var pb_on_ga = b.model.forward(graph, graph.constant(ga.x_adv));
        Var pa_on_gb = a.model.forward(graph, graph.constant(gb.x_adv));
        l_dif = graph::dif_loss(pa_clean, pa_on_gb, pb_clean, pb_on_ga);
        out.l_dif = graph.value(l_dif)[0];
    }

    Var total = l_sup;
    auto accumulate = [&](Var term, double weight) {
        if (!term.valid() || weight == 0.0) return;
        Var weighted = scale(term, weight);
        total = total.valid() ? total + weighted : weighted;
    };
    accumulate(l_cot, params.lambda_cot);
    accumulate(l_dif, params.lambda_dif);
    if (!total.valid()) total = graph.constant(Tensor({1}, 0.0));

    // Bind every parameter so views untouched by the loss still get zero grads.
    for (auto* p : a.model.parameters()) graph.parameter(*p);
    for (auto* p : b.model.parameters()) graph.parameter(*p);
    graph.backward(total);

    sgd_step(a.model, a.optimizer, params.lr);
    sgd_step(b.model, b.optimizer, params.lr);

    out.total = total_loss(out.l_sup, out.l_cot, out.l_dif, params.lambda_cot, params.lambda_dif);
    return out;
}

double supervised_step(View& view, const Tensor& x, std::span<const int> y, double lr) {
    Graph graph;
    Var loss;
    if (!y.empty()) {
        Var probs = view.model.forward(graph, graph.constant(x));
        loss = scale(graph::cross_entropy_sum(one_hot(y, view.model.num_classes()), probs),
                     1.0 / static_cast<double>(y.size()));
    } else {
        loss = graph.constant(Tensor({1}, 0.0));
    }
    for (auto* p : view.model.parameters()) graph.parameter(*p);
    graph.backward(loss);
    sgd_step(view.model, view.optimizer, lr);
    return graph.value(loss)[0];
}

std::vector<std::size_t> draw_pairing(std::size_t n_views, ScheduleMode mode, Rng& rng) {
    std::vector<std::size_t> order(n_views);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (mode == ScheduleMode::real) std::shuffle(order.begin(), order.end(), rng);
    return order;
}

std::size_t iterations_per_epoch(std::size_t dataset_size, std::size_t n_views,
                                 std::size_t batch_size) {
    const auto per_iteration = (n_views / 2) * batch_size;
    if (per_iteration == 0) throw ConfigError("iterations_per_epoch: empty iteration");
    return (dataset_size + per_iteration - 1) / per_iteration;
}

EpochResult train_epoch(std::vector<View>& views, std::vector<StreamBundle>& bundles,
                        const HyperParams& hp, int epoch, std::size_t dataset_size, Rng& pairing_rng,
                        const EpochOptions& options, long* iteration_counter) {
    hp.validate();
    if (views.size() != hp.n_views || bundles.size() * 2 != views.size()) {
        throw ConfigError("train_epoch: " + std::to_string(views.size()) + " views and " +
                          std::to_string(bundles.size()) + " bundles for n_views=" +
                          std::to_string(hp.n_views));
    }

    EpochResult result;
    result.lr = cosine_lr(epoch, hp.lr0, hp.total_epochs);
    const double warm = static_cast<double>(hp.warmup_epochs);
    result.lambda_cot = options.mask.cot ? (options.lambda_at_max
                                                ? hp.lambda_cot_max
                                                : warmup_lambda(epoch, hp.lambda_cot_max, warm))
                                         : 0.0;
    result.lambda_dif = options.mask.dif ? (options.lambda_at_max
                                                ? hp.lambda_dif_max
                                                : warmup_lambda(epoch, hp.lambda_dif_max, warm))
                                         : 0.0;
    const StepParams step{result.lambda_cot, result.lambda_dif, result.lr, hp.fgsm_epsilon,
                          options.range};

    const auto pairs = bundles.size();
    const auto iterations = iterations_per_epoch(dataset_size, hp.n_views, hp.batch_size);
    std::vector<LossBreakdown> losses(pairs);
    std::vector<std::exception_ptr> errors(pairs);
    long local_counter = 0;
    long& counter = iteration_counter ? *iteration_counter : local_counter;

    for (std::size_t it = 0; it < iterations; ++it) {
        const auto l = draw_pairing(hp.n_views, options.schedule, pairing_rng);
        if (options.record_pairings) result.pairings.push_back(l);
        std::vector<BundleBatch> batches;
        batches.reserve(pairs);
        for (auto& bundle : bundles) batches.push_back(bundle.next());

        const auto n_pairs = static_cast<long>(pairs);
#pragma omp parallel for schedule(static) if (options.parallel_pairs && pairs > 1)
        for (long i = 0; i < n_pairs; ++i) {
            const auto k = static_cast<std::size_t>(i);
            // The lower view index takes stream s, the other s-bar.
            const auto lo = std::min(l[2 * k], l[2 * k + 1]);
            const auto hi = std::max(l[2 * k], l[2 * k + 1]);
            try {
                losses[k] = train_iteration(views[lo], views[hi], batches[k], step);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        for (const auto& lb : losses) {
            if (!std::isfinite(lb.total) || !std::isfinite(lb.l_sup) || !std::isfinite(lb.l_cot) ||
                !std::isfinite(lb.l_dif)) {
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                                          ", iteration " + std::to_string(counter),
                                      epoch, counter);
            }
            result.l_sup += lb.l_sup;
            result.l_cot += lb.l_cot;
            result.l_dif += lb.l_dif;
        }
        ++counter;
    }
    const double denom = static_cast<double>(iterations * pairs);
    result.l_sup /= denom;
    result.l_cot /= denom;
    result.l_dif /= denom;
    result.iterations = iterations;
    return result;
}

void pretrain(std::vector<View>& views, const std::shared_ptr<const Dataset>& labeled, int epochs,
              const HyperParams& hp, std::uint64_t seed) {
    if (epochs <= 0) return;
    if (!labeled || labeled->size() == 0) throw ConfigError("pretrain: labeled set is empty");
    const auto batch = std::min(hp.batch_size, labeled->size());
    const auto iterations = (labeled->size() + batch - 1) / batch;
    for (std::size_t v = 0; v < views.size(); ++v) {
        DataStream stream(labeled, nullptr, batch, derive_seed(seed, 500 + v));
        for (int epoch = 1; epoch <= epochs; ++epoch) {
            const double lr = cosine_lr(epoch, hp.lr0, epochs);
            for (std::size_t it = 0; it < iterations; ++it) {
                const auto b = stream.next();
                const double loss = supervised_step(views[v], b.x_s, b.y_s, lr);
                if (!std::isfinite(loss)) {
                    throw DivergenceError("non-finite loss during pretraining of view " +
                                              std::to_string(v),
                                          epoch, static_cast<long>(it));
                }
            }
        }
    }
}

EvalResult evaluate(const std::vector<const ViewModel*>& views, const Dataset& test) {
    if (views.empty()) throw ConfigError("evaluate: no views");
    if (!test.fully_labeled() && test.hidden_labels.size() != test.size()) {
        throw ConfigError("evaluate: test set must be labeled");
    }
    const auto truth = test.eval_labels();
    EvalResult out;
    for (const auto* view : views) {
        const auto predicted = view->classify(test.features);
        std::size_t wrong = 0;
        for (std::size_t r = 0; r < truth.size(); ++r) wrong += predicted[r] != truth[r] ? 1 : 0;
        out.per_view.push_back(static_cast<double>(wrong) / static_cast<double>(truth.size()));
    }
    out.mean = std::accumulate(out.per_view.begin(), out.per_view.end(), 0.0) /
               static_cast<double>(out.per_view.size());
    return out;
}

EvalResult evaluate(const std::vector<View>& views, const Dataset& test) {
    std::vector<const ViewModel*> models;
    for (const auto& v : views) models.push_back(&v.model);
    return evaluate(models, test);
}

}  // namespace cotrain
