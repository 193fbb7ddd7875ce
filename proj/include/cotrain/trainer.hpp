#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "cotrain/adversarial.hpp"
#include "cotrain/data.hpp"
#include "cotrain/losses.hpp"
#include "cotrain/optimizer.hpp"
#include "cotrain/rng.hpp"
#include "cotrain/streams.hpp"
#include "cotrain/view_model.hpp"

namespace cotrain {

/// Co-training hyperparameters. The same object serves every even view count.
struct HyperParams {
    double lambda_cot_max = 10.0;
    double lambda_dif_max = 0.5;
    int warmup_epochs = 40;
    int total_epochs = 300;
    double lr0 = 0.05;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::size_t batch_size = 100;
    double fgsm_epsilon = 0.02;
    std::size_t n_views = 2;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Named constant sets: "desk" (defaults above), "svhn-like", "cifar10-like",
/// "cifar100-like", "imagenet-like".
HyperParams hyperparams_preset(std::string_view name);

/// A view together with its optimizer state.
struct View {
    ViewModel model;
    OptimizerState optimizer;

    View(ViewModel m, double momentum, double weight_decay)
        : model(std::move(m)), optimizer(model, momentum, weight_decay) {}
};

struct StepParams {
    double lambda_cot = 0.0;
    double lambda_dif = 0.0;
    double lr = 0.0;
    double epsilon = 0.0;
    FeatureRange range{};
};

/// One dual-view iteration on a bundle batch:
///  1. FGSM batches g_a over x_s(a) + x_u and g_b over x_s(b) + x_u;
///  2. L_sup = [sum CE over b_a + sum CE over b_b] / b_s;
///  3. L_cot = mean JSD on x_u;
///  4. L_dif = [sum CE(p_a(x), p_b(g_a(x))) + sum CE(p_b(x), p_a(g_b(x)))] / (b_s + b_u);
///  5. one backward through L = L_sup + lambda_cot L_cot + lambda_dif L_dif;
///  6. one sgd_step per view.
/// Terms whose weight is exactly zero are still evaluated and reported but are
/// left out of the differentiated sum.
LossBreakdown train_iteration(View& a, View& b, const BundleBatch& batch, const StepParams& params);

/// Supervised-only SGD step on one view: L = sum CE / batch rows. Returns L.
double supervised_step(View& view, const Tensor& x, std::span<const int> y, double lr);

enum class ScheduleMode { real, fake };

/// Which loss terms are active (ablation modes).
struct LossMask {
    bool cot = true;
    bool dif = true;
};

struct EpochOptions {
    ScheduleMode schedule = ScheduleMode::real;
    LossMask mask{};
    /// Skip warmup and use the maxima (after a supervised pretrain phase).
    bool lambda_at_max = false;
    /// Train the n/2 pairs of an iteration concurrently (OpenMP).
    bool parallel_pairs = false;
    FeatureRange range{};
    /// Keep the per-iteration view permutation in the result.
    bool record_pairings = false;
};

struct EpochResult {
    double l_sup = 0.0;  // means over iterations and pairs
    double l_cot = 0.0;
    double l_dif = 0.0;
    double lr = 0.0;
    double lambda_cot = 0.0;
    double lambda_dif = 0.0;
    std::size_t iterations = 0;
    std::vector<std::vector<std::size_t>> pairings;
};

/// Permutation l of the view indices: shuffled in real mode, identity in fake mode.
std::vector<std::size_t> draw_pairing(std::size_t n_views, ScheduleMode mode, Rng& rng);

/// Iterations in one epoch: ceil(|D| / (n_views/2 * batch_size)).
std::size_t iterations_per_epoch(std::size_t dataset_size, std::size_t n_views,
                                 std::size_t batch_size);

/// One epoch (1-based `epoch`) of multi-view co-training: at every iteration a
/// pairing l is drawn and pair (l[2i], l[2i+1]) trains on bundle i.
/// `iteration_counter` is advanced and used in divergence reports.
EpochResult train_epoch(std::vector<View>& views, std::vector<StreamBundle>& bundles,
                        const HyperParams& hp, int epoch, std::size_t dataset_size, Rng& pairing_rng,
                        const EpochOptions& options, long* iteration_counter = nullptr);

/// Supervised-only warm start: each view trains alone on S with its own data
/// order for `epochs` epochs (cosine schedule over those epochs).
void pretrain(std::vector<View>& views, const std::shared_ptr<const Dataset>& labeled, int epochs,
              const HyperParams& hp, std::uint64_t seed);

struct EvalResult {
    std::vector<double> per_view;
    double mean = 0.0;
};

/// Per-view argmax error on a labeled set (shadow labels accepted) and their
/// unweighted mean. No ensembling.
EvalResult evaluate(const std::vector<const ViewModel*>& views, const Dataset& test);
EvalResult evaluate(const std::vector<View>& views, const Dataset& test);

}  // namespace cotrain
