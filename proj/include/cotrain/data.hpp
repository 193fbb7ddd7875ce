#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "cotrain/adversarial.hpp"
#include "cotrain/tensor.hpp"

namespace cotrain {

/// Feature matrix with optional per-row labels.
///
/// `hidden_labels` is the shadow store of an unlabeled split: true labels kept
/// for evaluation oracles only. Training code never reads it.
struct Dataset {
    Tensor features;                          // [N x d]
    std::vector<std::optional<int>> labels;   // size N
    std::vector<int> hidden_labels;           // empty, or size N
    std::size_t num_classes = 0;
    FeatureRange feature_range{};

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    bool fully_labeled() const;
    /// Labels for evaluation: visible labels, else the shadow store.
    std::vector<int> eval_labels() const;
    Dataset subset(std::span<const std::size_t> rows) const;
    /// Throws ConfigError on out-of-range labels or features.
    void validate() const;
};

struct SplitSpec {
    std::size_t n_labeled = 0;
    std::uint64_t seed = 0;
};

struct Split {
    Dataset labeled;      // S
    Dataset unlabeled;    // U (labels moved to hidden_labels)
    std::vector<std::size_t> labeled_rows;
    std::vector<std::size_t> unlabeled_rows;
};

/// Stratified labeled/unlabeled partition. Every class receives at least one
/// labeled row; the remaining quota is allotted proportionally to class size
/// (largest remainder). Row order inside S and U follows the input order.
Split split(const Dataset& dataset, const SplitSpec& spec);

/// Two interleaving half circles with Gaussian jitter, min-max scaled to [0,1].
/// Noise-free arcs: class 0 = (cos t, sin t), class 1 = (1 - cos t, 1/2 - sin t),
/// t evenly spaced on [0, pi]; sample order is shuffled by `seed`.
Dataset two_moons(std::size_t n, double noise_sd, std::uint64_t seed);

/// `num_classes` unit-variance Gaussian clusters in 2-D with centers evenly
/// spaced on a circle of radius `separation`, min-max scaled to [0,1].
Dataset gaussian_blobs(std::size_t n, std::size_t num_classes, double separation,
                       std::uint64_t seed);

/// CSV with header `f0,...,f{d-1},label`; empty label = unlabeled.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace cotrain
