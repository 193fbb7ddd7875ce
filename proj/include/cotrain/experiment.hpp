#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "cotrain/config.hpp"
#include "cotrain/data.hpp"
#include "cotrain/metrics.hpp"
#include "cotrain/trainer.hpp"

namespace cotrain {

struct ExperimentData {
    Split split;
    Dataset test;
};

/// Materializes the dataset block: generator or CSV, split into S/U, plus the
/// evaluation set.
ExperimentData prepare_data(const DatasetConfig& config);

struct RunResult {
    std::vector<MetricsRecord> records;  // epoch 0 (initial state) .. total_epochs
    std::vector<View> views;
    Dataset test;
};

/// Builds one metrics row for the current views.
MetricsRecord measure(const std::vector<View>& views, const Dataset& test, const Tensor& probe,
                      double epsilon, FeatureRange range);

/// Runs a full experiment: optional supervised pretraining, then co-training for
/// total_epochs. With `output_dir` set, writes config.json (resolved), the
/// metrics CSV, test.csv and checkpoints/ there. Epoch 0 of the metrics is the
/// state before co-training, with losses, lr and lambdas reported as 0.
RunResult run_experiment(const ExperimentConfig& config,
                         const std::optional<std::filesystem::path>& output_dir = std::nullopt);

}  // namespace cotrain
