#pragma once

#include <cstdint>
#include <filesystem>
#include "json.hpp"
#include <string>
#include <vector>

#include "cotrain/trainer.hpp"

namespace cotrain {

struct DatasetConfig {
    std::string generator = "two-moons";  // "two-moons" | "blobs" | "csv"
    std::size_t n = 2000;
    double noise = 0.1;
    std::size_t classes = 3;     // blobs only
    double separation = 3.0;     // blobs only
    std::uint64_t seed = 1;
    std::string csv;             // generator == "csv"
    std::string test_csv;        // optional with csv; empty = evaluate on U's shadow labels
    std::size_t test_n = 1000;   // generators: held-out set drawn with test_seed
    std::uint64_t test_seed = 1001;
    std::size_t n_labeled = 20;
    std::uint64_t split_seed = 7;
};

struct ModelConfig {
    std::vector<std::size_t> layer_dims{2, 32, 32, 2};
    std::uint64_t seed = 11;
    /// One seed per view; derived from `seed` when left empty.
    std::vector<std::uint64_t> seeds;
};

enum class RunMode { dct, sup_only, cot_only, dif_only };

struct RunConfig {
    std::string output_dir = "run";
    std::string metrics = "metrics.csv";
    int checkpoint_interval = 0;  // 0 = final checkpoint only
    RunMode mode = RunMode::dct;
    ScheduleMode schedule = ScheduleMode::real;
    int pretrain_epochs = 0;
    std::uint64_t seed = 5;
    bool parallel_pairs = false;
    std::size_t probe_rows = 256;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    ModelConfig model;
    HyperParams hyperparams;
    RunConfig run;

    /// Per-view seeds with defaults resolved (size n_views).
    std::vector<std::uint64_t> view_seeds() const;
    /// Throws ConfigError whose message starts with the offending field path.
    void validate() const;
};

LossMask mask_for(RunMode mode);
std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);

/// Parses a config document. Unknown keys and type errors raise ConfigError
/// naming the field path (e.g. "hyperparams.n_views"). A "preset" key inside
/// "hyperparams" seeds the block before individual fields apply.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved config; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace cotrain
