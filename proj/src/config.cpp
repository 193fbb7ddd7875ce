#include "cotrain/config.hpp"

#include <fstream>
#include <set>

#include "cotrain/error.hpp"
#include "cotrain/rng.hpp"

namespace cotrain {

using nlohmann::json;

LossMask mask_for(RunMode mode) {
    switch (mode) {
        case RunMode::dct: return {true, true};
        case RunMode::sup_only: return {false, false};
        case RunMode::cot_only: return {true, false};
        case RunMode::dif_only: return {false, true};
    }
    return {};
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::dct: return "dct";
        case RunMode::sup_only: return "sup_only";
        case RunMode::cot_only: return "cot_only";
        case RunMode::dif_only: return "dif_only";
    }
    return "dct";
}

RunMode run_mode_from_string(const std::string& s) {
    if (s == "dct") return RunMode::dct;
    if (s == "sup_only") return RunMode::sup_only;
    if (s == "cot_only") return RunMode::cot_only;
    if (s == "dif_only") return RunMode::dif_only;
    throw ConfigError("run.mode: expected dct|sup_only|cot_only|dif_only, got '" + s + "'");
}

std::vector<std::uint64_t> ExperimentConfig::view_seeds() const {
    if (!model.seeds.empty()) return model.seeds;
    std::vector<std::uint64_t> seeds;
    for (std::size_t v = 0; v < hyperparams.n_views; ++v) seeds.push_back(derive_seed(model.seed, v));
    return seeds;
}

void ExperimentConfig::validate() const {
    hyperparams.validate();
    const auto& d = dataset;
    if (d.generator != "two-moons" && d.generator != "blobs" && d.generator != "csv") {
        throw ConfigError("dataset.generator: expected two-moons|blobs|csv, got '" + d.generator + "'");
    }
    if (d.generator == "csv" && d.csv.empty()) throw ConfigError("dataset.csv: required with generator csv");
    if (d.generator != "csv") {
        if (d.n < 2) throw ConfigError("dataset.n: must be at least 2");
        if (d.noise < 0.0) throw ConfigError("dataset.noise: must be nonnegative");
        if (d.test_n < 1) throw ConfigError("dataset.test_n: must be positive");
        if (d.generator == "blobs" && d.classes < 2) throw ConfigError("dataset.classes: must be at least 2");
    }
    if (d.n_labeled == 0) throw ConfigError("dataset.n_labeled: must be positive");
    if (model.layer_dims.size() < 2) throw ConfigError("model.layer_dims: needs at least two entries");
    for (auto dim : model.layer_dims) {
        if (dim == 0) throw ConfigError("model.layer_dims: entries must be positive");
    }
    if (!model.seeds.empty() && model.seeds.size() != hyperparams.n_views) {
        throw ConfigError("model.seeds: expected " + std::to_string(hyperparams.n_views) +
                          " seeds (one per view), got " + std::to_string(model.seeds.size()));
    }
    if (run.checkpoint_interval < 0) throw ConfigError("run.checkpoint_interval: must be nonnegative");
    if (run.pretrain_epochs < 0) throw ConfigError("run.pretrain_epochs: must be nonnegative");
    if (run.metrics.empty()) throw ConfigError("run.metrics: must name a file");
    if (run.probe_rows == 0) throw ConfigError("run.probe_rows: must be positive");
}

namespace {

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        const auto& v = obj_.at(key);
        try {
            if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_unsigned()) throw ConfigError("");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) throw ConfigError("");
            }
            out = v.get<T>();
        } catch (const std::exception&) {
            throw ConfigError(field(key) + ": invalid value " + v.dump());
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return obj_.contains(key) ? &obj_.at(key) : nullptr;
    }

    std::string field(const std::string& key) const { return path_ + "." + key; }

    void reject_unknown() const {
        for (const auto& [key, _] : obj_.items()) {
            if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig c;
    static const std::set<std::string> blocks{"dataset", "model", "hyperparams", "run"};
    for (const auto& [key, _] : doc.items()) {
        if (!blocks.count(key)) throw ConfigError(key + ": unknown block");
    }

    if (doc.contains("dataset")) {
        Reader r(doc.at("dataset"), "dataset");
        auto& d = c.dataset;
        r.get("generator", d.generator);
        r.get("n", d.n);
        r.get("noise", d.noise);
        r.get("classes", d.classes);
        r.get("separation", d.separation);
        r.get("seed", d.seed);
        r.get("csv", d.csv);
        r.get("test_csv", d.test_csv);
        r.get("test_n", d.test_n);
        r.get("test_seed", d.test_seed);
        r.get("n_labeled", d.n_labeled);
        r.get("split_seed", d.split_seed);
        r.reject_unknown();
    }
    if (doc.contains("model")) {
        Reader r(doc.at("model"), "model");
        r.get("layer_dims", c.model.layer_dims);
        r.get("seed", c.model.seed);
        r.get("seeds", c.model.seeds);
        r.reject_unknown();
    }
    if (doc.contains("hyperparams")) {
        Reader r(doc.at("hyperparams"), "hyperparams");
        auto& h = c.hyperparams;
        std::string preset;
        r.get("preset", preset);
        if (!preset.empty()) {
            try {
                h = hyperparams_preset(preset);
            } catch (const ConfigError& e) {
                throw ConfigError(r.field("preset") + ": " + e.what());
            }
        }
        r.get("lambda_cot_max", h.lambda_cot_max);
        r.get("lambda_dif_max", h.lambda_dif_max);
        r.get("warmup_epochs", h.warmup_epochs);
        r.get("total_epochs", h.total_epochs);
        r.get("lr0", h.lr0);
        r.get("momentum", h.momentum);
        r.get("weight_decay", h.weight_decay);
        r.get("batch_size", h.batch_size);
        r.get("fgsm_epsilon", h.fgsm_epsilon);
        r.get("n_views", h.n_views);
        r.reject_unknown();
    }
    if (doc.contains("run")) {
        Reader r(doc.at("run"), "run");
        auto& run = c.run;
        r.get("output_dir", run.output_dir);
        r.get("metrics", run.metrics);
        r.get("checkpoint_interval", run.checkpoint_interval);
        std::string mode = to_string(run.mode);
        r.get("mode", mode);
        run.mode = run_mode_from_string(mode);
        std::string schedule = run.schedule == ScheduleMode::real ? "real" : "fake";
        r.get("schedule", schedule);
        if (schedule != "real" && schedule != "fake") {
            throw ConfigError("run.schedule: expected real|fake, got '" + schedule + "'");
        }
        run.schedule = schedule == "real" ? ScheduleMode::real : ScheduleMode::fake;
        r.get("pretrain_epochs", run.pretrain_epochs);
        r.get("seed", run.seed);
        r.get("parallel_pairs", run.parallel_pairs);
        r.get("probe_rows", run.probe_rows);
        r.reject_unknown();
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    const auto& d = c.dataset;
    const auto& h = c.hyperparams;
    const auto& r = c.run;
    return json{
        {"dataset",
         {{"generator", d.generator}, {"n", d.n}, {"noise", d.noise}, {"classes", d.classes},
          {"separation", d.separation}, {"seed", d.seed}, {"csv", d.csv}, {"test_csv", d.test_csv},
          {"test_n", d.test_n}, {"test_seed", d.test_seed}, {"n_labeled", d.n_labeled},
          {"split_seed", d.split_seed}}},
        {"model", {{"layer_dims", c.model.layer_dims}, {"seed", c.model.seed}, {"seeds", c.view_seeds()}}},
        {"hyperparams",
         {{"lambda_cot_max", h.lambda_cot_max}, {"lambda_dif_max", h.lambda_dif_max},
          {"warmup_epochs", h.warmup_epochs}, {"total_epochs", h.total_epochs}, {"lr0", h.lr0},
          {"momentum", h.momentum}, {"weight_decay", h.weight_decay}, {"batch_size", h.batch_size},
          {"fgsm_epsilon", h.fgsm_epsilon}, {"n_views", h.n_views}}},
        {"run",
         {{"output_dir", r.output_dir}, {"metrics", r.metrics},
          {"checkpoint_interval", r.checkpoint_interval}, {"mode", to_string(r.mode)},
          {"schedule", r.schedule == ScheduleMode::real ? "real" : "fake"},
          {"pretrain_epochs", r.pretrain_epochs}, {"seed", r.seed},
          {"parallel_pairs", r.parallel_pairs}, {"probe_rows", r.probe_rows}}}};
}

}  // namespace cotrain
