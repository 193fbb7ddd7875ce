#include "cotrain/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "cotrain/checkpoint.hpp"
#include "cotrain/config.hpp"
#include "cotrain/data.hpp"
#include "cotrain/error.hpp"
#include "cotrain/experiment.hpp"
#include "cotrain/log.hpp"
#include "json.hpp"

namespace cotrain::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kGenerators = "two-moons, blobs";

struct GenDataArgs {
    std::string generator;
    std::size_t n = 2000;
    double noise = 0.1;
    std::size_t classes = 3;
    double separation = 3.0;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out, std::ostream& err) {
    Dataset ds;
    if (a.generator == "two-moons") {
        ds = two_moons(a.n, a.noise, a.seed);
    } else if (a.generator == "blobs") {
        ds = gaussian_blobs(a.n, a.classes, a.separation, a.seed);
    } else {
        err << "unknown generator '" << a.generator << "'; available: " << kGenerators << '\n';
        return kUsageError;
    }
    if (a.out.empty()) {
        err << "--out is required\n";
        return kUsageError;
    }
    save_csv(ds, a.out);
    std::map<int, std::size_t> histogram;
    for (const auto& l : ds.labels) ++histogram[*l];
    out << "wrote " << ds.size() << " rows to " << a.out << '\n';
    for (const auto& [label, count] : histogram) out << "  class " << label << ": " << count << '\n';
    return kSuccess;
}

fs::path resolve_output(const ExperimentConfig& c) { return fs::path(c.run.output_dir); }

int cmd_train(const std::string& config_path, std::ostream& out) {
    const auto config = load_config(config_path);
    const auto dir = resolve_output(config);
    const auto result = run_experiment(config, dir);
    const auto& last = result.records.back();
    out << "trained " << config.hyperparams.n_views << " views for " << last.epoch
        << " epochs; mean error " << last.mean_err << "; metrics in "
        << (dir / config.run.metrics).string() << '\n';
    return kSuccess;
}

int cmd_eval(const std::string& checkpoint_dir, const std::string& test_csv, bool as_json,
             std::ostream& out) {
    const auto views = load_checkpoints(checkpoint_dir);
    const auto test = load_csv(test_csv);
    std::vector<const ViewModel*> models;
    for (const auto& v : views) models.push_back(&v);
    const auto result = evaluate(models, test);
    if (as_json) {
        out << json{{"per_view", result.per_view}, {"mean", result.mean}}.dump() << '\n';
    } else {
        char buf[64];
        for (std::size_t v = 0; v < result.per_view.size(); ++v) {
            std::snprintf(buf, sizeof buf, "%.17g", result.per_view[v]);
            out << "view " << v << " error " << buf << '\n';
        }
        std::snprintf(buf, sizeof buf, "%.17g", result.mean);
        out << "mean error " << buf << '\n';
    }
    return kSuccess;
}

int cmd_diagnose(const std::string& config_path, std::ostream& out) {
    const auto base = load_config(config_path);
    const auto root = resolve_output(base);
    json summary = json::object();
    for (auto mode : {RunMode::cot_only, RunMode::dct}) {
        auto config = base;
        config.run.mode = mode;
        config.run.output_dir = (root / to_string(mode)).string();
        log::info("diagnose: running " + to_string(mode));
        const auto result = run_experiment(config, fs::path(config.run.output_dir));
        const auto& last = result.records.back();
        summary[to_string(mode)] = {{"final_epoch", last.epoch},
                                    {"collapse", last.collapse},
                                    {"l_dif", last.l_dif},
                                    {"mean_err", last.mean_err},
                                    {"agreement", last.agreement},
                                    {"metrics", (fs::path(config.run.output_dir) / config.run.metrics).string()}};
    }
    const double c_cot = summary["cot_only"]["collapse"];
    const double c_dct = summary["dct"]["collapse"];
    summary["collapse_cot_only_exceeds_dct"] = c_cot > c_dct;
    fs::create_directories(root);
    std::ofstream(root / "summary.json") << summary.dump(2) << '\n';

    out << "mode      collapse    l_dif       mean_err\n";
    for (const char* mode : {"cot_only", "dct"}) {
        char line[128];
        std::snprintf(line, sizeof line, "%-9s %-11.6f %-11.6f %.6f\n", mode,
                      summary[mode]["collapse"].get<double>(), summary[mode]["l_dif"].get<double>(),
                      summary[mode]["mean_err"].get<double>());
        out << line;
    }
    out << "collapse(cot_only) " << (c_cot > c_dct ? ">" : "<=") << " collapse(dct)\n";
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deep co-training on small synthetic datasets", "cotrain"};
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset CSV");
    gen_cmd->add_option("generator", gen.generator, std::string("Generator: ") + kGenerators)->required();
    gen_cmd->add_option("--n", gen.n, "Number of rows");
    gen_cmd->add_option("--noise", gen.noise, "Gaussian jitter (two-moons)");
    gen_cmd->add_option("--classes", gen.classes, "Number of clusters (blobs)");
    gen_cmd->add_option("--separation", gen.separation, "Cluster radius (blobs)");
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--out", gen.out, "Output CSV path");

    std::string config_path;
    auto* train_cmd = app.add_subcommand("train", "Run co-training from a JSON config");
    train_cmd->add_option("config", config_path, "Experiment config")->required();

    std::string ckpt_dir;
    std::string test_csv;
    bool as_json = false;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints on a labeled CSV");
    eval_cmd->add_option("checkpoint_dir", ckpt_dir, "Directory with view_*.ckpt")->required();
    eval_cmd->add_option("test_csv", test_csv, "Labeled dataset CSV")->required();
    eval_cmd->add_flag("--json", as_json, "Print JSON {per_view, mean}");

    auto* diag_cmd = app.add_subcommand("diagnose", "Compare cot_only and dct collapse");
    diag_cmd->add_option("config", config_path, "Experiment config")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        for (auto* sub : app.get_subcommands()) err << sub->help();
        if (app.get_subcommands().empty()) err << app.help();
        return kUsageError;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen_data(gen, out, err);
        if (train_cmd->parsed()) return cmd_train(config_path, out);
        if (eval_cmd->parsed()) return cmd_eval(ckpt_dir, test_csv, as_json, out);
        if (diag_cmd->parsed()) return cmd_diagnose(config_path, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << " (epoch " << e.epoch() << ", iteration "
            << e.iteration() << ")\n";
        return kDiverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace cotrain::cli
