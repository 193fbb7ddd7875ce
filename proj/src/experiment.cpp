#include "cotrain/experiment.hpp"

#include <fstream>
#include <memory>
#include <string>

#include "cotrain/checkpoint.hpp"
#include "cotrain/error.hpp"
#include "cotrain/log.hpp"
#include "cotrain/rng.hpp"

namespace cotrain {

ExperimentData prepare_data(const DatasetConfig& c) {
    Dataset full;
    std::optional<Dataset> test;
    if (c.generator == "two-moons") {
        full = two_moons(c.n, c.noise, c.seed);
        test = two_moons(c.test_n, c.noise, c.test_seed);
    } else if (c.generator == "blobs") {
        full = gaussian_blobs(c.n, c.classes, c.separation, c.seed);
        test = gaussian_blobs(c.test_n, c.classes, c.separation, c.test_seed);
    } else if (c.generator == "csv") {
        full = load_csv(c.csv);
        if (!c.test_csv.empty()) test = load_csv(c.test_csv);
    } else {
        throw ConfigError("dataset.generator: unknown generator '" + c.generator + "'");
    }
    ExperimentData out{split(full, SplitSpec{c.n_labeled, c.split_seed}), {}};
    out.test = test ? std::move(*test) : out.split.unlabeled;
    if (out.test.size() == 0) throw ConfigError("dataset: evaluation set is empty");
    out.test.num_classes = std::max(out.test.num_classes, full.num_classes);
    return out;
}

MetricsRecord measure(const std::vector<View>& views, const Dataset& test, const Tensor& probe,
                      double epsilon, FeatureRange range) {
    std::vector<const ViewModel*> models;
    for (const auto& v : views) models.push_back(&v.model);
    MetricsRecord r;
    const auto eval = evaluate(models, test);
    r.view_err = eval.per_view;
    r.mean_err = eval.mean;
    r.agreement = agreement_rate(models, test.features);
    r.transfer = transfer_matrix(models, probe, epsilon, range);
    r.collapse = collapse_score(r.transfer);
    return r;
}

RunResult run_experiment(const ExperimentConfig& config,
                         const std::optional<std::filesystem::path>& output_dir) {
    config.validate();
    const auto& hp = config.hyperparams;
    const auto& run = config.run;

    auto data = prepare_data(config.dataset);
    auto labeled = std::make_shared<const Dataset>(std::move(data.split.labeled));
    auto unlabeled = std::make_shared<const Dataset>(std::move(data.split.unlabeled));
    const auto dataset_size = labeled->size() + unlabeled->size();
    if (config.model.layer_dims.front() != labeled->dim()) {
        throw ConfigError("model.layer_dims: input dimension " +
                          std::to_string(config.model.layer_dims.front()) + " does not match " +
                          std::to_string(labeled->dim()) + " dataset features");
    }
    if (config.model.layer_dims.back() < labeled->num_classes) {
        throw ConfigError("model.layer_dims: output dimension is smaller than the class count");
    }
    const FeatureRange range = labeled->feature_range;

    RunResult result;
    result.test = std::move(data.test);
    for (auto seed : config.view_seeds()) {
        result.views.emplace_back(ViewModel::init(config.model.layer_dims, seed), hp.momentum,
                                  hp.weight_decay);
    }
    auto bundles = make_bundles(labeled, unlabeled, hp.n_views, hp.batch_size,
                                derive_seed(run.seed, 1));
    Rng pairing_rng(derive_seed(run.seed, 2));
    const Tensor probe = probe_subsample(result.test, run.probe_rows, derive_seed(run.seed, 4));

    std::optional<MetricsWriter> writer;
    std::filesystem::path ckpt_dir;
    if (output_dir) {
        std::filesystem::create_directories(*output_dir);
        std::ofstream cfg(*output_dir / "config.json", std::ios::trunc);
        if (!cfg) throw IoError("cannot write " + (*output_dir / "config.json").string());
        cfg << to_json(config).dump(2) << '\n';
        save_csv(result.test, *output_dir / "test.csv");
        writer.emplace(*output_dir / run.metrics, hp.n_views);
        ckpt_dir = *output_dir / "checkpoints";
    }
    auto save_views = [&](const std::filesystem::path& dir) {
        std::vector<const ViewModel*> models;
        for (const auto& v : result.views) models.push_back(&v.model);
        save_checkpoints(models, dir);
    };

    if (run.pretrain_epochs > 0) {
        log::info("pretraining " + std::to_string(hp.n_views) + " views for " +
                  std::to_string(run.pretrain_epochs) + " epochs");
        pretrain(result.views, labeled, run.pretrain_epochs, hp, derive_seed(run.seed, 3));
    }

    auto initial = measure(result.views, result.test, probe, hp.fgsm_epsilon, range);
    initial.epoch = 0;
    if (writer) writer->write(initial);
    result.records.push_back(std::move(initial));

    EpochOptions options;
    options.schedule = run.schedule;
    options.mask = mask_for(run.mode);
    options.lambda_at_max = run.pretrain_epochs > 0;
    options.parallel_pairs = run.parallel_pairs;
    options.range = range;

    long iteration = 0;
    for (int epoch = 1; epoch <= hp.total_epochs; ++epoch) {
        const auto losses = train_epoch(result.views, bundles, hp, epoch, dataset_size, pairing_rng,
                                        options, &iteration);
        auto record = measure(result.views, result.test, probe, hp.fgsm_epsilon, range);
        record.epoch = epoch;
        record.l_sup = losses.l_sup;
        record.l_cot = losses.l_cot;
        record.l_dif = losses.l_dif;
        record.lr = losses.lr;
        record.lambda_cot = losses.lambda_cot;
        record.lambda_dif = losses.lambda_dif;
        if (writer) writer->write(record);
        if (log::level() >= log::Level::debug ||
            (log::level() >= log::Level::info && (epoch % 25 == 0 || epoch == hp.total_epochs))) {
            log::info("epoch " + std::to_string(epoch) + " err " + std::to_string(record.mean_err) +
                      " l_sup " + std::to_string(record.l_sup) + " l_cot " +
                      std::to_string(record.l_cot) + " l_dif " + std::to_string(record.l_dif) +
                      " collapse " + std::to_string(record.collapse));
        }
        result.records.push_back(std::move(record));
        if (output_dir && run.checkpoint_interval > 0 && epoch % run.checkpoint_interval == 0) {
            save_views(ckpt_dir / ("epoch_" + std::to_string(epoch)));
        }
    }
    if (output_dir) save_views(ckpt_dir);
    return result;
}

}  // namespace cotrain
