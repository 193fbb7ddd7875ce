#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cotrain/adversarial.hpp"
#include "cotrain/data.hpp"
#include "cotrain/view_model.hpp"

namespace cotrain {

struct MetricsRecord {
    int epoch = 0;
    double mean_err = 0.0;
    std::vector<double> view_err;
    double l_sup = 0.0;
    double l_cot = 0.0;
    double l_dif = 0.0;
    double agreement = 0.0;
    double collapse = 0.0;
    double lr = 0.0;
    double lambda_cot = 0.0;
    double lambda_dif = 0.0;
    /// n x n cross-view transfer rates (row = attacker). Not serialized.
    std::vector<std::vector<double>> transfer;

    friend bool operator==(const MetricsRecord& a, const MetricsRecord& b) {
        return a.epoch == b.epoch && a.mean_err == b.mean_err && a.view_err == b.view_err &&
               a.l_sup == b.l_sup && a.l_cot == b.l_cot && a.l_dif == b.l_dif &&
               a.agreement == b.agreement && a.collapse == b.collapse && a.lr == b.lr &&
               a.lambda_cot == b.lambda_cot && a.lambda_dif == b.lambda_dif;
    }
};

/// Fraction of rows on which every view predicts the same class.
double agreement_rate(const std::vector<const ViewModel*>& views, const Tensor& x);

/// transfer[i][j] = transfer_rate(views[i], views[j], probe, epsilon). The
/// diagonal is each view's self-attack success rate.
std::vector<std::vector<double>> transfer_matrix(const std::vector<const ViewModel*>& views,
                                                 const Tensor& probe, double epsilon,
                                                 FeatureRange range = {});

/// Mean off-diagonal entry of the transfer matrix. Needs at least two views.
double collapse_score(const std::vector<const ViewModel*>& views, const Tensor& probe,
                      double epsilon, FeatureRange range = {});
double collapse_score(const std::vector<std::vector<double>>& transfer);

/// Fixed seeded subsample (without replacement) of at most `max_rows` rows.
Tensor probe_subsample(const Dataset& data, std::size_t max_rows, std::uint64_t seed);

/// Column names for an n-view run.
std::vector<std::string> metrics_header(std::size_t n_views);

/// Append-only CSV writer; the header is written on construction.
class MetricsWriter {
public:
    MetricsWriter(const std::filesystem::path& path, std::size_t n_views);
    void write(const MetricsRecord& record);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t n_views_;
};

std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);

}  // namespace cotrain
