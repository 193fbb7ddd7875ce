#include "cotrain/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "cotrain/error.hpp"
#include "cotrain/rng.hpp"

namespace cotrain {

bool Dataset::fully_labeled() const {
    return std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });
}

std::vector<int> Dataset::eval_labels() const {
    if (fully_labeled()) {
        std::vector<int> out;
        out.reserve(labels.size());
        for (const auto& l : labels) out.push_back(*l);
        return out;
    }
    if (hidden_labels.size() == size()) return hidden_labels;
    throw ConfigError("dataset has unlabeled rows and no shadow labels to evaluate against");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.features = features.gather_rows(rows);
    out.num_classes = num_classes;
    out.feature_range = feature_range;
    for (auto r : rows) {
        out.labels.push_back(labels[r]);
        if (!hidden_labels.empty()) out.hidden_labels.push_back(hidden_labels[r]);
    }
    return out;
}

void Dataset::validate() const {
    if (size() == 0) throw ConfigError("dataset is empty");
    if (labels.size() != size()) throw ConfigError("label count does not match row count");
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] && (*labels[r] < 0 || static_cast<std::size_t>(*labels[r]) >= num_classes)) {
            throw ConfigError("row " + std::to_string(r) + ": label " + std::to_string(*labels[r]) +
                              " outside [0, " + std::to_string(num_classes) + ")");
        }
    }
    for (double v : features.data()) {
        if (!std::isfinite(v) || v < feature_range.min || v > feature_range.max) {
            throw ConfigError("feature value outside the dataset's feature range");
        }
    }
}

Split split(const Dataset& dataset, const SplitSpec& spec) {
    if (!dataset.fully_labeled()) throw ConfigError("split: dataset must be fully labeled");
    const auto n = dataset.size();
    const auto classes = dataset.num_classes;
    if (spec.n_labeled < classes) {
        throw ConfigError("split: n_labeled (" + std::to_string(spec.n_labeled) +
                          ") is smaller than the number of classes (" + std::to_string(classes) +
                          ")");
    }
    if (spec.n_labeled > n) throw ConfigError("split: n_labeled exceeds dataset size");

    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t r = 0; r < n; ++r) by_class[static_cast<std::size_t>(*dataset.labels[r])].push_back(r);
    for (std::size_t c = 0; c < classes; ++c) {
        if (by_class[c].empty()) {
            throw ConfigError("split: class " + std::to_string(c) + " has no rows to label");
        }
    }

    // One guaranteed row per class, the rest by largest remainder.
    std::vector<std::size_t> quota(classes, 1);
    const auto extra = spec.n_labeled - classes;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        const double share = static_cast<double>(extra) *
                             static_cast<double>(by_class[c].size() - 1) /
                             static_cast<double>(n - classes == 0 ? 1 : n - classes);
        const auto whole = std::min(static_cast<std::size_t>(share), by_class[c].size() - 1);
        quota[c] += whole;
        assigned += whole;
        remainders.emplace_back(share - static_cast<double>(whole), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < extra; k = (k + 1) % classes) {
        const auto c = remainders[k].second;
        if (quota[c] < by_class[c].size()) {
            ++quota[c];
            ++assigned;
        }
    }

    Rng rng(spec.seed);
    std::vector<bool> chosen(n, false);
    for (std::size_t c = 0; c < classes; ++c) {
        auto rows = by_class[c];
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t k = 0; k < quota[c]; ++k) chosen[rows[k]] = true;
    }

    Split out;
    for (std::size_t r = 0; r < n; ++r) (chosen[r] ? out.labeled_rows : out.unlabeled_rows).push_back(r);
    out.labeled = dataset.subset(out.labeled_rows);
    out.unlabeled = dataset.subset(out.unlabeled_rows);
    out.unlabeled.hidden_labels.clear();
    for (auto& l : out.unlabeled.labels) {
        out.unlabeled.hidden_labels.push_back(*l);
        l.reset();
    }
    return out;
}

namespace {

void min_max_scale(Tensor& features) {
    const auto rows = features.rows();
    const auto cols = features.cols();
    for (std::size_t c = 0; c < cols; ++c) {
        double lo = features.at(0, c);
        double hi = lo;
        for (std::size_t r = 1; r < rows; ++r) {
            lo = std::min(lo, features.at(r, c));
            hi = std::max(hi, features.at(r, c));
        }
        const double span = hi - lo;
        for (std::size_t r = 0; r < rows; ++r) {
            auto& v = features.at(r, c);
            v = span > 0.0 ? std::clamp((v - lo) / span, 0.0, 1.0) : 0.5;
        }
    }
}

Dataset shuffled_dataset(Tensor features, std::vector<int> labels, std::size_t classes, Rng& rng) {
    const auto n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    Dataset ds;
    ds.features = features.gather_rows(order);
    for (auto r : order) ds.labels.emplace_back(labels[r]);
    ds.num_classes = classes;
    ds.feature_range = FeatureRange{0.0, 1.0};
    return ds;
}

}  // namespace

Dataset two_moons(std::size_t n, double noise_sd, std::uint64_t seed) {
    if (n < 2) throw ConfigError("two_moons: n must be at least 2");
    if (noise_sd < 0.0) throw ConfigError("two_moons: noise must be nonnegative");
    Rng rng(seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    const std::size_t n_upper = n / 2 + n % 2;
    const std::size_t n_lower = n / 2;
    Tensor x = Tensor::matrix(n, 2);
    std::vector<int> labels(n);
    auto arc_t = [](std::size_t k, std::size_t count) {
        return count > 1 ? std::numbers::pi * static_cast<double>(k) / static_cast<double>(count - 1)
                         : 0.0;
    };
    for (std::size_t k = 0; k < n_upper; ++k) {
        const double t = arc_t(k, n_upper);
        x.at(k, 0) = std::cos(t);
        x.at(k, 1) = std::sin(t);
        labels[k] = 0;
    }
    for (std::size_t k = 0; k < n_lower; ++k) {
        const double t = arc_t(k, n_lower);
        x.at(n_upper + k, 0) = 1.0 - std::cos(t);
        x.at(n_upper + k, 1) = 0.5 - std::sin(t);
        labels[n_upper + k] = 1;
    }
    if (noise_sd > 0.0) {
        for (auto& v : x.values()) v += noise_sd * jitter(rng);
    }
    min_max_scale(x);
    return shuffled_dataset(std::move(x), std::move(labels), 2, rng);
}

Dataset gaussian_blobs(std::size_t n, std::size_t num_classes, double separation,
                       std::uint64_t seed) {
    if (n < 2) throw ConfigError("gaussian_blobs: n must be at least 2");
    if (num_classes < 2) throw ConfigError("gaussian_blobs: need at least 2 classes");
    if (separation < 0.0) throw ConfigError("gaussian_blobs: separation must be nonnegative");
    Rng rng(seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    Tensor x = Tensor::matrix(n, 2);
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto c = r % num_classes;
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                             static_cast<double>(num_classes);
        x.at(r, 0) = separation * std::cos(angle) + jitter(rng);
        x.at(r, 1) = separation * std::sin(angle) + jitter(rng);
        labels[r] = static_cast<int>(c);
    }
    min_max_scale(x);
    return shuffled_dataset(std::move(x), std::move(labels), num_classes, rng);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header in " + path.string(), 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);
    if (header.size() < 2 || header.back() != "label") {
        throw ParseError("header must be f0,...,f{d-1},label", 1);
    }
    const auto dim = header.size() - 1;
    for (std::size_t c = 0; c < dim; ++c) {
        if (header[c] != "f" + std::to_string(c)) {
            throw ParseError("header column " + std::to_string(c) + " must be f" + std::to_string(c), 1);
        }
    }

    std::vector<double> values;
    std::vector<std::optional<int>> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != dim + 1) {
            throw ParseError("expected " + std::to_string(dim + 1) + " columns, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        for (std::size_t c = 0; c < dim; ++c) {
            double v = 0.0;
            const auto f = fields[c];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
                throw ParseError("bad feature value '" + std::string(f) + "'", line_no);
            }
            values.push_back(v);
        }
        const auto lf = fields[dim];
        if (lf.empty()) {
            labels.emplace_back();
        } else {
            int label = 0;
            const auto [ptr, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), label);
            if (ec != std::errc{} || ptr != lf.data() + lf.size() || label < 0) {
                throw ParseError("bad label '" + std::string(lf) + "'", line_no);
            }
            labels.emplace_back(label);
        }
    }
    if (labels.empty()) throw ParseError("dataset has no rows", line_no);

    Dataset ds;
    ds.features = Tensor({labels.size(), dim}, std::move(values));
    ds.labels = std::move(labels);
    int max_label = -1;
    for (const auto& l : ds.labels) max_label = std::max(max_label, l.value_or(-1));
    ds.num_classes = static_cast<std::size_t>(std::max(max_label + 1, 2));
    const auto [lo, hi] = std::minmax_element(ds.features.data().begin(), ds.features.data().end());
    ds.feature_range = FeatureRange{std::min(0.0, *lo), std::max(1.0, *hi)};
    ds.validate();
    return ds;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write dataset " + path.string());
    const auto dim = dataset.dim();
    for (std::size_t c = 0; c < dim; ++c) out << 'f' << c << ',';
    out << "label\n";
    char buf[32];
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", dataset.features.at(r, c));
            out << buf << ',';
        }
        if (dataset.labels[r]) out << *dataset.labels[r];
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace cotrain
