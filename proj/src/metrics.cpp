#include "cotrain/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <string>

#include "cotrain/error.hpp"
#include "cotrain/rng.hpp"

namespace cotrain {

double agreement_rate(const std::vector<const ViewModel*>& views, const Tensor& x) {
    if (views.empty()) throw ConfigError("agreement_rate: no views");
    if (x.rows() == 0) return 1.0;
    const auto reference = views.front()->classify(x);
    std::vector<bool> agree(reference.size(), true);
    for (std::size_t v = 1; v < views.size(); ++v) {
        const auto labels = views[v]->classify(x);
        for (std::size_t r = 0; r < labels.size(); ++r) agree[r] = agree[r] && labels[r] == reference[r];
    }
    const auto count = std::count(agree.begin(), agree.end(), true);
    return static_cast<double>(count) / static_cast<double>(reference.size());
}

std::vector<std::vector<double>> transfer_matrix(const std::vector<const ViewModel*>& views,
                                                 const Tensor& probe, double epsilon,
                                                 FeatureRange range) {
    const auto n = views.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m[i][j] = transfer_rate(*views[i], *views[j], probe, epsilon, range);
        }
    }
    return m;
}

double collapse_score(const std::vector<std::vector<double>>& transfer) {
    const auto n = transfer.size();
    if (n < 2) throw ConfigError("collapse_score: needs at least two views");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) total += transfer[i][j];
        }
    }
    return total / static_cast<double>(n * (n - 1));
}

double collapse_score(const std::vector<const ViewModel*>& views, const Tensor& probe,
                      double epsilon, FeatureRange range) {
    if (views.size() < 2) throw ConfigError("collapse_score: needs at least two views");
    return collapse_score(transfer_matrix(views, probe, epsilon, range));
}

Tensor probe_subsample(const Dataset& data, std::size_t max_rows, std::uint64_t seed) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (rows.size() > max_rows) {
        Rng rng(seed);
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(max_rows);
        std::sort(rows.begin(), rows.end());
    }
    return data.features.gather_rows(rows);
}

std::vector<std::string> metrics_header(std::size_t n_views) {
    std::vector<std::string> cols{"epoch", "mean_err"};
    for (std::size_t v = 0; v < n_views; ++v) cols.push_back("err_v" + std::to_string(v));
    for (const char* c : {"l_sup", "l_cot", "l_dif", "agreement", "collapse", "lr", "lambda_cot",
                          "lambda_dif"}) {
        cols.emplace_back(c);
    }
    return cols;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, std::size_t n_views)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), n_views_(n_views) {
    if (!out_) throw IoError("cannot open metrics file " + path.string());
    const auto cols = metrics_header(n_views);
    for (std::size_t c = 0; c < cols.size(); ++c) out_ << (c ? "," : "") << cols[c];
    out_ << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed for " + path.string());
}

void MetricsWriter::write(const MetricsRecord& r) {
    if (r.view_err.size() != n_views_) {
        throw ShapeError("metrics record has " + std::to_string(r.view_err.size()) +
                         " view errors, file expects " + std::to_string(n_views_));
    }
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out_ << ',' << buf;
    };
    out_ << r.epoch;
    put(r.mean_err);
    for (double e : r.view_err) put(e);
    for (double v : {r.l_sup, r.l_cot, r.l_dif, r.agreement, r.collapse, r.lr, r.lambda_cot,
                     r.lambda_dif}) {
        put(v);
    }
    out_ << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed for " + path_.string());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) return out;
        start = comma + 1;
    }
}

double parse_double(const std::string& s, std::size_t line, const std::string& column) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("column '" + column + "': bad number '" + s + "'", line);
    }
    return v;
}

}  // namespace

std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open metrics file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header in " + path.string(), 1);
    const auto header = split_csv(line);

    std::size_t n_views = 0;
    while (std::find(header.begin(), header.end(), "err_v" + std::to_string(n_views)) != header.end()) {
        ++n_views;
    }
    const auto expected = metrics_header(n_views);
    for (const auto& col : expected) {
        if (std::find(header.begin(), header.end(), col) == header.end()) {
            throw ParseError("missing column '" + col + "'", 1);
        }
    }
    if (header != expected) throw ParseError("unexpected column layout", 1);

    std::vector<MetricsRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != expected.size()) {
            throw ParseError("expected " + std::to_string(expected.size()) + " columns, found " +
                                 std::to_string(f.size()),
                             line_no);
        }
        MetricsRecord r;
        const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.epoch);
        if (ec != std::errc{} || ptr != f[0].data() + f[0].size()) {
            throw ParseError("column 'epoch': bad integer '" + f[0] + "'", line_no);
        }
        std::size_t c = 1;
        auto next = [&]() {
            const auto& name = expected[c];
            return parse_double(f[c++], line_no, name);
        };
        r.mean_err = next();
        for (std::size_t v = 0; v < n_views; ++v) r.view_err.push_back(next());
        r.l_sup = next();
        r.l_cot = next();
        r.l_dif = next();
        r.agreement = next();
        r.collapse = next();
        r.lr = next();
        r.lambda_cot = next();
        r.lambda_dif = next();
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace cotrain
