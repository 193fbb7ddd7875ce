#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "cotrain/data.hpp"
#include "cotrain/error.hpp"
#include "cotrain/streams.hpp"
#include "doctest.h"

using namespace cotrain;
namespace fs = std::filesystem;

namespace {

Dataset labeled_dataset(std::vector<int> labels, std::size_t classes) {
    Dataset d;
    d.features = Tensor::matrix(labels.size(), 2);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        d.features.at(r, 0) = static_cast<double>(r) / static_cast<double>(labels.size());
        d.features.at(r, 1) = static_cast<double>(labels[r]) / static_cast<double>(classes);
        d.labels.emplace_back(labels[r]);
    }
    d.num_classes = classes;
    return d;
}

std::shared_ptr<const Dataset> pool(std::size_t n, bool labeled) {
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
    auto d = labeled_dataset(y, 2);
    if (!labeled) {
        d.hidden_labels = y;
        std::fill(d.labels.begin(), d.labels.end(), std::nullopt);
    }
    return std::make_shared<const Dataset>(std::move(d));
}

fs::path temp_file(const std::string& name) {
    auto dir = fs::temp_directory_path() / "cotrain_test_data";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("split allocates labels per class") {
    std::vector<int> y;
    for (int i = 0; i < 50; ++i) y.push_back(0);
    for (int i = 0; i < 50; ++i) y.push_back(1);
    const auto d = labeled_dataset(y, 2);

    SUBCASE("proportional allocation") {
        const auto s = split(d, {10, 3});
        CHECK(s.labeled.size() == 10);
        CHECK(s.unlabeled.size() == 90);
        std::map<int, int> count;
        for (const auto& l : s.labeled.labels) ++count[*l];
        CHECK(count[0] == 5);
        CHECK(count[1] == 5);
        for (const auto& l : s.unlabeled.labels) CHECK_FALSE(l.has_value());
        CHECK(s.unlabeled.hidden_labels.size() == 90);
        for (std::size_t i = 0; i < 90; ++i) {
            CHECK(s.unlabeled.hidden_labels[i] == y[s.unlabeled_rows[i]]);
        }
        std::set<std::size_t> all(s.labeled_rows.begin(), s.labeled_rows.end());
        all.insert(s.unlabeled_rows.begin(), s.unlabeled_rows.end());
        CHECK(all.size() == 100);
    }
    SUBCASE("labeling everything leaves U empty") {
        const auto s = split(d, {100, 3});
        CHECK(s.labeled.size() == 100);
        CHECK(s.unlabeled.size() == 0);
    }
    SUBCASE("deterministic in the seed") {
        CHECK(split(d, {10, 4}).labeled_rows == split(d, {10, 4}).labeled_rows);
        CHECK(split(d, {10, 4}).labeled_rows != split(d, {10, 5}).labeled_rows);
    }
    SUBCASE("fewer labels than classes is rejected") {
        const auto three = labeled_dataset({0, 1, 2, 0, 1, 2}, 3);
        CHECK_THROWS_AS(split(three, {2, 1}), ConfigError);
        CHECK_THROWS_AS(split(d, {101, 1}), ConfigError);
    }
    SUBCASE("every class gets a label even when rare") {
        std::vector<int> skew(97, 0);
        skew.push_back(1);
        skew.push_back(2);
        skew.push_back(2);
        const auto s = split(labeled_dataset(skew, 3), {5, 9});
        std::set<int> seen;
        for (const auto& l : s.labeled.labels) seen.insert(*l);
        CHECK(seen.size() == 3);
        CHECK(s.labeled.size() == 5);
    }
}

TEST_CASE("two_moons") {
    SUBCASE("scaled to the unit square") {
        const auto d = two_moons(500, 0.1, 1);
        CHECK(d.size() == 500);
        CHECK(d.num_classes == 2);
        d.validate();
        double lo = 1.0;
        double hi = 0.0;
        for (double v : d.features.data()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
    }
    SUBCASE("noise-free points lie on the two arcs") {
        // 101 points per arc puts samples at t = 0, pi/2 and pi, so the
        // scaling extents are exactly x in [-1, 2] and y in [-0.5, 1].
        const auto d = two_moons(202, 0.0, 2);
        std::size_t upper = 0;
        for (std::size_t r = 0; r < d.size(); ++r) {
            const double x = d.features.at(r, 0) * 3.0 - 1.0;
            const double y = d.features.at(r, 1) * 1.5 - 0.5;
            if (*d.labels[r] == 0) {
                ++upper;
                CHECK(std::abs(x * x + y * y - 1.0) < 1e-9);
                CHECK(y >= -1e-9);
            } else {
                CHECK(std::abs((1 - x) * (1 - x) + (0.5 - y) * (0.5 - y) - 1.0) < 1e-9);
                CHECK(y <= 0.5 + 1e-9);
            }
        }
        CHECK(upper == 101);
    }
    SUBCASE("deterministic") {
        CHECK(two_moons(300, 0.1, 5).features == two_moons(300, 0.1, 5).features);
        CHECK_FALSE(two_moons(300, 0.1, 5).features == two_moons(300, 0.1, 6).features);
    }
    CHECK_THROWS_AS(two_moons(1, 0.1, 1), ConfigError);
    CHECK_THROWS_AS(two_moons(10, -0.1, 1), ConfigError);
}

TEST_CASE("gaussian_blobs") {
    const auto d = gaussian_blobs(300, 4, 5.0, 9);
    d.validate();
    CHECK(d.num_classes == 4);
    std::map<int, int> count;
    for (const auto& l : d.labels) ++count[*l];
    for (int c = 0; c < 4; ++c) CHECK(count[c] == 75);
    CHECK_THROWS_AS(gaussian_blobs(10, 1, 1.0, 1), ConfigError);
}

TEST_CASE("supervised counts") {
    for (std::uint64_t k = 0; k < 10; ++k) CHECK(supervised_count(k, 100, 100, 900) == 10);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const auto c = supervised_count(k, 99, 250, 750);
        seen.insert(c);
        total += c;
    }
    CHECK(seen == std::set<std::size_t>{24, 25});
    CHECK(total == 24750);
    CHECK(supervised_count(3, 50, 200, 0) == 50);
}

TEST_CASE("DataStream") {
    SUBCASE("batches fill to b with an empty U") {
        DataStream s(pool(30, true), std::make_shared<const Dataset>(), 8, 1);
        for (int i = 0; i < 10; ++i) {
            const auto b = s.next();
            CHECK(b.supervised() == 8);
            CHECK(b.unsupervised() == 0);
            CHECK(b.x_u.rows() == 0);
        }
    }
    SUBCASE("labeled pool is covered once per pass") {
        DataStream s(pool(250, true), pool(750, false), 99, 7);
        std::vector<std::size_t> s_rows;
        std::vector<std::size_t> u_rows;
        for (int i = 0; i < 40; ++i) {
            const auto b = s.next();
            CHECK(b.supervised() + b.unsupervised() == 99);
            CHECK(b.x_s.rows() == b.supervised());
            s_rows.insert(s_rows.end(), b.s_rows.begin(), b.s_rows.end());
            u_rows.insert(u_rows.end(), b.u_rows.begin(), b.u_rows.end());
        }
        for (std::size_t start = 0; start + 250 <= s_rows.size(); start += 250) {
            std::set<std::size_t> pass(s_rows.begin() + start, s_rows.begin() + start + 250);
            CHECK(pass.size() == 250);
        }
        for (std::size_t start = 0; start + 750 <= u_rows.size(); start += 750) {
            std::set<std::size_t> pass(u_rows.begin() + start, u_rows.begin() + start + 750);
            CHECK(pass.size() == 750);
        }
    }
    CHECK_THROWS_AS(DataStream(std::make_shared<const Dataset>(), pool(5, false), 4, 1), ConfigError);
    CHECK_THROWS_AS(DataStream(pool(5, true), pool(5, false), 0, 1), ConfigError);
}

TEST_CASE("StreamBundle") {
    auto S = pool(250, true);
    auto U = pool(750, false);
    StreamBundle bundle(S, U, 99, 11);
    StreamBundle again(S, U, 99, 11);
    bool orders_differ = false;
    for (int i = 0; i < 31; ++i) {
        const auto b = bundle.next();
        const auto c = again.next();
        CHECK(b.first.u_rows == b.second.u_rows);
        CHECK(b.first.x_u == b.second.x_u);
        CHECK(b.first.supervised() == b.second.supervised());
        orders_differ |= b.first.s_rows != b.second.s_rows;
        CHECK(b.first.s_rows == c.first.s_rows);
        CHECK(b.second.s_rows == c.second.s_rows);
        CHECK(b.first.u_rows == c.first.u_rows);
    }
    CHECK(orders_differ);
}

TEST_CASE("make_bundles") {
    auto S = pool(20, true);
    auto U = pool(80, false);
    CHECK(make_bundles(S, U, 2, 10, 1).size() == 1);
    CHECK(make_bundles(S, U, 8, 10, 1).size() == 4);
    CHECK_THROWS_AS(make_bundles(S, U, 3, 10, 1), ConfigError);
    CHECK_THROWS_AS(make_bundles(S, U, 0, 10, 1), ConfigError);
    auto bundles = make_bundles(S, U, 4, 10, 1);
    CHECK(bundles[0].next().first.u_rows != bundles[1].next().first.u_rows);
}

TEST_CASE("CSV round trip") {
    auto d = two_moons(40, 0.1, 3);
    d.labels[3].reset();
    d.labels[7].reset();
    const auto path = temp_file("roundtrip.csv");
    save_csv(d, path);
    const auto back = load_csv(path);
    CHECK(back.features == d.features);
    CHECK(back.labels == d.labels);
    CHECK(back.num_classes == 2);
    CHECK(back.feature_range.min == 0.0);
    CHECK(back.feature_range.max == 1.0);
}

TEST_CASE("CSV errors carry line numbers") {
    const auto path = temp_file("bad.csv");
    SUBCASE("wrong column count") {
        write_text(path, "f0,f1,label\n0.1,0.2,0\n0.3,1\n");
        try {
            load_csv(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("bad label") {
        write_text(path, "f0,label\n0.5,x\n");
        try {
            load_csv(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("bad header") {
        write_text(path, "a,b\n0.5,1\n");
        CHECK_THROWS_AS(load_csv(path), ParseError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv(temp_file("absent.csv")), IoError);
    }
    SUBCASE("range inference") {
        write_text(path, "f0,label\n-2.5,0\n0.5,4\n");
        const auto d = load_csv(path);
        CHECK(d.num_classes == 5);
        CHECK(d.feature_range.min == -2.5);
        CHECK(d.feature_range.max == 1.0);
    }
}
