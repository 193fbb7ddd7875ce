#include <cmath>
#include <numbers>
#include <random>

#include "cotrain/error.hpp"
#include "cotrain/losses.hpp"
#include "doctest.h"

using namespace cotrain;

namespace {

const double kLn2 = std::log(2.0);

Tensor rows(std::size_t cols, std::vector<double> v) {
    const auto n = v.size() / cols;
    return Tensor({n, cols}, std::move(v));
}

Tensor random_probs(std::size_t n, std::size_t c, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(0.7, 1.0);
    Tensor t = Tensor::matrix(n, c);
    for (std::size_t r = 0; r < n; ++r) {
        double total = 0.0;
        for (auto& v : t.row(r)) total += (v = gamma(rng) + 1e-12);
        for (auto& v : t.row(r)) v /= total;
    }
    return t;
}

}  // namespace

TEST_CASE("cross_entropy") {
    const std::vector<double> one{1, 0, 0};
    CHECK(cross_entropy(one, one) <= 1e-6);
    CHECK(cross_entropy(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.5}) ==
          doctest::Approx(kLn2).epsilon(1e-12));
    CHECK(cross_entropy(std::vector<double>{0, 1}, std::vector<double>{0.9, 0.1}) ==
          doctest::Approx(-std::log(0.1)).epsilon(1e-12));
    CHECK(std::abs(-std::log(0.1) - 2.302585) < 1e-6);
    // Clamp keeps log(0) finite.
    CHECK(cross_entropy(std::vector<double>{0, 1}, std::vector<double>{1, 0}) ==
          doctest::Approx(-std::log(kProbFloor)));
    CHECK_THROWS_AS(cross_entropy(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}),
                    ShapeError);
}

TEST_CASE("entropy") {
    CHECK(entropy(std::vector<double>{1, 0}) == 0.0);
    CHECK(entropy(std::vector<double>(10, 0.1)) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
    CHECK(entropy(std::vector<double>{0.5, 0.5}) == doctest::Approx(kLn2).epsilon(1e-12));
}

TEST_CASE("cot_loss closed forms") {
    CHECK(std::abs(cot_loss(rows(2, {1, 0}), rows(2, {0, 1})) - kLn2) < 1e-12);
    const auto p = rows(3, {0.2, 0.3, 0.5, 0.6, 0.3, 0.1});
    CHECK(std::abs(cot_loss(p, p)) < 1e-12);
    // H(0.5,0.5) - H(0.8,0.2), evaluated independently.
    const double h82 = -(0.8 * std::log(0.8) + 0.2 * std::log(0.2));
    const double expected = kLn2 - h82;
    CHECK(std::abs(expected - 0.192745) < 1e-6);
    CHECK(std::abs(cot_loss(rows(2, {0.8, 0.2}), rows(2, {0.2, 0.8})) - 0.192745) < 1e-6);
    CHECK_THROWS_AS(cot_loss(rows(2, {1, 0}), rows(3, {1, 0, 0})), ShapeError);
}

TEST_CASE("cot_loss properties over random batches") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t c = 2 + trial % 6;
        const auto p1 = random_probs(1 + trial % 7, c, rng);
        const auto p2 = random_probs(1 + trial % 7, c, rng);
        const double a = cot_loss(p1, p2);
        CHECK(a == cot_loss(p2, p1));
        CHECK(a >= -1e-15);
        CHECK(a <= kLn2 + 1e-9);
        CHECK(std::abs(cot_loss(p1, p1)) < 1e-12);
    }
}

TEST_CASE("Gibbs inequality") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = random_probs(1, 4, rng);
        auto p = random_probs(1, 4, rng);
        for (auto& v : p.values()) v = std::max(v, 1e-6);
        CHECK(cross_entropy(t.row(0), p.row(0)) >= entropy(t.row(0)) - 1e-9);
    }
}

TEST_CASE("dif_loss") {
    const auto a = rows(2, {1, 0, 0, 1});
    const auto b = rows(2, {0, 1, 1, 0});
    CHECK(dif_loss(a, b, b, a) <= 1e-6);

    const auto one = rows(2, {1, 0});
    const auto half = rows(2, {0.5, 0.5});
    CHECK(dif_loss(one, half, one, half) == doctest::Approx(2.0 * kLn2).epsilon(1e-12));

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_probs(5, 3, rng);
        const auto q = random_probs(5, 3, rng);
        const auto r = random_probs(5, 3, rng);
        const auto s = random_probs(5, 3, rng);
        CHECK(dif_loss(p, q, r, s) >= 0.0);
    }
    CHECK_THROWS_AS(dif_loss(one, half, rows(2, {1, 0, 1, 0}), half), ShapeError);
}

TEST_CASE("total_loss") {
    CHECK(total_loss(1.3, 0.4, 0.2, 0.0, 0.0) == 1.3);
    CHECK(total_loss(1.0, 0.5, 0.2, 10.0, 0.5) == doctest::Approx(6.1).epsilon(1e-14));
    CHECK(total_loss(0.7, 0.0, 0.0, 10.0, 0.5) == 0.7);
    CHECK_THROWS_AS(total_loss(1.0, 0.1, 0.1, -1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(total_loss(1.0, 0.1, 0.1, 0.0, -0.5), ConfigError);
}

TEST_CASE("graph losses agree with the plain evaluators") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p1 = random_probs(6, 3, rng);
        const auto p2 = random_probs(6, 3, rng);
        const auto t1 = random_probs(6, 3, rng);
        const auto t2 = random_probs(6, 3, rng);
        Graph g;
        Var a = g.input(p1);
        Var b = g.input(p2);
        CHECK(g.value(graph::cot_loss(a, b))[0] == doctest::Approx(cot_loss(p1, p2)).epsilon(1e-12));
        CHECK(g.value(graph::dif_loss(t1, a, t2, b))[0] ==
              doctest::Approx(dif_loss(t1, p1, t2, p2)).epsilon(1e-12));
        double ce = 0.0;
        for (std::size_t r = 0; r < 6; ++r) ce += cross_entropy(t1.row(r), p1.row(r));
        CHECK(g.value(graph::cross_entropy_sum(t1, a))[0] == doctest::Approx(ce).epsilon(1e-12));
    }
}

TEST_CASE("cot_loss sends gradient into both views") {
    std::mt19937_64 rng(5);
    const auto p1 = random_probs(4, 3, rng);
    const auto p2 = random_probs(4, 3, rng);
    Graph g;
    Var a = g.input(p1);
    Var b = g.input(p2);
    g.backward(graph::cot_loss(a, b));
    auto nonzero = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; });
    };
    CHECK(nonzero(g.grad(a)));
    CHECK(nonzero(g.grad(b)));
}

TEST_CASE("dif_loss gradient flows only into predictions on adversarial inputs") {
    std::mt19937_64 rng(9);
    auto t1 = random_probs(3, 2, rng);
    const auto t2 = random_probs(3, 2, rng);
    const auto q1 = random_probs(3, 2, rng);
    const auto q2 = random_probs(3, 2, rng);

    Graph g;
    Var clean1 = g.input(t1);  // observed, but passed as a constant target
    Var on_g2 = g.input(q1);
    Var on_g1 = g.input(q2);
    const Tensor clean_target = g.value(clean1);
    Var loss = graph::dif_loss(clean_target, on_g2, t2, on_g1);
    g.backward(loss);
    for (double v : g.grad(clean1)) CHECK(v == 0.0);
    CHECK(std::any_of(g.grad(on_g2).begin(), g.grad(on_g2).end(), [](double v) { return v != 0.0; }));
    CHECK(std::any_of(g.grad(on_g1).begin(), g.grad(on_g1).end(), [](double v) { return v != 0.0; }));

    // Perturbing the target still changes the value.
    t1.at(0, 0) += 0.05;
    t1.at(0, 1) -= 0.05;
    CHECK(dif_loss(t1, q1, t2, q2) != g.value(loss)[0]);
}
