#include <cmath>
#include <random>

#include "cotrain/autograd.hpp"
#include "cotrain/error.hpp"
#include "cotrain/losses.hpp"
#include "cotrain/optimizer.hpp"
#include "cotrain/view_model.hpp"
#include "doctest.h"
#include "gradcheck.hpp"

using namespace cotrain;

namespace {

Tensor random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Tensor t = Tensor::matrix(rows, cols);
    for (auto& v : t.values()) v = u(rng);
    return t;
}

std::vector<std::vector<double>> grads_of(ViewModel& m) {
    std::vector<std::vector<double>> out;
    for (auto* p : m.parameters()) out.emplace_back(p->grad().begin(), p->grad().end());
    return out;
}

}  // namespace

TEST_CASE("init_view is seeded and validated") {
    const auto a = ViewModel::init({2, 8, 2}, 1);
    const auto b = ViewModel::init({2, 8, 2}, 2);
    const auto a2 = ViewModel::init({2, 8, 2}, 1);
    CHECK(a == a2);
    CHECK_FALSE(a == b);
    CHECK(a.layer_dims() == std::vector<std::size_t>{2, 8, 2});
    CHECK(a.layers()[0].activation == Activation::relu);
    CHECK(a.layers()[1].activation == Activation::identity);
    for (double v : a.layers()[1].bias.data()) CHECK(v == 0.0);
    const double bound = std::sqrt(6.0 / 10.0);
    for (double v : a.layers()[0].weight.data()) CHECK(std::abs(v) <= bound);

    CHECK_THROWS_AS(ViewModel::init({2}, 1), ConfigError);
    CHECK_THROWS_AS(ViewModel::init({}, 1), ConfigError);
    CHECK_THROWS_AS(ViewModel::init({2, 0, 2}, 1), ConfigError);
}

TEST_CASE("forward produces probability rows") {
    SUBCASE("zero parameters give the uniform distribution") {
        auto m = ViewModel::init({3, 5, 4}, 9);
        for (auto* p : m.parameters()) std::fill(p->values().begin(), p->values().end(), 0.0);
        const auto probs = m.predict(random_batch(6, 3, 1));
        for (double v : probs.data()) CHECK(v == 0.25);
    }
    SUBCASE("softmax saturates on large logits") {
        DenseLayer l{Tensor({2, 2}, std::vector<double>{1, 0, 0, 1}), Tensor({2}, 0.0),
                     Activation::identity};
        const auto m = ViewModel::from_layers({l});
        const auto probs = m.predict(Tensor({1, 2}, std::vector<double>{800.0, 0.0}));
        CHECK(probs[0] == 1.0);
        CHECK(probs[1] < 1e-300);
        CHECK(probs.all_finite());
    }
    SUBCASE("rows sum to one for random nets") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto m = ViewModel::init({4, 7, 6, 3}, s);
            const auto probs = m.predict(random_batch(9, 4, s + 100));
            for (std::size_t r = 0; r < probs.rows(); ++r) {
                double total = 0.0;
                for (double v : probs.row(r)) {
                    CHECK(v > 0.0);
                    total += v;
                }
                CHECK(std::abs(total - 1.0) < 1e-9);
            }
        }
    }
    SUBCASE("graph and graph-free forward agree bit for bit") {
        auto m = ViewModel::init({2, 16, 16, 3}, 5);
        const auto x = random_batch(11, 2, 3);
        Graph g;
        const auto p = m.forward(g, g.constant(x));
        CHECK(g.value(p) == m.predict(x));
    }
    SUBCASE("shape mismatch") {
        auto m = ViewModel::init({3, 4, 2}, 1);
        CHECK_THROWS_AS(m.predict(random_batch(2, 2, 0)), ShapeError);
        Graph g;
        CHECK_THROWS_AS(m.forward(g, g.constant(random_batch(2, 5, 0))), ShapeError);
    }
}

TEST_CASE("backward lifecycle") {
    auto m = ViewModel::init({2, 3, 2}, 4);
    const auto x = random_batch(5, 2, 8);

    SUBCASE("backward without a forward pass is a state error") {
        Graph g;
        CHECK_THROWS_AS(g.backward(Var{}), StateError);
    }
    SUBCASE("second backward is rejected") {
        Graph g;
        Var loss = sum(m.forward(g, g.constant(x)));
        g.backward(loss);
        CHECK_THROWS_AS(g.backward(loss), StateError);
    }
    SUBCASE("sum of probabilities has finite gradients everywhere") {
        Graph g;
        Var in = g.input(x);
        g.backward(sum(m.forward(g, in)));
        for (auto* p : m.parameters()) {
            for (double v : p->grad()) CHECK(std::isfinite(v));
        }
        for (double v : g.grad(in)) CHECK(std::isfinite(v));
    }
    SUBCASE("a constant loss leaves exactly zero gradients") {
        Graph g;
        Var in = g.input(x);
        m.forward(g, in);
        g.backward(g.constant(Tensor({1}, 3.5)));
        for (auto* p : m.parameters()) {
            for (double v : p->grad()) CHECK(v == 0.0);
        }
        for (double v : g.grad(in)) CHECK(v == 0.0);
    }
    SUBCASE("frozen graphs do not touch parameter gradients") {
        Graph g(ParamMode::frozen);
        Var in = g.input(x);
        g.backward(sum(m.forward(g, in)));
        for (const auto* p : m.parameters()) CHECK_FALSE(p->has_grad());
    }
    SUBCASE("non-scalar loss is rejected") {
        Graph g;
        CHECK_THROWS_AS(g.backward(m.forward(g, g.constant(x))), ShapeError);
    }
}

TEST_CASE("analytic gradients match central finite differences on a [2,3,2] net") {
    // Oracle: central differences with h = 1e-5 over every parameter entry.
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto m = ViewModel::init({2, 3, 2}, seed);
        const auto x = random_batch(6, 2, seed + 50);
        std::vector<int> y{0, 1, 1, 0, 1, 0};
        const auto target = one_hot(y, 2);

        auto value = [&] {
            double acc = 0.0;
            const auto p = m.predict(x);
            for (std::size_t r = 0; r < 6; ++r) acc += cross_entropy(target.row(r), p.row(r));
            return acc / 6.0;
        };
        Graph g;
        g.backward(scale(graph::cross_entropy_sum(target, m.forward(g, g.constant(x))), 1.0 / 6.0));
        const auto res = testing::check_gradients({&m}, value, grads_of(m));
        CHECK(res.checked == m.parameter_count());
        CHECK(res.max_rel_error < 1e-4);
    }
}

TEST_CASE("input gradients match finite differences") {
    auto m = ViewModel::init({3, 5, 3}, 21);
    auto x = random_batch(4, 3, 22);
    const auto target = one_hot(std::vector<int>{2, 0, 1, 1}, 3);
    auto value = [&] {
        const auto p = m.predict(x);
        double acc = 0.0;
        for (std::size_t r = 0; r < 4; ++r) acc += cross_entropy(target.row(r), p.row(r));
        return acc;
    };
    Graph g(ParamMode::frozen);
    Var in = g.input(x);
    g.backward(graph::cross_entropy_sum(target, m.forward(g, in)));
    const auto analytic = g.grad(in);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + 1e-5;
        const double up = value();
        x[i] = saved - 1e-5;
        const double down = value();
        x[i] = saved;
        const double numeric = (up - down) / 2e-5;
        CHECK(std::abs(numeric - analytic[i]) <= 1e-4 * std::max(std::abs(numeric), 1e-3));
    }
}

TEST_CASE("sgd_step") {
    auto make = [] {
        DenseLayer l{Tensor({1, 2}, std::vector<double>{1.0, -2.0}), Tensor({1}, 0.5),
                     Activation::identity};
        return ViewModel::from_layers({l});
    };
    auto set_grad = [](ViewModel& m, double g) {
        for (auto* p : m.parameters()) {
            p->zero_grad();
            for (auto& v : p->grad()) v = g;
        }
    };

    SUBCASE("vanilla step moves by lr * grad") {
        auto m = make();
        OptimizerState opt(m, 0.0, 0.0);
        set_grad(m, 0.25);
        sgd_step(m, opt, 0.1);
        CHECK(m.layers()[0].weight[0] == 1.0 - 0.1 * 0.25);
        CHECK(m.layers()[0].weight[1] == -2.0 - 0.1 * 0.25);
        CHECK(m.layers()[0].bias[0] == 0.5 - 0.1 * 0.25);
        CHECK_FALSE(m.layers()[0].weight.has_grad());
    }
    SUBCASE("lr = 0 keeps parameters and updates velocity") {
        auto m = make();
        const auto before = m;
        OptimizerState opt(m, 0.9, 0.0);
        set_grad(m, 0.5);
        sgd_step(m, opt, 0.0);
        CHECK(m == before);
        CHECK(opt.velocities()[0][0] == 0.5);
    }
    SUBCASE("two momentum steps accumulate g * (1 + 1.9)") {
        auto m = make();
        OptimizerState opt(m, 0.9, 0.0);
        const double g = 0.5;
        set_grad(m, g);
        sgd_step(m, opt, 1.0);
        set_grad(m, g);
        sgd_step(m, opt, 1.0);
        CHECK(m.layers()[0].weight[0] == doctest::Approx(1.0 - g * 2.9).epsilon(1e-15));
    }
    SUBCASE("weight decay applies to weights and biases") {
        auto m = make();
        OptimizerState opt(m, 0.0, 0.1);
        set_grad(m, 0.0);
        sgd_step(m, opt, 1.0);
        CHECK(m.layers()[0].weight[0] == doctest::Approx(0.9));
        CHECK(m.layers()[0].bias[0] == doctest::Approx(0.45));
    }
    SUBCASE("missing gradients are a state error") {
        auto m = make();
        OptimizerState opt(m, 0.9, 0.0);
        CHECK_THROWS_AS(sgd_step(m, opt, 0.1), StateError);
    }
}

TEST_CASE("training is deterministic") {
    auto run = [] {
        auto m = ViewModel::init({2, 6, 2}, 77);
        OptimizerState opt(m, 0.9, 1e-4);
        const auto x = random_batch(8, 2, 78);
        const auto t = one_hot(std::vector<int>{0, 1, 0, 1, 1, 0, 0, 1}, 2);
        for (int i = 0; i < 10; ++i) {
            Graph g;
            g.backward(graph::cross_entropy_sum(t, m.forward(g, g.constant(x))));
            sgd_step(m, opt, 0.05);
        }
        return m;
    };
    CHECK(run() == run());
}
