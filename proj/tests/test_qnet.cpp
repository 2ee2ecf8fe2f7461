#include <doctest.h>

#include <cmath>

#include "rlcolor/qnet.hpp"

using namespace rlcolor;

TEST_CASE("init_params is seeded-deterministic with zero biases") {
    NetworkArchitecture arch;
    NetworkParams a = init_params(arch, 42);
    NetworkParams b = init_params(arch, 42);
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);
    NetworkParams c = init_params(arch, 43);
    CHECK(a.weights != c.weights);

    auto dims = arch.layer_dims();
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        double bound = std::sqrt(6.0 / dims[l]);
        for (double w : a.weights[l]) CHECK(std::fabs(w) <= bound);
        for (double bias : a.biases[l]) CHECK(bias == 0.0);
    }
}

TEST_CASE("forward on hand-checked linear layer") {
    NetworkArchitecture arch;
    arch.hidden = {};
    NetworkParams p;
    p.arch = arch;
    // W[o][i] = o + i, b[o] = o
    std::vector<double> w(9 * 4);
    std::vector<double> b(9);
    for (int o = 0; o < 9; ++o) {
        b[o] = o;
        for (int i = 0; i < 4; ++i) w[o * 4 + i] = o + i;
    }
    p.weights = {w};
    p.biases = {b};
    std::vector<double> x{1, 2, 3, 4};
    auto q = forward(p, x);
    for (int o = 0; o < 9; ++o) {
        double expect = o;
        for (int i = 0; i < 4; ++i) expect += (o + i) * x[i];
        CHECK(q[o] == doctest::Approx(expect).epsilon(1e-15));
    }
    CHECK(forward(p, x) == q);
    CHECK_THROWS_AS(forward(p, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("zero network maps everything to zero") {
    NetworkArchitecture arch;
    NetworkParams p = init_params(arch, 1);
    for (auto& w : p.weights) std::fill(w.begin(), w.end(), 0.0);
    auto q = forward(p, {0.3, 0.7, 0.1, 0.9});
    for (double v : q) CHECK(v == 0.0);
}

TEST_CASE("train_batch fixed point and descent") {
    NetworkArchitecture arch;
    arch.hidden = {8};
    NetworkParams p = init_params(arch, 5);
    std::vector<QSample> batch;
    Rng rng(9);
    for (int i = 0; i < 6; ++i) {
        std::vector<double> x(4);
        for (double& v : x) v = uniform01(rng);
        int a = int(uniform_index(rng, 9));
        batch.push_back({x, a, forward(p, x)[a]}); // target == current output
    }
    auto [updated, loss] = train_batch(p, batch, {0.1});
    CHECK(loss == doctest::Approx(0.0).scale(1));
    CHECK(updated.weights == p.weights);
    CHECK(updated.biases == p.biases);

    // descent at a small learning rate
    for (auto& s : batch) s.target += 1.0;
    auto [stepped, pre_loss] = train_batch(p, batch, {1e-4});
    CHECK(batch_loss(stepped, batch) <= pre_loss);
}

TEST_CASE("single linear layer matches the closed-form SGD update") {
    NetworkArchitecture arch;
    arch.hidden = {};
    NetworkParams p;
    p.arch = arch;
    p.weights = {std::vector<double>(9 * 4, 0.25)};
    p.biases = {std::vector<double>(9, 0.5)};
    std::vector<double> x{0.1, 0.2, 0.3, 0.4};
    int action = 3;
    double target = 2.0;
    double lr = 0.05;

    double q = 0.5 + 0.25 * (0.1 + 0.2 + 0.3 + 0.4);
    double err = q - target;
    auto [updated, loss] = train_batch(p, {{x, action, target}}, {lr});
    CHECK(loss == doctest::Approx(err * err).epsilon(1e-12));
    for (int i = 0; i < 4; ++i)
        CHECK(updated.weights[0][action * 4 + i] ==
              doctest::Approx(0.25 - lr * 2.0 * err * x[i]).epsilon(1e-12));
    CHECK(updated.biases[0][action] == doctest::Approx(0.5 - lr * 2.0 * err).epsilon(1e-12));
    // untouched rows
    for (int o = 0; o < 9; ++o) {
        if (o == action) continue;
        for (int i = 0; i < 4; ++i) CHECK(updated.weights[0][o * 4 + i] == 0.25);
    }
}

TEST_CASE("analytic gradient matches finite differences") {
    NetworkArchitecture arch;
    arch.hidden = {8};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        NetworkParams p = init_params(arch, seed);
        Rng rng(seed * 1000 + 7);
        std::vector<QSample> batch;
        for (int i = 0; i < 5; ++i) {
            std::vector<double> x(4);
            for (double& v : x) v = 2.0 * uniform01(rng) - 1.0;
            batch.push_back({x, int(uniform_index(rng, 9)), 2.0 * uniform01(rng) - 1.0});
        }
        auto [g, loss] = gradient(p, batch);
        (void)loss;
        const double h = 1e-5;
        double max_rel = 0.0;
        for (std::size_t l = 0; l < p.weights.size(); ++l) {
            for (std::size_t i = 0; i < p.weights[l].size(); i += 3) {
                NetworkParams pp = p, pm = p;
                pp.weights[l][i] += h;
                pm.weights[l][i] -= h;
                double fd = (batch_loss(pp, batch) - batch_loss(pm, batch)) / (2 * h);
                double denom = std::max({std::fabs(fd), std::fabs(g.weights[l][i]), 1e-6});
                max_rel = std::max(max_rel, std::fabs(fd - g.weights[l][i]) / denom);
            }
            for (std::size_t i = 0; i < p.biases[l].size(); i += 2) {
                NetworkParams pp = p, pm = p;
                pp.biases[l][i] += h;
                pm.biases[l][i] -= h;
                double fd = (batch_loss(pp, batch) - batch_loss(pm, batch)) / (2 * h);
                double denom = std::max({std::fabs(fd), std::fabs(g.biases[l][i]), 1e-6});
                max_rel = std::max(max_rel, std::fabs(fd - g.biases[l][i]) / denom);
            }
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("gradient linearity and stationarity") {
    NetworkArchitecture arch;
    arch.hidden = {6};
    arch.activation = Activation::Tanh;
    NetworkParams p = init_params(arch, 3);
    std::vector<QSample> s1{{{0.1, 0.2, 0.3, 0.4}, 2, 0.7}};
    std::vector<QSample> s2{{{0.9, 0.8, 0.7, 0.6}, 5, -0.3}};
    std::vector<QSample> both{s1[0], s2[0]};
    auto [g1, l1] = gradient(p, s1);
    auto [g2, l2] = gradient(p, s2);
    auto [gb, lb] = gradient(p, both);
    for (std::size_t l = 0; l < p.weights.size(); ++l)
        for (std::size_t i = 0; i < p.weights[l].size(); ++i)
            CHECK(gb.weights[l][i] ==
                  doctest::Approx(0.5 * (g1.weights[l][i] + g2.weights[l][i])).epsilon(1e-12));
    CHECK(lb == doctest::Approx(0.5 * (l1 + l2)).epsilon(1e-12));

    // gradient vanishes where the batch loss is zero
    std::vector<QSample> fit{{{0.1, 0.2, 0.3, 0.4}, 2, forward(p, {0.1, 0.2, 0.3, 0.4})[2]}};
    auto [gz, lz] = gradient(p, fit);
    CHECK(lz == doctest::Approx(0.0).scale(1));
    for (auto& layer : gz.weights)
        for (double v : layer) CHECK(v == 0.0);
}

TEST_CASE("soft_update blends per the target formula") {
    NetworkArchitecture arch;
    arch.hidden = {4};
    NetworkParams main = init_params(arch, 1);
    NetworkParams target = init_params(arch, 2);

    NetworkParams tau0 = soft_update(target, main, 0.0);
    CHECK(tau0.weights == target.weights);
    NetworkParams tau1 = soft_update(target, main, 1.0);
    CHECK(tau1.weights == main.weights);

    NetworkParams half = soft_update(target, main, 0.5);
    for (std::size_t l = 0; l < half.weights.size(); ++l)
        for (std::size_t i = 0; i < half.weights[l].size(); ++i) {
            double expect = 0.5 * main.weights[l][i] + 0.5 * target.weights[l][i];
            CHECK(half.weights[l][i] == doctest::Approx(expect).epsilon(1e-15));
            // contraction toward main
            CHECK(std::fabs(half.weights[l][i] - main.weights[l][i]) ==
                  doctest::Approx(0.5 * std::fabs(target.weights[l][i] - main.weights[l][i]))
                      .epsilon(1e-12));
        }

    NetworkParams t2{};
    t2.arch = arch;
    t2.weights = {{2.0}};
    t2.biases = {{0.0}};
    NetworkParams m2 = t2;
    m2.weights = {{4.0}};
    CHECK(soft_update(t2, m2, 0.5).weights[0][0] == 3.0);

    CHECK_THROWS_AS(soft_update(target, main, 1.5), std::invalid_argument);
    NetworkArchitecture other;
    other.hidden = {5};
    CHECK_THROWS_AS(soft_update(init_params(other, 1), main, 0.5), std::invalid_argument);
}

TEST_CASE("checkpoint round trip preserves forward outputs bit-exactly") {
    NetworkArchitecture arch;
    arch.hidden = {16, 16};
    NetworkParams p = init_params(arch, 77);
    std::string text = params_to_json(p).dump();
    NetworkParams back = params_from_json(nlohmann::json::parse(text));
    CHECK(back.weights == p.weights);
    CHECK(back.biases == p.biases);
    std::vector<double> x{0.11, 0.23, 0.37, 0.41};
    CHECK(forward(back, x) == forward(p, x));
}

TEST_CASE("learning reduces loss 100x on a tiny regression set") {
    NetworkArchitecture arch;
    arch.hidden = {16};
    NetworkParams p = init_params(arch, 12);
    Rng rng(99);
    std::vector<QSample> data;
    for (int i = 0; i < 16; ++i) {
        std::vector<double> x(4);
        for (double& v : x) v = uniform01(rng);
        data.push_back({x, int(uniform_index(rng, 9)), std::sin(3.0 * x[0]) + x[1] - x[2]});
    }
    double initial = batch_loss(p, data);
    TrainConfig cfg{1e-2};
    for (int step = 0; step < 2000; ++step) p = train_batch(p, data, cfg).first;
    CHECK(batch_loss(p, data) * 100.0 <= initial);
}

TEST_CASE("train_batch rejects bad input") {
    NetworkArchitecture arch;
    NetworkParams p = init_params(arch, 1);
    CHECK_THROWS_AS(train_batch(p, {}, {0.01}), std::invalid_argument);
    CHECK_THROWS_AS(train_batch(p, {{{0.1, 0.2, 0.3, 0.4}, 2, NAN}}, {0.01}),
                    std::invalid_argument);
}
