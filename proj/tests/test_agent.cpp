#include <doctest.h>

#include <cmath>
#include <set>

#include "rlcolor/agent.hpp"
#include "rlcolor/config.hpp"
#include "rlcolor/run_io.hpp"

using namespace rlcolor;

namespace {

// Single linear layer with zero weights: the output row equals the biases,
// regardless of input. Used to pin Q-values in target tests.
NetworkParams stub_network(const std::vector<double>& outputs) {
    NetworkParams p;
    p.arch.hidden = {};
    p.weights = {std::vector<double>(9 * 4, 0.0)};
    p.biases = {outputs};
    return p;
}

Environment coarse_env() {
    RunConfig cfg;
    cfg.bounds.l = {5, 500, 25};
    cfg.bounds.d = {10, 500, 25};
    cfg.bounds.nt = {100, 100, 5};
    cfg.bounds.at = {70, 70, 5};
    return make_environment(cfg);
}

} // namespace

TEST_CASE("epsilon schedule") {
    EpsilonSchedule s{1.0, 0.05, 0.99};
    CHECK(epsilon_value(s, 0) == 1.0);
    CHECK(epsilon_value(s, 100) == doctest::Approx(std::pow(0.99, 100)).epsilon(1e-12));
    CHECK(epsilon_value(s, 1000000) == 0.05);
    double prev = 2.0;
    for (std::uint64_t t = 0; t < 2000; t += 13) {
        double e = epsilon_value(s, t);
        CHECK(e <= prev);
        CHECK(e >= s.epsilon_min);
        prev = e;
    }
}

TEST_CASE("select_action greedy, ties, exploration") {
    Rng rng(1);
    NetworkParams p = stub_network({0, 0, 5, 0, 0, 0, 0, 0, 0});
    CHECK(select_action({0, 0, 0, 0}, p, 0.0, rng) == 2);

    NetworkParams tie = stub_network({0, 0, 0, 1, 0, 0, 0, 1, 0});
    CHECK(select_action({0, 0, 0, 0}, tie, 0.0, rng) == 3);

    // scale invariance of the greedy choice
    NetworkParams shifted = stub_network({10, 10, 15, 10, 10, 10, 10, 10, 10});
    CHECK(select_action({0, 0, 0, 0}, shifted, 0.0, rng) == 2);

    // epsilon = 1: empirically uniform over 9000 draws
    Rng erng(1234);
    std::array<int, 9> counts{};
    for (int i = 0; i < 9000; ++i) ++counts[select_action({0, 0, 0, 0}, p, 1.0, erng)];
    double expect = 1000.0, sigma = std::sqrt(9000.0 * (1.0 / 9) * (8.0 / 9));
    for (int c : counts) CHECK(std::fabs(c - expect) < 3.0 * sigma);

    CHECK_THROWS_AS(select_action({0, 0, 0, 0}, p, 1.5, rng), std::invalid_argument);
}

TEST_CASE("compute_targets double-DQN rule") {
    std::vector<Transition> batch;
    batch.push_back({{0, 0, 0, 0}, 0, 800.0, {0, 0, 0, 0}, true});
    NetworkParams main = stub_network({0, 5, 2, 0, 0, 0, 0, 0, 0});
    NetworkParams target = stub_network({7, 3, 9, 0, 0, 0, 0, 0, 0});

    auto terminal = compute_targets(batch, main, target, 0.9);
    CHECK(terminal[0] == 800.0);

    batch[0].terminal = false;
    batch[0].reward = 1.0;
    auto zero_gamma = compute_targets(batch, main, target, 0.0);
    CHECK(zero_gamma[0] == 1.0);

    // a* = argmax Q_main = 1, evaluated by the target network
    auto y = compute_targets(batch, main, target, 0.9);
    CHECK(y[0] == doctest::Approx(1.0 + 0.9 * 3.0).epsilon(1e-15));

    // degenerates to vanilla DQN when the two networks coincide
    auto vanilla = compute_targets(batch, main, main, 0.9);
    CHECK(vanilla[0] == doctest::Approx(1.0 + 0.9 * 5.0).epsilon(1e-15));

    // tau = 1 soft update makes target computation equal main-only computation
    NetworkParams blended = soft_update(target, main, 1.0);
    CHECK(compute_targets(batch, main, blended, 0.9) == compute_targets(batch, main, main, 0.9));

    CHECK_THROWS_AS(compute_targets({}, main, target, 0.9), std::invalid_argument);
}

TEST_CASE("replay memory FIFO and sampling") {
    ReplayMemory mem(3);
    auto tr = [](double r) {
        return Transition{{0, 0, 0, 0}, 0, r, {0, 0, 0, 0}, false};
    };
    mem.remember(tr(1));
    mem.remember(tr(2));
    CHECK(mem.size() == 2);
    mem.remember(tr(3));
    mem.remember(tr(4)); // evicts 1
    CHECK(mem.size() == 3);
    CHECK(mem.at(0).reward == 2);
    CHECK(mem.at(1).reward == 3);
    CHECK(mem.at(2).reward == 4);

    Rng rng(5);
    auto all = mem.sample(3, rng);
    std::multiset<double> rewards;
    for (auto& t : all) rewards.insert(t.reward);
    CHECK(rewards == std::multiset<double>{2, 3, 4});

    Rng r1(9), r2(9);
    auto b1 = mem.sample(2, r1);
    auto b2 = mem.sample(2, r2);
    CHECK(b1[0].reward == b2[0].reward);
    CHECK(b1[1].reward == b2[1].reward);
    CHECK(b1[0].reward != b1[1].reward); // without replacement

    CHECK_THROWS_WITH_AS(mem.sample(4, rng), doctest::Contains("warm-up"), std::runtime_error);
}

TEST_CASE("sampling is uniform and only returns inserted transitions") {
    ReplayMemory mem(100);
    for (int i = 0; i < 100; ++i)
        mem.remember({{0, 0, 0, 0}, 0, double(i), {0, 0, 0, 0}, false});
    Rng rng(31);
    std::array<int, 100> inclusion{};
    const int draws = 10000, k = 10;
    for (int d = 0; d < draws; ++d)
        for (auto& t : mem.sample(k, rng)) {
            int idx = int(t.reward);
            REQUIRE(idx >= 0);
            REQUIRE(idx < 100);
            ++inclusion[idx];
        }
    double p = double(k) / 100.0, expect = draws * p;
    double sigma = std::sqrt(draws * p * (1 - p));
    for (int c : inclusion) CHECK(std::fabs(c - expect) < 3.0 * sigma);
}

TEST_CASE("discounted_return recursion") {
    CHECK(discounted_return({3, 7, 9}, 0.0) == 3.0);
    CHECK(discounted_return({1, 1, 1}, 0.5) == doctest::Approx(1.75).epsilon(1e-15));
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> rewards(1 + uniform_index(rng, 10));
        for (double& r : rewards) r = 2.0 * uniform01(rng) - 1.0;
        double gamma = 0.9 * uniform01(rng);
        std::vector<double> tail(rewards.begin() + 1, rewards.end());
        CHECK(discounted_return(rewards, gamma) ==
              doctest::Approx(rewards[0] + gamma * discounted_return(tail, gamma)).epsilon(1e-12));
    }
}

TEST_CASE("train_run bookkeeping and determinism") {
    Environment env = coarse_env();
    AgentConfig cfg;
    cfg.episodes = 1;
    cfg.steps_per_episode = 10;
    cfg.schedule = {1.0, 1.0, 1.0}; // epsilon pinned to 1
    cfg.warmup = 5;
    cfg.batch_size = 4;

    RunReport rep = train_run(env, cfg, 7);
    CHECK(rep.records.size() == 10);
    double min_de = 1e9;
    for (auto& r : rep.records) min_de = std::min(min_de, r.delta_e);
    CHECK(rep.best_delta_e == min_de);
    CHECK(env.evaluate(rep.best_state).delta_e == rep.best_delta_e);

    RunReport rep2 = train_run(env, cfg, 7);
    REQUIRE(rep2.records.size() == rep.records.size());
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        CHECK(rep.records[i].state == rep2.records[i].state);
        CHECK(rep.records[i].action == rep2.records[i].action);
        CHECK(rep.records[i].reward == rep2.records[i].reward);
        CHECK(rep.records[i].loss == rep2.records[i].loss);
    }
}

TEST_CASE("late episodes restart from the best state found so far") {
    Environment env = coarse_env();
    AgentConfig cfg;
    cfg.episodes = 10;
    cfg.steps_per_episode = 1; // each record is one action away from the start
    cfg.schedule = {1.0, 1.0, 1.0};
    cfg.warmup = 1000; // no training, behaviour stays a pure random walk
    cfg.explore_fraction = 0.2;

    RunReport rep = train_run(env, cfg, 11);
    REQUIRE(rep.records.size() == 10);
    double best = std::numeric_limits<double>::infinity();
    DesignState best_state{};
    for (const auto& r : rep.records) {
        if (r.episode >= 2) {
            // start was best_state; the logged state is at most one action away
            int moved = std::abs(r.state.l_nm - best_state.l_nm) +
                        std::abs(r.state.d_nm - best_state.d_nm) +
                        std::abs(r.state.nt_nm - best_state.nt_nm) +
                        std::abs(r.state.at_nm - best_state.at_nm);
            CHECK(moved <= 25);
        }
        if (r.delta_e < best) {
            best = r.delta_e;
            best_state = r.state;
        }
    }
}

TEST_CASE("checkpoint and resume continue bit-identically") {
    Environment env = coarse_env();
    AgentConfig cfg;
    cfg.episodes = 2;
    cfg.steps_per_episode = 30;
    cfg.warmup = 10;
    cfg.batch_size = 8;

    Trainer full(env, cfg, 99);
    full.run_to_end();

    Trainer first(env, cfg, 99);
    for (int i = 0; i < 25; ++i) first.step_once();
    nlohmann::json snap = first.checkpoint();

    Trainer resumed(env, cfg, 99);
    resumed.restore(nlohmann::json::parse(snap.dump())); // through serialized text
    while (!resumed.finished()) resumed.step_once();

    // records after the snapshot point must match the uninterrupted run
    const auto& a = full.report().records;
    const auto& b = resumed.report().records;
    REQUIRE(b.size() == a.size() - 25);
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(b[i].state == a[i + 25].state);
        CHECK(b[i].action == a[i + 25].action);
        CHECK(b[i].reward == a[i + 25].reward);
        CHECK(b[i].epsilon == a[i + 25].epsilon);
        CHECK(b[i].loss == a[i + 25].loss);
    }
    CHECK(resumed.report().best_delta_e == full.report().best_delta_e);
    CHECK(resumed.main_params().weights == full.main_params().weights);
}

TEST_CASE("run log round trip") {
    Environment env = coarse_env();
    AgentConfig cfg;
    cfg.episodes = 1;
    cfg.steps_per_episode = 8;
    cfg.warmup = 4;
    cfg.batch_size = 2;
    RunReport rep = train_run(env, cfg, 3);

    std::stringstream ss;
    write_run_log(ss, rep.records);
    auto back = read_run_log(ss);
    REQUIRE(back.size() == rep.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].state == rep.records[i].state);
        CHECK(back[i].reward == rep.records[i].reward);
        CHECK(back[i].delta_e == rep.records[i].delta_e);
        CHECK(back[i].loss == rep.records[i].loss);
    }
}
