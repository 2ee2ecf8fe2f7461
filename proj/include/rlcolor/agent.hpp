#pragma once

// Double deep Q-learning agent: epsilon-greedy selection over the main
// network, bounded FIFO replay memory, Bellman targets with selection by the
// main network and evaluation by the target network, soft target update each
// training step. One RNG stream per run; draw order per step is
//   episode start: 4 lattice draws (random reset only; best-so-far and fixed
//                  restarts draw nothing)
//   each step:     exploration coin, [random action], [batch sampling]
// which makes runs bit-exactly reproducible from (seed, configs).

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "rlcolor/env.hpp"
#include "rlcolor/qnet.hpp"
#include "rlcolor/rng.hpp"

namespace rlcolor {

struct Transition {
    std::array<double, 4> state_features;
    int action;
    double reward;
    std::array<double, 4> next_state_features;
    bool terminal;
};

class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    }

    void remember(const Transition& t) {
        if (storage_.size() == capacity_) storage_.pop_front();
        storage_.push_back(t);
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return storage_[i]; }

    // Uniform without replacement within one batch (partial Fisher-Yates).
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const {
        if (batch_size > storage_.size()) throw std::runtime_error("warm-up not complete");
        std::vector<std::size_t> idx(storage_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::vector<Transition> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i) {
            std::size_t j = i + uniform_index(rng, idx.size() - i);
            std::swap(idx[i], idx[j]);
            batch.push_back(storage_[idx[i]]);
        }
        return batch;
    }

private:
    std::size_t capacity_;
    std::deque<Transition> storage_;
};

struct EpsilonSchedule {
    double epsilon_start = 1.0;
    double epsilon_min = 0.05;
    double decay = 0.9995;
};

struct AgentConfig {
    double gamma = 0.5;
    double tau = 0.05;
    std::size_t batch_size = 32;
    std::size_t replay_capacity = 5000;
    std::size_t warmup = 200;
    EpsilonSchedule schedule;
    int episodes = 18;
    int steps_per_episode = 500;
    NetworkArchitecture architecture;
    TrainConfig train;
    // Episode start: the leading explore_fraction of episodes begin at a
    // random lattice state; the remainder restart from the best state found
    // so far, so late episodes refine the most promising basin instead of
    // spending their budget in a fresh random one. fixed_start overrides both.
    double explore_fraction = 1.0 / 3.0;
    std::optional<DesignState> fixed_start;
};

inline double epsilon_value(const EpsilonSchedule& s, std::uint64_t global_step) {
    double eps = s.epsilon_start * std::pow(s.decay, double(global_step));
    return std::max(s.epsilon_min, eps);
}

inline int argmax_action(const std::vector<double>& q) {
    int best = 0;
    for (int i = 1; i < int(q.size()); ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

// Draw order: one exploration coin always; one action draw only if exploring.
inline int select_action(const std::vector<double>& features, const NetworkParams& main_params,
                         double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon outside [0, 1]");
    if (uniform01(rng) < epsilon) return int(uniform_index(rng, kNumActions));
    return argmax_action(forward(main_params, features));
}

// Double-DQN targets: y = r (terminal), else r + gamma * Q_target(s', a*)
// with a* = argmax_a Q_main(s', a).
inline std::vector<double> compute_targets(const std::vector<Transition>& batch,
                                           const NetworkParams& main_params,
                                           const NetworkParams& target_params, double gamma) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    std::vector<double> targets;
    targets.reserve(batch.size());
    for (const Transition& t : batch) {
        double y = t.reward;
        if (!t.terminal) {
            std::vector<double> feat(t.next_state_features.begin(), t.next_state_features.end());
            auto q_main = forward(main_params, feat);
            auto q_target = forward(target_params, feat);
            for (double v : q_main)
                if (!std::isfinite(v)) throw std::runtime_error("non-finite Q value");
            for (double v : q_target)
                if (!std::isfinite(v)) throw std::runtime_error("non-finite Q value");
            y += gamma * q_target[argmax_action(q_main)];
        }
        targets.push_back(y);
    }
    return targets;
}

inline double discounted_return(const std::vector<double>& rewards, double gamma) {
    double r = 0.0;
    for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) r = *it + gamma * r;
    return r;
}

struct StepRecord {
    int episode;
    int step;
    DesignState state; // state after the action
    int action;
    double epsilon;
    double reward;
    double delta_e;
    std::optional<double> loss; // empty before warm-up
};

struct RunReport {
    DesignState best_state{};
    double best_delta_e = std::numeric_limits<double>::infinity();
    LabColor best_lab{};
    std::vector<StepRecord> records;
};

// Full training state; serializable so a run can be checkpointed and resumed
// bit-identically.
class Trainer {
public:
    Trainer(const Environment& env, AgentConfig cfg, std::uint64_t seed)
        : env_(&env), cfg_(std::move(cfg)), rng_(seed),
          main_(init_params(cfg_.architecture, seed)),
          target_(main_) {}

    const RunReport& report() const { return report_; }
    const NetworkParams& main_params() const { return main_; }
    const NetworkParams& target_params() const { return target_; }
    const ReplayMemory& memory() const { return memory_; }
    bool finished() const { return episode_ >= cfg_.episodes; }

    void run_to_end() {
        while (!finished()) step_once();
    }

    void step_once() {
        if (finished()) throw std::logic_error("training schedule already complete");
        if (step_in_episode_ == 0) {
            if (cfg_.fixed_start)
                state_ = env_->reset_fixed(*cfg_.fixed_start);
            else if (episode_ >= explore_episodes() && std::isfinite(report_.best_delta_e))
                state_ = env_->reset_fixed(report_.best_state);
            else
                state_ = env_->reset_random(rng_);
        }

        double eps = epsilon_value(cfg_.schedule, global_step_);
        auto enc = env_->encode(state_);
        std::vector<double> feat(enc.begin(), enc.end());
        int action = select_action(feat, main_, eps, rng_);

        StepResult sr = env_->step(state_, action);
        bool terminal = (step_in_episode_ + 1 == cfg_.steps_per_episode);
        auto next_enc = env_->encode(sr.next_state);
        memory_.remember({enc, action, sr.reward, next_enc, terminal});

        std::optional<double> loss;
        if (memory_.size() >= cfg_.warmup && memory_.size() >= cfg_.batch_size) {
            auto batch = memory_.sample(cfg_.batch_size, rng_);
            auto targets = compute_targets(batch, main_, target_, cfg_.gamma);
            std::vector<QSample> samples;
            samples.reserve(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i)
                samples.push_back({{batch[i].state_features.begin(), batch[i].state_features.end()},
                                   batch[i].action, targets[i]});
            auto [updated, l] = train_batch(main_, samples, cfg_.train);
            if (!std::isfinite(l)) {
                report_.records.push_back({episode_, step_in_episode_, sr.next_state, action, eps,
                                           sr.reward, sr.delta_e, l});
                throw std::runtime_error("non-finite training loss, aborting run");
            }
            main_ = std::move(updated);
            target_ = soft_update(target_, main_, cfg_.tau);
            loss = l;
        }

        report_.records.push_back(
            {episode_, step_in_episode_, sr.next_state, action, eps, sr.reward, sr.delta_e, loss});
        if (sr.delta_e < report_.best_delta_e) {
            report_.best_delta_e = sr.delta_e;
            report_.best_state = sr.next_state;
            report_.best_lab = sr.lab;
        }

        state_ = sr.next_state;
        ++global_step_;
        if (++step_in_episode_ == cfg_.steps_per_episode) {
            step_in_episode_ = 0;
            ++episode_;
        }
    }

    // Checkpoint: params, memory, RNG state, counters, current state, and the
    // best-so-far triple. Log records are not included; the caller owns them.
    nlohmann::json checkpoint() const {
        nlohmann::json j;
        std::ostringstream rs;
        rs << rng_;
        j["rng"] = rs.str();
        j["episode"] = episode_;
        j["step_in_episode"] = step_in_episode_;
        j["global_step"] = global_step_;
        j["state"] = {state_.l_nm, state_.d_nm, state_.nt_nm, state_.at_nm};
        j["main"] = params_to_json(main_);
        j["target"] = params_to_json(target_);
        nlohmann::json mem = nlohmann::json::array();
        for (std::size_t i = 0; i < memory_.size(); ++i) {
            const Transition& t = memory_.at(i);
            mem.push_back({{"s", t.state_features},
                           {"a", t.action},
                           {"r", t.reward},
                           {"s2", t.next_state_features},
                           {"term", t.terminal}});
        }
        j["memory"] = std::move(mem);
        j["best"] = {{"state", {report_.best_state.l_nm, report_.best_state.d_nm,
                                report_.best_state.nt_nm, report_.best_state.at_nm}},
                     {"delta_e", std::isfinite(report_.best_delta_e) ? report_.best_delta_e : -1.0},
                     {"lab", {report_.best_lab.l, report_.best_lab.a, report_.best_lab.b}}};
        return j;
    }

    void restore(const nlohmann::json& j) {
        std::istringstream rs(j.at("rng").get<std::string>());
        rs >> rng_;
        episode_ = j.at("episode").get<int>();
        step_in_episode_ = j.at("step_in_episode").get<int>();
        global_step_ = j.at("global_step").get<std::uint64_t>();
        auto s = j.at("state");
        state_ = {s[0].get<int>(), s[1].get<int>(), s[2].get<int>(), s[3].get<int>()};
        main_ = params_from_json(j.at("main"));
        target_ = params_from_json(j.at("target"));
        memory_ = ReplayMemory(cfg_.replay_capacity);
        for (const auto& m : j.at("memory")) {
            Transition t;
            auto sf = m.at("s").get<std::vector<double>>();
            auto sf2 = m.at("s2").get<std::vector<double>>();
            std::copy_n(sf.begin(), 4, t.state_features.begin());
            std::copy_n(sf2.begin(), 4, t.next_state_features.begin());
            t.action = m.at("a").get<int>();
            t.reward = m.at("r").get<double>();
            t.terminal = m.at("term").get<bool>();
            memory_.remember(t);
        }
        auto b = j.at("best");
        auto bs = b.at("state");
        report_ = RunReport{};
        report_.best_state = {bs[0].get<int>(), bs[1].get<int>(), bs[2].get<int>(), bs[3].get<int>()};
        report_.best_delta_e = b.at("delta_e").get<double>();
        if (report_.best_delta_e < 0) report_.best_delta_e = std::numeric_limits<double>::infinity();
        auto bl = b.at("lab").get<std::vector<double>>();
        report_.best_lab = {bl[0], bl[1], bl[2]};
    }

private:
    int explore_episodes() const {
        if (!(cfg_.explore_fraction >= 0.0 && cfg_.explore_fraction <= 1.0))
            throw std::invalid_argument("explore_fraction outside [0, 1]");
        return int(std::ceil(cfg_.explore_fraction * double(cfg_.episodes)));
    }

    const Environment* env_;
    AgentConfig cfg_;
    Rng rng_;
    NetworkParams main_;
    NetworkParams target_;
    ReplayMemory memory_{cfg_.replay_capacity};
    DesignState state_{};
    int episode_ = 0;
    int step_in_episode_ = 0;
    std::uint64_t global_step_ = 0;
    RunReport report_;
};

inline RunReport train_run(const Environment& env, const AgentConfig& cfg, std::uint64_t seed) {
    Trainer trainer(env, cfg, seed);
    trainer.run_to_end();
    return trainer.report();
}

} // namespace rlcolor
