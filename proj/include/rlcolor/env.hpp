#pragma once

// Discrete design environment: a four-parameter lattice of nanodisk
// geometries, nine clamped +-5 nm actions, and a reward shaped from the
// CIEDE2000 distance between the simulated colour and a target colour.

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlcolor/color.hpp"
#include "rlcolor/optics.hpp"
#include "rlcolor/rng.hpp"

namespace rlcolor {

struct ParamBounds {
    int min_nm, max_nm, step_nm;

    // Highest reachable lattice point; max_nm itself need not be on-lattice.
    int top() const { return min_nm + (max_nm - min_nm) / step_nm * step_nm; }
    int count() const { return (top() - min_nm) / step_nm + 1; }
    bool on_lattice(int v) const {
        return v >= min_nm && v <= max_nm && (v - min_nm) % step_nm == 0;
    }
    int clamp(int v) const { return v < min_nm ? min_nm : (v > top() ? top() : v); }
};

struct EnvBounds {
    ParamBounds l{5, 500, 5};
    ParamBounds d{10, 500, 5};
    ParamBounds nt{5, 500, 5};
    ParamBounds at{10, 200, 5};
};

struct DesignState {
    int l_nm, d_nm, nt_nm, at_nm;

    auto operator<=>(const DesignState&) const = default;
};

inline void validate_state(const DesignState& s, const EnvBounds& b) {
    if (!b.l.on_lattice(s.l_nm) || !b.d.on_lattice(s.d_nm) || !b.nt.on_lattice(s.nt_nm) ||
        !b.at.on_lattice(s.at_nm))
        throw std::invalid_argument("design state off the parameter lattice");
}

// Per-axis cardinality counted as ceil((max - min) / step), the convention
// behind the published figure of 36,498,924 states for the full lattice; a
// single-valued axis counts as 1.
inline std::uint64_t state_space_size(const EnvBounds& b) {
    auto axis = [](const ParamBounds& pb) -> std::uint64_t {
        if (pb.max_nm == pb.min_nm) return 1;
        return (std::uint64_t(pb.max_nm - pb.min_nm) + pb.step_nm - 1) / pb.step_nm;
    };
    return axis(b.l) * axis(b.d) * axis(b.nt) * axis(b.at);
}

constexpr int kNumActions = 9;

struct ApplyResult {
    DesignState state;
    bool clamped;
};

// Actions 0..7 decrease/increase L, D, NT, AT by one lattice step; 8 is a
// no-op. Out-of-range results clamp to the bound.
inline ApplyResult apply_action(const DesignState& s, int action, const EnvBounds& b) {
    if (action < 0 || action >= kNumActions) throw std::invalid_argument("invalid action id");
    DesignState next = s;
    const ParamBounds* pb = nullptr;
    int* field = nullptr;
    int dir = (action % 2 == 0) ? -1 : +1;
    switch (action / 2) {
    case 0: pb = &b.l;  field = &next.l_nm;  break;
    case 1: pb = &b.d;  field = &next.d_nm;  break;
    case 2: pb = &b.nt; field = &next.nt_nm; break;
    case 3: pb = &b.at; field = &next.at_nm; break;
    default: return {next, false}; // action 8: do nothing
    }
    int raw = *field + dir * pb->step_nm;
    *field = pb->clamp(raw);
    return {next, raw != *field};
}

struct RewardConfig {
    double offset = 200.0;
    int exponent = 3;
    double divisor = 10000.0;
};

inline double reward_from_delta_e(double delta_e, const RewardConfig& cfg = {}) {
    if (!(delta_e >= 0.0)) throw std::invalid_argument("negative colour difference");
    if (delta_e >= cfg.offset)
        throw std::runtime_error("reward offset exceeded: delta_e = " + std::to_string(delta_e));
    double base = cfg.offset - delta_e;
    double p = 1.0;
    for (int i = 0; i < cfg.exponent; ++i) p *= base;
    return p / cfg.divisor;
}

struct TargetColor {
    std::string name;
    LabColor lab;
};

inline TargetColor named_target(const std::string& name) {
    if (name == "red") return {name, srgb_primary_lab(1, 0, 0)};
    if (name == "green") return {name, srgb_primary_lab(0, 1, 0)};
    if (name == "blue") return {name, srgb_primary_lab(0, 0, 1)};
    throw std::invalid_argument("unknown target colour '" + name + "'");
}

struct Evaluation {
    LabColor lab;
    double delta_e;
    double reward;
};

struct StepResult {
    DesignState next_state;
    double reward;
    double delta_e;
    LabColor lab;
    bool clamped;
};

// Immutable solver context plus a memoisation cache keyed by state. The cache
// only short-circuits recomputation; results are identical with or without it.
class Environment {
public:
    Environment(EnvBounds bounds, TargetColor target, MaterialSet materials, CmfTable cmf,
                IlluminantSpectrum illuminant, std::vector<double> grid_nm,
                EffectiveLayerModel model = {}, RewardConfig reward = {})
        : bounds_(bounds), target_(std::move(target)), materials_(std::move(materials)),
          cmf_(std::move(cmf)), illuminant_(std::move(illuminant)), grid_nm_(std::move(grid_nm)),
          model_(model), reward_(reward) {
        Spectrum flat;
        flat.wavelengths_nm = grid_nm_;
        flat.reflectance.assign(grid_nm_.size(), 1.0);
        white_ = spectrum_to_xyz(flat, cmf_, illuminant_);
    }

    const EnvBounds& bounds() const { return bounds_; }
    const TargetColor& target() const { return target_; }
    const XyzColor& white_point() const { return white_; }

    Spectrum simulate(const DesignState& s) const {
        return simulate_spectrum({double(s.l_nm), double(s.d_nm), double(s.nt_nm), double(s.at_nm)},
                                 grid_nm_, materials_, model_);
    }

    Evaluation evaluate(const DesignState& s) const {
        validate_state(s, bounds_);
        auto it = cache_.find(s);
        if (it != cache_.end()) return it->second;
        LabColor lab = xyz_to_lab(spectrum_to_xyz(simulate(s), cmf_, illuminant_), white_);
        double de = ciede2000(lab, target_.lab);
        Evaluation ev{lab, de, reward_from_delta_e(de, reward_)};
        cache_.emplace(s, ev);
        return ev;
    }

    StepResult step(const DesignState& s, int action) const {
        validate_state(s, bounds_);
        auto [next, clamped] = apply_action(s, action, bounds_);
        Evaluation ev = evaluate(next);
        return {next, ev.reward, ev.delta_e, ev.lab, clamped};
    }

    DesignState reset_fixed(const DesignState& s) const {
        validate_state(s, bounds_);
        return s;
    }

    // Draw order: L, D, NT, AT, one lattice draw each.
    DesignState reset_random(Rng& rng) const {
        auto draw = [&rng](const ParamBounds& pb) {
            return pb.min_nm + int(uniform_index(rng, pb.count())) * pb.step_nm;
        };
        DesignState s{};
        s.l_nm = draw(bounds_.l);
        s.d_nm = draw(bounds_.d);
        s.nt_nm = draw(bounds_.nt);
        s.at_nm = draw(bounds_.at);
        return s;
    }

    std::array<double, 4> encode(const DesignState& s) const {
        validate_state(s, bounds_);
        auto norm = [](int v, const ParamBounds& pb) {
            if (pb.max_nm == pb.min_nm) return 0.0;
            return double(v - pb.min_nm) / double(pb.max_nm - pb.min_nm);
        };
        return {norm(s.l_nm, bounds_.l), norm(s.d_nm, bounds_.d), norm(s.nt_nm, bounds_.nt),
                norm(s.at_nm, bounds_.at)};
    }

private:
    EnvBounds bounds_;
    TargetColor target_;
    MaterialSet materials_;
    CmfTable cmf_;
    IlluminantSpectrum illuminant_;
    std::vector<double> grid_nm_;
    EffectiveLayerModel model_;
    RewardConfig reward_;
    XyzColor white_;
    mutable std::map<DesignState, Evaluation> cache_;
};

} // namespace rlcolor
