#pragma once

// Run configuration: one JSON file with named blocks (target, env, optics,
// agent, output). Every field has a documented default; configs/default.json
// spells them all out.

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlcolor/agent.hpp"
#include "rlcolor/env.hpp"

namespace rlcolor {

struct RunConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    std::string target_name = "red";          // red | green | blue
    std::optional<LabColor> target_lab;       // explicit triple overrides the name

    EnvBounds bounds;

    std::string cmf_path = "data/cie_1931_2deg_cmf.csv";
    std::string illuminant_path = "data/illuminant_d65.csv";
    std::string materials_dir = "materials";
    MixingRule mixing_rule = MixingRule::VolumeAverage;
    double grid_min_nm = 380, grid_max_nm = 780, grid_step_nm = 5;

    AgentConfig agent;

    std::uint64_t bruteforce_cap = 1000000;

    std::vector<double> wavelength_grid() const {
        std::vector<double> grid;
        for (double w = grid_min_nm; w <= grid_max_nm + 1e-9; w += grid_step_nm)
            grid.push_back(w);
        return grid;
    }
};

namespace detail {

inline ParamBounds parse_bounds(const nlohmann::json& j, ParamBounds fallback) {
    if (j.is_null()) return fallback;
    auto v = j.get<std::vector<int>>();
    if (v.size() != 3 || v[2] <= 0 || v[1] < v[0])
        throw std::invalid_argument("bounds must be [min, max, step] with step > 0 and max >= min");
    return {v[0], v[1], v[2]};
}

} // namespace detail

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;

    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);

    if (j.contains("target")) {
        const auto& t = j["target"];
        if (t.contains("lab")) {
            auto v = t["lab"].get<std::vector<double>>();
            if (v.size() != 3) throw std::invalid_argument("target.lab must have 3 components");
            c.target_lab = LabColor{v[0], v[1], v[2]};
            c.target_name = t.value("name", std::string("custom"));
        } else {
            c.target_name = t.value("name", c.target_name);
        }
    }

    if (j.contains("env")) {
        const auto& e = j["env"];
        const auto& b = e.contains("bounds") ? e["bounds"] : nlohmann::json::object();
        c.bounds.l = detail::parse_bounds(b.value("l", nlohmann::json()), c.bounds.l);
        c.bounds.d = detail::parse_bounds(b.value("d", nlohmann::json()), c.bounds.d);
        c.bounds.nt = detail::parse_bounds(b.value("nt", nlohmann::json()), c.bounds.nt);
        c.bounds.at = detail::parse_bounds(b.value("at", nlohmann::json()), c.bounds.at);
    }

    if (j.contains("optics")) {
        const auto& o = j["optics"];
        c.materials_dir = o.value("materials_dir", c.materials_dir);
        std::string rule = o.value("mixing_rule", std::string("volume-average"));
        if (rule == "volume-average") c.mixing_rule = MixingRule::VolumeAverage;
        else if (rule == "maxwell-garnett") c.mixing_rule = MixingRule::MaxwellGarnett;
        else throw std::invalid_argument("unknown mixing rule '" + rule + "'");
        if (o.contains("grid")) {
            c.grid_min_nm = o["grid"].value("min", c.grid_min_nm);
            c.grid_max_nm = o["grid"].value("max", c.grid_max_nm);
            c.grid_step_nm = o["grid"].value("step", c.grid_step_nm);
        }
    }

    if (j.contains("data")) {
        c.cmf_path = j["data"].value("cmf", c.cmf_path);
        c.illuminant_path = j["data"].value("illuminant", c.illuminant_path);
    }

    if (j.contains("agent")) {
        const auto& a = j["agent"];
        c.agent.gamma = a.value("gamma", c.agent.gamma);
        c.agent.tau = a.value("tau", c.agent.tau);
        c.agent.batch_size = a.value("batch_size", c.agent.batch_size);
        c.agent.replay_capacity = a.value("replay_capacity", c.agent.replay_capacity);
        c.agent.warmup = a.value("warmup", c.agent.warmup);
        c.agent.schedule.epsilon_start = a.value("epsilon_start", c.agent.schedule.epsilon_start);
        c.agent.schedule.epsilon_min = a.value("epsilon_min", c.agent.schedule.epsilon_min);
        c.agent.schedule.decay = a.value("epsilon_decay", c.agent.schedule.decay);
        c.agent.episodes = a.value("episodes", c.agent.episodes);
        c.agent.steps_per_episode = a.value("steps_per_episode", c.agent.steps_per_episode);
        c.agent.train.learning_rate = a.value("learning_rate", c.agent.train.learning_rate);
        c.agent.explore_fraction = a.value("explore_fraction", c.agent.explore_fraction);
        if (!(c.agent.explore_fraction >= 0.0 && c.agent.explore_fraction <= 1.0))
            throw std::invalid_argument("explore_fraction must lie in [0, 1]");
        if (a.contains("hidden"))
            c.agent.architecture.hidden = a["hidden"].get<std::vector<int>>();
        std::string act = a.value("activation", std::string("relu"));
        if (act == "relu") c.agent.architecture.activation = Activation::Relu;
        else if (act == "tanh") c.agent.architecture.activation = Activation::Tanh;
        else throw std::invalid_argument("unknown activation '" + act + "'");
        if (a.contains("fixed_start")) {
            auto v = a["fixed_start"].get<std::vector<int>>();
            if (v.size() != 4) throw std::invalid_argument("fixed_start must be [L, D, NT, AT]");
            c.agent.fixed_start = DesignState{v[0], v[1], v[2], v[3]};
        }
    }

    c.bruteforce_cap = j.value("bruteforce_cap", c.bruteforce_cap);
    return c;
}

// Resolve data paths relative to the config file's directory when they do not
// exist relative to the working directory.
inline std::string resolve_path(const std::string& path, const std::string& config_path) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    fs::path rel = fs::path(config_path).parent_path() / path;
    if (fs::exists(rel)) return rel.string();
    return path;
}

inline Environment make_environment(const RunConfig& c, const std::string& config_path = "") {
    auto open = [&](const std::string& p) {
        std::string resolved = config_path.empty() ? p : resolve_path(p, config_path);
        std::ifstream f(resolved);
        if (!f) throw std::runtime_error("cannot open data file: " + resolved);
        return f;
    };
    auto cmf_in = open(c.cmf_path);
    CmfTable cmf = load_cmf(cmf_in);
    auto ill_in = open(c.illuminant_path);
    IlluminantSpectrum illum = load_illuminant(ill_in);
    MaterialSet materials;
    auto si_in = open(c.materials_dir + "/si.nk");
    materials.silicon = load_dispersion(si_in, "si");
    auto sin_in = open(c.materials_dir + "/si3n4.nk");
    materials.nitride = load_dispersion(sin_in, "si3n4");

    TargetColor target = c.target_lab ? TargetColor{c.target_name, *c.target_lab}
                                      : named_target(c.target_name);
    return Environment(c.bounds, target, std::move(materials), std::move(cmf), std::move(illum),
                       c.wavelength_grid(), EffectiveLayerModel{c.mixing_rule});
}

} // namespace rlcolor
