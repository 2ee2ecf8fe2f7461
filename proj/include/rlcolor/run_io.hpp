#pragma once

// Run artifacts: line-delimited JSON step log, tab-separated plot data and
// spectrum files, and a structured-text result summary. All writers are
// deterministic; no timestamps appear in data files.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlcolor/agent.hpp"
#include "rlcolor/env.hpp"

namespace rlcolor {

inline nlohmann::json record_to_json(const StepRecord& r) {
    nlohmann::json j{{"episode", r.episode},
                     {"step", r.step},
                     {"L", r.state.l_nm},
                     {"D", r.state.d_nm},
                     {"NT", r.state.nt_nm},
                     {"AT", r.state.at_nm},
                     {"action", r.action},
                     {"epsilon", r.epsilon},
                     {"reward", r.reward},
                     {"delta_e", r.delta_e}};
    j["loss"] = r.loss ? nlohmann::json(*r.loss) : nlohmann::json();
    return j;
}

inline void write_run_log(std::ostream& out, const std::vector<StepRecord>& records) {
    for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

inline std::vector<StepRecord> read_run_log(std::istream& in) {
    std::vector<StepRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        StepRecord r;
        r.episode = j.at("episode").get<int>();
        r.step = j.at("step").get<int>();
        r.state = {j.at("L").get<int>(), j.at("D").get<int>(), j.at("NT").get<int>(),
                   j.at("AT").get<int>()};
        r.action = j.at("action").get<int>();
        r.epsilon = j.at("epsilon").get<double>();
        r.reward = j.at("reward").get<double>();
        r.delta_e = j.at("delta_e").get<double>();
        if (!j.at("loss").is_null()) r.loss = j.at("loss").get<double>();
        records.push_back(r);
    }
    return records;
}

inline void write_plot_data(std::ostream& out, const std::vector<StepRecord>& records) {
    out << "global_step\tepisode\tstep\tdelta_e\treward\tepsilon\tloss\n";
    std::size_t g = 0;
    out << std::setprecision(17);
    for (const auto& r : records) {
        out << g++ << "\t" << r.episode << "\t" << r.step << "\t" << r.delta_e << "\t" << r.reward
            << "\t" << r.epsilon << "\t";
        if (r.loss) out << *r.loss;
        else out << "nan";
        out << "\n";
    }
}

inline void write_spectrum(std::ostream& out, const Spectrum& spec) {
    out << "wavelength_nm\treflectance\n" << std::setprecision(17);
    for (std::size_t i = 0; i < spec.wavelengths_nm.size(); ++i)
        out << spec.wavelengths_nm[i] << "\t" << spec.reflectance[i] << "\n";
}

struct ResultSummary {
    DesignState best_state{};
    LabColor best_lab{};
    double best_delta_e = 0;
    double best_reward = 0;
    std::uint64_t total_steps = 0;
    double wall_seconds = 0;
};

inline void write_summary(std::ostream& out, const ResultSummary& s) {
    out << std::setprecision(17);
    out << "best_state_L_nm = " << s.best_state.l_nm << "\n"
        << "best_state_D_nm = " << s.best_state.d_nm << "\n"
        << "best_state_NT_nm = " << s.best_state.nt_nm << "\n"
        << "best_state_AT_nm = " << s.best_state.at_nm << "\n"
        << "best_lab_L = " << s.best_lab.l << "\n"
        << "best_lab_a = " << s.best_lab.a << "\n"
        << "best_lab_b = " << s.best_lab.b << "\n"
        << "best_delta_e = " << s.best_delta_e << "\n"
        << "best_reward = " << s.best_reward << "\n"
        << "total_steps = " << s.total_steps << "\n";
}

struct BruteForceResult {
    DesignState best_state{};
    Evaluation best{};
    std::uint64_t evaluated = 0;
};

// Exhaustive sweep of the bounds lattice; the acceptance oracle.
inline BruteForceResult brute_force(const Environment& env, std::uint64_t cap) {
    const EnvBounds& b = env.bounds();
    std::uint64_t n = state_space_size(b);
    if (n > cap)
        throw std::runtime_error("lattice has " + std::to_string(n) + " states, above the cap of " +
                                 std::to_string(cap) + "; use a coarser step");
    BruteForceResult res;
    res.best.delta_e = std::numeric_limits<double>::infinity();
    for (int l = b.l.min_nm; l <= b.l.max_nm; l += b.l.step_nm)
        for (int d = b.d.min_nm; d <= b.d.max_nm; d += b.d.step_nm)
            for (int nt = b.nt.min_nm; nt <= b.nt.max_nm; nt += b.nt.step_nm)
                for (int at = b.at.min_nm; at <= b.at.max_nm; at += b.at.step_nm) {
                    DesignState s{l, d, nt, at};
                    Evaluation ev = env.evaluate(s);
                    ++res.evaluated;
                    if (ev.delta_e < res.best.delta_e) {
                        res.best = ev;
                        res.best_state = s;
                    }
                }
    return res;
}

} // namespace rlcolor
