// Command-line front end: train the design agent, evaluate a single
// geometry, run the exhaustive brute-force sweep, or run the built-in
// validation suites.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rlcolor/config.hpp"
#include "rlcolor/run_io.hpp"

namespace fs = std::filesystem;
using namespace rlcolor;

namespace {

RunConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return RunConfig{};
    return load_config(config_path);
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_override) {
    RunConfig cfg = load_or_default(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_override.empty()) cfg.output_dir = out_override;
    Environment env = make_environment(cfg, config_path);

    auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    Trainer trainer(env, cfg.agent, cfg.seed);
    try {
        trainer.run_to_end();
    } catch (const std::exception& e) {
        // keep partial logs on abort
        fs::create_directories(cfg.output_dir);
        std::ofstream log(fs::path(cfg.output_dir) / "run_log.jsonl");
        write_run_log(log, trainer.report().records);
        std::cerr << "training aborted: " << e.what() << "\n";
        return 1;
    }
    report = trainer.report();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(cfg.output_dir);
    {
        std::ofstream log(fs::path(cfg.output_dir) / "run_log.jsonl");
        write_run_log(log, report.records);
    }
    {
        std::ofstream plot(fs::path(cfg.output_dir) / "plot_data.tsv");
        write_plot_data(plot, report.records);
    }
    {
        std::ofstream spec(fs::path(cfg.output_dir) / "best_spectrum.tsv");
        write_spectrum(spec, env.simulate(report.best_state));
    }
    ResultSummary summary{report.best_state, report.best_lab, report.best_delta_e,
                          env.evaluate(report.best_state).reward, report.records.size(), secs};
    {
        std::ofstream sum(fs::path(cfg.output_dir) / "summary.txt");
        write_summary(sum, summary);
    }
    std::cout << "best state: L=" << report.best_state.l_nm << " D=" << report.best_state.d_nm
              << " NT=" << report.best_state.nt_nm << " AT=" << report.best_state.at_nm
              << "  delta_e=" << report.best_delta_e << "  (" << secs << " s)\n";
    return 0;
}

int cmd_evaluate(const std::string& config_path, int L, int D, int NT, int AT,
                 const std::string& out_override) {
    RunConfig cfg = load_or_default(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    Environment env = make_environment(cfg, config_path);
    DesignState s{L, D, NT, AT};
    Evaluation ev = env.evaluate(s); // validates the lattice
    std::cout << "state:   L=" << L << " D=" << D << " NT=" << NT << " AT=" << AT << "\n"
              << "lab:     (" << ev.lab.l << ", " << ev.lab.a << ", " << ev.lab.b << ")\n"
              << "target:  " << env.target().name << " (" << env.target().lab.l << ", "
              << env.target().lab.a << ", " << env.target().lab.b << ")\n"
              << "delta_e: " << ev.delta_e << "\n"
              << "reward:  " << ev.reward << "\n";
    fs::create_directories(cfg.output_dir);
    std::ofstream spec(fs::path(cfg.output_dir) / "spectrum.tsv");
    write_spectrum(spec, env.simulate(s));
    return 0;
}

int cmd_bruteforce(const std::string& config_path, int step_override,
                   const std::string& out_override) {
    RunConfig cfg = load_or_default(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (step_override > 0) {
        auto widen = [step_override](ParamBounds& b) {
            b.step_nm = step_override;
            b.max_nm = b.min_nm + (b.max_nm - b.min_nm) / step_override * step_override;
        };
        widen(cfg.bounds.l);
        widen(cfg.bounds.d);
        widen(cfg.bounds.nt);
        widen(cfg.bounds.at);
    }
    Environment env = make_environment(cfg, config_path);
    auto t0 = std::chrono::steady_clock::now();
    BruteForceResult res = brute_force(env, cfg.bruteforce_cap);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(cfg.output_dir);
    ResultSummary summary{res.best_state, res.best.lab, res.best.delta_e, res.best.reward,
                          res.evaluated, secs};
    std::ofstream sum(fs::path(cfg.output_dir) / "bruteforce_summary.txt");
    write_summary(sum, summary);
    std::cout << "evaluated " << res.evaluated << " states in " << secs << " s\n"
              << "optimum: L=" << res.best_state.l_nm << " D=" << res.best_state.d_nm
              << " NT=" << res.best_state.nt_nm << " AT=" << res.best_state.at_nm
              << "  delta_e=" << res.best.delta_e << "\n";
    return 0;
}

int validate_colors(const std::string& config_path) {
    RunConfig cfg = load_or_default(config_path);
    std::string path = config_path.empty() ? "data/ciede2000_test_pairs.csv"
                                           : resolve_path("data/ciede2000_test_pairs.csv", config_path);
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open " << path << "\n";
        return 1;
    }
    int pass = 0, fail = 0, row = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        double v[7];
        for (double& x : v)
            if (!(ls >> x)) {
                std::cerr << "malformed fixture row\n";
                return 1;
            }
        ++row;
        double got = ciede2000({v[0], v[1], v[2]}, {v[3], v[4], v[5]});
        if (std::fabs(got - v[6]) <= 1e-4) {
            ++pass;
        } else {
            ++fail;
            std::cerr << "pair " << row << ": expected " << v[6] << ", got " << got << "\n";
        }
    }
    std::cout << "colors: " << pass << " passed, " << fail << " failed\n";
    (void)cfg;
    return fail == 0 && pass > 0 ? 0 : 1;
}

int validate_optics() {
    int pass = 0, fail = 0;
    auto check = [&](const char* name, bool ok) {
        (ok ? pass : fail)++;
        if (!ok) std::cerr << "optics check failed: " << name << "\n";
    };
    LayerStack bare{{1, 0}, {}, {4, 0}};
    check("fresnel", std::fabs(tmm_reflectance(bare, 550.0) - 0.36) < 1e-12);
    LayerStack quarter{{1, 0}, {{{2, 0}, 550.0 / 8.0}}, {4, 0}};
    check("quarter-wave AR", tmm_reflectance(quarter, 550.0) < 1e-10);
    LayerStack half{{1, 0}, {{{3.17, 0}, 550.0 / (2.0 * 3.17)}}, {4, 0}};
    check("half-wave absentee", std::fabs(tmm_reflectance(half, 550.0) - 0.36) < 1e-9);
    std::cout << "optics: " << pass << " passed, " << fail << " failed\n";
    return fail == 0 ? 0 : 1;
}

int validate_gradients() {
    NetworkArchitecture arch;
    arch.hidden = {16};
    double max_rel = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        NetworkParams p = init_params(arch, seed);
        Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
        std::vector<QSample> batch;
        for (int i = 0; i < 8; ++i) {
            std::vector<double> x(4);
            for (double& v : x) v = uniform01(rng);
            batch.push_back({x, int(uniform_index(rng, 9)), 2.0 * uniform01(rng) - 1.0});
        }
        auto [g, loss] = gradient(p, batch);
        (void)loss;
        const double h = 1e-5;
        for (std::size_t l = 0; l < p.weights.size(); ++l)
            for (std::size_t i = 0; i < p.weights[l].size(); i += 7) {
                NetworkParams pp = p, pm = p;
                pp.weights[l][i] += h;
                pm.weights[l][i] -= h;
                double fd = (batch_loss(pp, batch) - batch_loss(pm, batch)) / (2 * h);
                double denom = std::max({std::fabs(fd), std::fabs(g.weights[l][i]), 1e-8});
                max_rel = std::max(max_rel, std::fabs(fd - g.weights[l][i]) / denom);
            }
    }
    std::cout << "gradients: max relative error " << max_rel << "\n";
    return max_rel < 1e-4 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reinforcement-learning design of Si-nanodisk colour filters"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file (JSON)");
        sub->add_option("--out", out_dir, "output directory override");
    };

    auto* train = app.add_subcommand("train", "run the training schedule");
    add_common(train);
    std::uint64_t seed_val = 0;
    auto* seed_opt = train->add_option("--seed", seed_val, "seed override");

    auto* eval = app.add_subcommand("evaluate", "evaluate one geometry");
    add_common(eval);
    int L = 50, D = 190, NT = 185, AT = 200;
    eval->add_option("--L", L, "disk spacing, nm")->required();
    eval->add_option("--D", D, "disk diameter, nm")->required();
    eval->add_option("--NT", NT, "disk thickness, nm")->required();
    eval->add_option("--AT", AT, "antireflective layer thickness, nm")->required();

    auto* brute = app.add_subcommand("bruteforce", "exhaustive lattice sweep");
    add_common(brute);
    int step_override = 0;
    brute->add_option("--step", step_override, "coarse step override, nm");

    auto* validate = app.add_subcommand("validate", "run a validation suite");
    add_common(validate);
    std::string suite;
    validate->add_option("suite", suite, "colors | optics | gradients | all")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            if (seed_opt->count()) seed = seed_val;
            return cmd_train(config_path, seed, out_dir);
        }
        if (*eval) return cmd_evaluate(config_path, L, D, NT, AT, out_dir);
        if (*brute) return cmd_bruteforce(config_path, step_override, out_dir);
        if (*validate) {
            int rc = 0;
            if (suite == "colors" || suite == "all") rc |= validate_colors(config_path);
            if (suite == "optics" || suite == "all") rc |= validate_optics();
            if (suite == "gradients" || suite == "all") rc |= validate_gradients();
            if (suite != "colors" && suite != "optics" && suite != "gradients" && suite != "all") {
                std::cerr << "unknown suite '" << suite << "'\n";
                return 2;
            }
            return rc;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
