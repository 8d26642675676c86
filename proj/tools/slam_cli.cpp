#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "slam/baseline.hpp"
#include "slam/config.hpp"
#include "slam/oracle.hpp"
#include "slam/simulator.hpp"
#include "slam/strategy.hpp"
#include "slam/sweep.hpp"

namespace {

enum Exit { kOk = 0, kInvalid = 1, kInfeasible = 2, kIoError = 3, kGapExceeded = 4 };

using json = nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

std::string num(double v, const char* fmt = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

json design_json(const slam::Design& d) {
    json j{{"f", d.f},
           {"P", d.P},
           {"stage", d.stage.str()},
           {"cost_wait", d.cost_user_wait},
           {"cost_invehicle", d.cost_user_invehicle},
           {"cost_operator", d.cost_operator},
           {"cost_total", d.cost_total},
           {"avg_cost", d.avg_cost}};
    if (d.integer) j["integer"] = {{"P", d.integer->pods}, {"f", d.integer->f}, {"cost_total", d.integer->cost_total}};
    return j;
}

int cmd_optimize(const slam::Config& cfg, slam::Strategy strategy, double X, bool asJson) {
    if (!(X > 0.0)) {
        std::cerr << "error: demand must be positive\n";
        return kInvalid;
    }
    const slam::Outcome o = slam::optimize(strategy, cfg.service, cfg.stats, cfg.energy, X);
    if (const auto* inf = std::get_if<slam::Infeasibility>(&o)) {
        if (asJson) {
            std::cout << json{{"strategy", std::string(slam::to_string(strategy))},
                              {"demand", X},
                              {"feasible", false},
                              {"reason", std::string(slam::to_string(inf->reason))},
                              {"threshold", inf->threshold}}
                             .dump(2)
                      << '\n';
        } else {
            std::cout << "INFEASIBLE(" << slam::to_string(inf->reason) << ")\n"
                      << "threshold  " << num(inf->threshold) << " pax/h\n";
        }
        return kInfeasible;
    }
    const slam::Design& d = std::get<slam::Design>(o);
    if (asJson) {
        json j = design_json(d);
        j["strategy"] = std::string(slam::to_string(strategy));
        j["demand"] = X;
        j["feasible"] = true;
        std::cout << j.dump(2) << '\n';
        return kOk;
    }
    std::cout << "strategy   " << slam::to_string(strategy) << "\n"
              << "demand     " << num(X) << " pax/h\n"
              << "stage      " << d.stage.str() << "\n"
              << "f*         " << num(d.f) << " /h\n"
              << "P*         " << num(d.P) << "\n";
    if (d.integer)
        std::cout << "P_int      " << d.integer->pods << " (f " << num(d.integer->f) << " /h, cost "
                  << num(d.integer->cost_total) << " $/h)\n";
    std::cout << "cost_wait  " << num(d.cost_user_wait) << " $/h\n"
              << "cost_iv    " << num(d.cost_user_invehicle) << " $/h\n"
              << "cost_op    " << num(d.cost_operator) << " $/h\n"
              << "cost_total " << num(d.cost_total) << " $/h\n"
              << "avg_cost   " << num(d.avg_cost) << " $/pax\n";
    return kOk;
}

int cmd_sweep(const slam::Config& cfg, slam::Strategy strategy, double lo, double hi, int steps, bool logSpacing,
              const std::string& outPath) {
    const auto rows = slam::demand_sweep(cfg.service, cfg.stats, cfg.energy, strategy, lo, hi, steps,
                                         logSpacing ? slam::Spacing::log : slam::Spacing::linear);
    const auto boundaries = slam::detect_stage_boundaries(rows);
    if (outPath.empty() || outPath == "-") {
        slam::write_sweep_csv(rows, std::cout);
    } else {
        auto out = open_out(outPath);
        slam::write_sweep_csv(rows, out);
        close_out(out, outPath);
    }
    std::string summary = std::to_string(rows.size()) + " rows, " + std::to_string(boundaries.size()) + " boundaries";
    for (const auto& b : boundaries) summary += "; " + b.from.str() + "->" + b.to.str() + " at " + num(b.X);
    std::cerr << summary << '\n';
    return kOk;
}

int cmd_simulate(slam::Config cfg, slam::sim::ChargingStrategy strategy, std::optional<std::uint64_t> seed,
                 const std::string& eventsPath, const std::string& trajectoryPath, bool asJson) {
    auto& sc = cfg.sim;
    sc.strategy = strategy;
    if (seed) sc.seed = *seed;
    const auto log = slam::sim::run_simulation(sc);
    {
        auto out = open_out(eventsPath);
        slam::sim::write_events_csv(log, out);
        close_out(out, eventsPath);
    }
    {
        auto out = open_out(trajectoryPath);
        slam::sim::write_trajectory_csv(log, out);
        close_out(out, trajectoryPath);
    }
    const auto w = slam::sim::waiting_time_stats(log);
    const auto gaps = slam::sim::recharge_gaps(log);
    if (asJson) {
        std::cout << json{{"strategy", slam::sim::to_string(strategy)},
                          {"seed", sc.seed},
                          {"mean_wait_s", w.mean_s},
                          {"median_wait_s", w.median_s},
                          {"p95_wait_s", w.p95_s},
                          {"boarded", w.count},
                          {"not_boarded", w.not_boarded},
                          {"recharge_gaps", gaps.size()},
                          {"faults", log.faults}}
                         .dump(2)
                  << '\n';
        return kOk;
    }
    std::cout << "strategy " << slam::sim::to_string(strategy) << " seed " << sc.seed << ": boarded " << w.count
              << ", not boarded " << w.not_boarded << ", mean wait " << num(w.mean_s, "%.2f") << " s, median "
              << num(w.median_s, "%.2f") << " s, p95 " << num(w.p95_s, "%.2f") << " s, recharge gaps " << gaps.size()
              << ", faults " << log.faults << '\n';
    return kOk;
}

int cmd_validate(int n, std::uint64_t seed, std::optional<slam::Strategy> only) {
    if (n < 1) {
        std::cerr << "error: --n must be at least 1\n";
        return kInvalid;
    }
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    int compared = 0;
    for (slam::Strategy s : {slam::Strategy::core, slam::Strategy::depot, slam::Strategy::mobile}) {
        if (only && *only != s) continue;
        for (int i = 0; i < n; ++i) {
            const auto sc = slam::oracle::random_scenario(rng, s);
            const auto pb = slam::make_problem(s, sc.params, sc.stats, sc.energy);
            const auto o = slam::optimize(pb, sc.X);
            slam::oracle::GridOptions grid;
            grid.f_points = 2000;
            grid.p_points = 400;
            const auto best = slam::oracle::grid_search(pb, sc.X, grid);
            if (!slam::is_feasible(o) || !best.found()) continue;
            worst = std::max(worst, slam::oracle::compare(std::get<slam::Design>(o), best).cost_gap_rel);
            ++compared;
        }
    }
    std::cout << "max cost gap " << num(100.0 * worst, "%.2f") << "% over " << compared << " configs\n";
    return worst > 0.005 ? kGapExceeded : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stop-less modular bus design, sweeps and simulation"};
    app.require_subcommand(1);
    std::string configPath;
    app.add_option("--config", configPath, "config file (falls back to $SLAM_CONFIG, then built-in defaults)");

    std::string strategyText = "core";
    double demand = -1.0;
    bool asJson = false;
    auto* optimize = app.add_subcommand("optimize", "optimal design at one demand level");
    optimize->add_option("--strategy", strategyText)->check(CLI::IsMember({"core", "depot", "mobile"}));
    optimize->add_option("--demand", demand, "pax/h (default: config demand)");
    optimize->add_flag("--json", asJson);

    double from = 50.0, to = 5000.0;
    int steps = 500;
    bool logSpacing = false;
    std::string outPath;
    auto* sweep = app.add_subcommand("sweep", "demand sweep to CSV");
    sweep->add_option("--strategy", strategyText)->check(CLI::IsMember({"core", "depot", "mobile"}));
    sweep->add_option("--from", from);
    sweep->add_option("--to", to);
    sweep->add_option("--steps", steps);
    sweep->add_flag("--log", logSpacing, "log-spaced demand grid");
    sweep->add_option("--out", outPath, "CSV path (default stdout)");

    std::string simStrategy = "depot";
    std::optional<std::uint64_t> seed;
    std::string eventsPath = "events.csv", trajectoryPath = "trajectory.csv";
    auto* simulate = app.add_subcommand("simulate", "discrete-event run to CSV");
    simulate->add_option("--strategy", simStrategy)->check(CLI::IsMember({"depot", "mobile"}));
    simulate->add_option("--seed", seed);
    simulate->add_option("--events", eventsPath);
    simulate->add_option("--trajectory", trajectoryPath);
    simulate->add_flag("--json", asJson);

    int nConfigs = 100;
    std::uint64_t validateSeed = 7;
    std::string validateStrategy;
    auto* validate = app.add_subcommand("validate", "closed forms against grid search");
    validate->add_option("--n", nConfigs, "random configs per strategy");
    validate->add_option("--seed", validateSeed);
    validate->add_option("--strategy", validateStrategy)->check(CLI::IsMember({"core", "depot", "mobile"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInvalid;
    }

    try {
        if (*validate)
            return cmd_validate(nConfigs, validateSeed,
                                validateStrategy.empty() ? std::nullopt : slam::parse_strategy(validateStrategy));

        const slam::Config cfg =
            slam::resolve_config(configPath.empty() ? std::nullopt : std::optional<std::string>(configPath));
        const slam::Strategy strategy = *slam::parse_strategy(strategyText);
        if (*optimize) return cmd_optimize(cfg, strategy, demand < 0.0 && !optimize->count("--demand") ? cfg.demand : demand, asJson);
        if (*sweep) return cmd_sweep(cfg, strategy, from, to, steps, logSpacing, outPath);
        if (*simulate)
            return cmd_simulate(cfg,
                                simStrategy == "mobile" ? slam::sim::ChargingStrategy::mobile
                                                        : slam::sim::ChargingStrategy::depot,
                                seed, eventsPath, trajectoryPath, asJson);
    } catch (const slam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kInvalid;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
    return kOk;
}
