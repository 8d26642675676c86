#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "slam/strategy.hpp"

namespace slam::oracle {

// Brute-force ground truth for the closed forms: exhaustive constrained grid
// search over (f, P). Nothing here reuses the optimiser's case analysis.

enum Violation : unsigned {
    kMinHeadway = 1u << 0,     // 1/f >= 2 K_P t + theta
    kMaxHeadway = 1u << 1,     // K_P >= X phi / f
    kCapacity = 1u << 2,       // K_P >= X rho / (f (P - 1))
    kMinPods = 1u << 3,        // P >= 2
    kHeadwayEnergy = 1u << 4,  // 1/f >= ((P-1)/eta + 1) delta- T^max eta / delta+
};

inline unsigned violation_mask(const DesignProblem& pb, double X, double f, double P) {
    const auto& sp = pb.service;
    unsigned mask = 0;
    if (1.0 / f < 2.0 * sp.pod_capacity * sp.boarding_time + sp.swap_time) mask |= kMinHeadway;
    if (sp.pod_capacity < X * pb.phi_max / f) mask |= kMaxHeadway;
    if (!(P > 1.0) || sp.pod_capacity < X * pb.rho_max / (f * (P - 1.0))) mask |= kCapacity;
    if (P < 2.0) mask |= kMinPods;
    if (pb.energy) {
        const double eta = pb.energy->efficiency;
        // budget = delta+ / (delta- T^max)
        if (1.0 / f < ((P - 1.0) / eta + 1.0) * eta / pb.energy->budget) mask |= kHeadwayEnergy;
    }
    return mask;
}

inline std::vector<Constraint> violations(const DesignProblem& pb, double X, double f, double P) {
    const unsigned mask = violation_mask(pb, X, f, P);
    std::vector<Constraint> out;
    if (mask & kMinHeadway) out.push_back(Constraint::min_headway);
    if (mask & kMaxHeadway) out.push_back(Constraint::max_headway);
    if (mask & kCapacity) out.push_back(Constraint::capacity);
    if (mask & kMinPods) out.push_back(Constraint::min_pods);
    if (mask & kHeadwayEnergy) out.push_back(Constraint::headway_energy);
    return out;
}

enum class PodMode { continuous, integer };

struct GridOptions {
    int f_points = 10000;
    int p_points = 1000;  // continuous mode only
    PodMode pod_mode = PodMode::continuous;
    std::optional<double> p_hi;
    std::vector<double> f_grid;  // explicit grid; overrides f_points when non-empty
    unsigned threads = 0;        // 0: hardware concurrency
};

struct Result {
    enum class Status { found, infeasible, unresolved } status = Status::unresolved;
    double f = 0.0;
    double P = 0.0;
    double cost = std::numeric_limits<double>::infinity();
    std::optional<InfeasibleReason> reason;  // set when status == infeasible

    bool found() const { return status == Status::found; }
};

/// Geometric frequency grid on [max(eps, X phi / (2 K_P)), 1/(2 K_P t + theta)].
inline std::vector<double> default_frequency_grid(const DesignProblem& pb, double X, int points) {
    if (points < 2) throw std::invalid_argument("frequency grid needs at least 2 points");
    const double lo = std::max(1e-6, 0.5 * X * pb.phi_max / pb.service.pod_capacity);
    double hi = 1.0 / pb.service.min_feasible_headway();
    if (hi <= lo) hi = 2.0 * lo;
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double ratio = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) grid[i] = lo * std::exp(ratio * i);
    grid.back() = hi;
    return grid;
}

inline double default_pod_ceiling(const DesignProblem& pb, double X, double fLo) {
    return std::max(8.0, 2.0 * (X * pb.rho_max / (fLo * pb.service.pod_capacity) + 1.0));
}

namespace detail {

inline double objective(const DesignProblem& pb, double X, double f, double P) {
    const auto& sp = pb.service;
    return (sp.wait_value / (2.0 * f) + sp.invehicle_value * sp.trip_ratio * pb.cycle_time) * X +
           (f * pb.cycle_time * P + sp.stops) * pb.pod_cost;
}

struct Best {
    double cost = std::numeric_limits<double>::infinity();
    std::size_t fi = 0;
    std::size_t pi = 0;
    bool any = false;

    // deterministic: lower cost wins, ties go to the lower grid index
    void offer(double c, std::size_t f, std::size_t p) {
        if (!any || c < cost || (c == cost && (f < fi || (f == fi && p < pi)))) {
            cost = c;
            fi = f;
            pi = p;
            any = true;
        }
    }
};

}  // namespace detail

/// Feasible grid point of minimum cost. Reports `infeasible` only when no grid
/// point is feasible and the analytic window check agrees; a feasible problem
/// whose window the grid misses is `unresolved`.
inline Result grid_search(const DesignProblem& pb, double X, const GridOptions& opt = {}) {
    const std::vector<double> fGrid =
        opt.f_grid.empty() ? default_frequency_grid(pb, X, opt.f_points) : opt.f_grid;
    if (fGrid.empty()) throw std::invalid_argument("empty frequency grid");
    const double fLo = *std::min_element(fGrid.begin(), fGrid.end());
    const double pHi = opt.p_hi.value_or(default_pod_ceiling(pb, X, fLo));

    std::vector<double> pGrid;
    if (opt.pod_mode == PodMode::integer) {
        for (int p = 2; p <= static_cast<int>(std::floor(pHi)); ++p) pGrid.push_back(p);
    } else {
        if (opt.p_points < 2) throw std::invalid_argument("pod grid needs at least 2 points");
        for (int i = 0; i < opt.p_points; ++i) pGrid.push_back(2.0 + (pHi - 2.0) * i / (opt.p_points - 1));
    }
    if (pGrid.empty()) throw std::invalid_argument("empty pod grid");

    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(fGrid.size()));
    std::vector<detail::Best> partial(threads);
    auto scan = [&](unsigned worker) {
        const std::size_t n = fGrid.size();
        const std::size_t begin = n * worker / threads;
        const std::size_t end = n * (worker + 1) / threads;
        auto& best = partial[worker];
        for (std::size_t i = begin; i < end; ++i) {
            const double f = fGrid[i];
            for (std::size_t j = 0; j < pGrid.size(); ++j) {
                const double P = pGrid[j];
                if (violation_mask(pb, X, f, P) != 0) continue;
                best.offer(detail::objective(pb, X, f, P), i, j);
            }
        }
    };
    if (threads == 1) {
        scan(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(scan, w);
        for (auto& t : pool) t.join();
    }
    detail::Best best;
    for (const auto& b : partial)
        if (b.any) best.offer(b.cost, b.fi, b.pi);

    Result out;
    if (best.any) {
        out.status = Result::Status::found;
        out.f = fGrid[best.fi];
        out.P = pGrid[best.pi];
        out.cost = best.cost;
        return out;
    }
    const Outcome analytic = optimize(pb, X);
    if (const auto* inf = std::get_if<Infeasibility>(&analytic)) {
        out.status = Result::Status::infeasible;
        out.reason = inf->reason;
    }
    return out;
}

inline Result grid_search(const ServiceParameters& params, const DemandStatistics& stats,
                          const EnergyParameters& energy, double X, Strategy strategy,
                          const GridOptions& opt = {}) {
    return grid_search(make_problem(strategy, params, stats, energy), X, opt);
}

struct Comparison {
    double cost_gap_rel = 0.0;  // (closed - oracle) / oracle; negative means the closed form is cheaper
    double f_gap = 0.0;         // closed - oracle
    double P_gap = 0.0;
};

inline Comparison compare(const Design& closedForm, const Result& oracleBest) {
    if (!oracleBest.found()) throw std::invalid_argument("oracle found no feasible design to compare against");
    return {(closedForm.cost_total - oracleBest.cost) / oracleBest.cost, closedForm.f - oracleBest.f,
            closedForm.P - oracleBest.P};
}

/// A randomised but physically plausible problem instance.
struct Scenario {
    ServiceParameters params;
    DemandStatistics stats;
    EnergyParameters energy;
    double X = 0.0;
};

/// Draws parameters around the reference line. With `feasibleOnly` the demand
/// stays below 95% of every feasibility limit; otherwise about one draw in
/// five lands beyond a limit.
inline Scenario random_scenario(std::mt19937_64& rng, Strategy strategy, bool feasibleOnly = true) {
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    Scenario sc;
    auto& p = sc.params;
    p.pod_capacity = std::round(uni(8, 30));
    p.boarding_time = seconds_to_hours(uni(1.5, 5.0));
    p.swap_time = seconds_to_hours(uni(2.0, 30.0));
    p.motion_time = uni(0.2, 1.0);
    p.stops = static_cast<int>(std::round(uni(10, 40)));
    p.pod_cost = uni(4.0, 15.0);
    p.wait_value = uni(2.0, 10.0);
    p.invehicle_value = uni(0.5, 3.0);
    p.trip_ratio = uni(0.2, 0.8);
    const double rho = uni(0.15, 0.6);
    const double phi = uni(0.0, 1.0) < 0.85 ? uni(0.03, rho) : uni(rho, 0.6);
    sc.stats = DemandStatistics::from_shares(rho, phi);
    auto& e = sc.energy;
    e.discharge_rate = uni(20, 60);
    e.charge_rate = uni(e.discharge_rate, 300);
    e.efficiency = uni(0.85, 1.0);
    e.max_segment_time = uni(0.005, 0.04);
    e.mobile_pod_cost = p.pod_cost * uni(1.01, 1.1);

    const DesignProblem pb = make_problem(strategy, p, sc.stats, e);
    double limit = p.pod_capacity / (phi * p.min_feasible_headway());
    if (pb.energy) limit = std::min(limit, slam::detail::energy_limit_demand(pb));
    if (!feasibleOnly && uni(0.0, 1.0) < 0.2) {
        sc.X = uni(1.001 * limit, 1.5 * limit);
        return sc;
    }
    const double hi = 0.95 * limit;
    const double lo = std::min(20.0, 0.5 * hi);
    sc.X = std::exp(uni(std::log(lo), std::log(hi)));
    return sc;
}

}  // namespace slam::oracle
