#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slam/demand.hpp"
#include "slam/params.hpp"

namespace slam {

/// Headway-energy limit of mobile charging: f * ((P - 1) + eta) <= budget.
struct EnergyLimit {
    double budget = 0.0;      // delta+ / (delta- T^max)
    double efficiency = 1.0;  // eta
};

/// One instance of the (f, P) design problem. The core model, depot charging
/// and mobile charging differ only in cycle time, pod cost and the optional
/// energy limit.
struct DesignProblem {
    ServiceParameters service;
    double rho_max = 0.0;
    double phi_max = 0.0;
    double cycle_time = 0.0;  // t_c, h
    double pod_cost = 0.0;    // gamma or gamma_m
    std::optional<EnergyLimit> energy;

    double max_frequency() const { return 1.0 / service.min_feasible_headway(); }
    double min_frequency(double X) const { return X * phi_max / service.pod_capacity; }
    /// Frequency at which the link-load constraint binds with two pods.
    double capacity_kink(double X) const { return X * rho_max / service.pod_capacity; }
    /// Smallest pod count meeting the capacity and minimum-length constraints.
    double min_pods(double X, double f) const { return std::max(2.0, capacity_kink(X) / f + 1.0); }

    /// Energy bound on f with two pods (constant in X).
    double energy_bound_two_pods() const {
        return energy ? energy->budget / (1.0 + energy->efficiency) : std::numeric_limits<double>::infinity();
    }
    /// Energy bound on f with the capacity constraint tight (decreasing in X).
    double energy_bound_full(double X) const {
        return energy ? (energy->budget - capacity_kink(X)) / energy->efficiency
                      : std::numeric_limits<double>::infinity();
    }
    /// Upper end of the feasible frequency window.
    double frequency_ceiling(double X) const {
        return std::min({max_frequency(), energy_bound_two_pods(), energy_bound_full(X)});
    }

    /// First-order frequency with P = 2 fixed.
    double sqrt_frequency_two_pods(double X) const {
        return std::sqrt(service.wait_value * X / (4.0 * cycle_time * pod_cost));
    }
    /// First-order frequency with the capacity constraint tight.
    double sqrt_frequency_full(double X) const {
        return std::sqrt(service.wait_value * X / (2.0 * cycle_time * pod_cost));
    }
};

inline DesignProblem core_problem(const ServiceParameters& params, const DemandStatistics& stats) {
    params.validate();
    return DesignProblem{params, stats.rho_max, stats.phi_max, params.motion_time, params.pod_cost, std::nullopt};
}

struct Design {
    double f = 0.0;  // buses/h
    double P = 0.0;  // pods/bus, continuous
    StageLabel stage;
    double cost_user_wait = 0.0;
    double cost_user_invehicle = 0.0;
    double cost_operator = 0.0;
    double cost_total = 0.0;
    double avg_cost = 0.0;  // $/pax

    struct Integer {
        int pods = 2;
        double f = 0.0;
        double cost_total = 0.0;
    };
    std::optional<Integer> integer;  // best design with an integral pod count
};

struct Infeasibility {
    InfeasibleReason reason = InfeasibleReason::headway_window_empty;
    double threshold = 0.0;  // demand (pax/h) at which the window closes
    double margin = 0.0;     // lower frequency bound minus upper bound, buses/h
};

using Outcome = std::variant<Design, Infeasibility>;

inline bool is_feasible(const Outcome& o) { return std::holds_alternative<Design>(o); }
inline const Design& design_of(const Outcome& o) {
    if (auto d = std::get_if<Design>(&o)) return *d;
    throw std::logic_error("outcome is infeasible: " +
                           std::string(to_string(std::get<Infeasibility>(o).reason)));
}

/// Assumption-1 style test: is X * phi_max / K_P <= 1 / (2 K_P t + theta)?
struct FeasibilityCheck {
    bool ok = true;
    double threshold = 0.0;  // largest feasible X
    double margin = 0.0;     // X*phi/K - 1/(2K t + theta); positive when violated
};

inline FeasibilityCheck check_feasibility(const ServiceParameters& params, const DemandStatistics& stats, double X) {
    const double h = params.min_feasible_headway();
    FeasibilityCheck out;
    out.margin = X * stats.phi_max / params.pod_capacity - 1.0 / h;
    out.threshold = params.pod_capacity / (stats.phi_max * h);
    out.ok = out.margin <= 0.0;
    return out;
}

/// Objective value for an arbitrary (f, P). Constraints are not checked.
inline Design evaluate_cost(const ServiceParameters& params, double X, double f, double P, double cycleTime,
                            double podCost) {
    if (!(f > 0.0)) throw std::invalid_argument("frequency must be positive");
    if (!(P >= 2.0)) throw std::invalid_argument("a bus needs at least 2 pods");
    Design d;
    d.f = f;
    d.P = P;
    d.cost_user_wait = X > 0.0 ? params.wait_value * X / (2.0 * f) : 0.0;
    d.cost_user_invehicle = params.invehicle_value * params.trip_ratio * cycleTime * X;
    d.cost_operator = (f * cycleTime * P + params.stops) * podCost;
    d.cost_total = d.cost_user_wait + d.cost_user_invehicle + d.cost_operator;
    d.avg_cost = X > 0.0 ? d.cost_total / X : std::numeric_limits<double>::infinity();
    return d;
}

inline Design evaluate_cost(const DesignProblem& pb, double X, double f, double P) {
    return evaluate_cost(pb.service, X, f, P, pb.cycle_time, pb.pod_cost);
}

enum class Constraint { min_headway, max_headway, capacity, min_pods, headway_energy };

inline std::string_view to_string(Constraint c) {
    switch (c) {
        case Constraint::min_headway: return "min_headway";
        case Constraint::max_headway: return "max_headway";
        case Constraint::capacity: return "capacity";
        case Constraint::min_pods: return "min_pods";
        case Constraint::headway_energy: return "headway_energy";
    }
    return "unknown";
}

/// Every constraint that (f, P) violates, each tested on its own.
/// `relTol` loosens each inequality by a relative amount.
inline std::vector<Constraint> violated_constraints(const DesignProblem& pb, double X, double f, double P,
                                                    double relTol = 1e-9) {
    std::vector<Constraint> out;
    const auto& sp = pb.service;
    const double slack = 1.0 + relTol;
    if (1.0 / f * slack < sp.min_feasible_headway()) out.push_back(Constraint::min_headway);
    if (sp.pod_capacity * slack < X * pb.phi_max / f) out.push_back(Constraint::max_headway);
    if (P <= 1.0 || sp.pod_capacity * slack < X * pb.rho_max / (f * (P - 1.0))) out.push_back(Constraint::capacity);
    if (P * slack < 2.0) out.push_back(Constraint::min_pods);
    if (pb.energy) {
        const double eta = pb.energy->efficiency;
        if (f * ((P - 1.0) + eta) > pb.energy->budget * slack) out.push_back(Constraint::headway_energy);
    }
    return out;
}

namespace detail {

/// Demand at which mobile charging can no longer cover the non-boarding pods.
inline double energy_limit_demand(const DesignProblem& pb) {
    if (!pb.energy) return std::numeric_limits<double>::infinity();
    const double K = pb.service.pod_capacity;
    const double R = pb.energy->budget;
    const double eta = pb.energy->efficiency;
    const double capacityTight = K * R / (pb.rho_max + pb.phi_max * eta);
    const double twoPods = pb.phi_max > 0.0 ? K * R / (pb.phi_max * (1.0 + eta))
                                            : std::numeric_limits<double>::infinity();
    return std::min(capacityTight, twoPods);
}

inline std::optional<Infeasibility> infeasibility(const DesignProblem& pb, double X) {
    const double lo = pb.min_frequency(X);
    if (pb.energy) {
        const double limit = energy_limit_demand(pb);
        if (X >= limit) {
            const double hi = std::min(pb.energy_bound_two_pods(), pb.energy_bound_full(X));
            return Infeasibility{InfeasibleReason::energy_window_empty, limit, lo - hi};
        }
    }
    const double hi = pb.max_frequency();
    if (lo > hi) {
        const double limit = pb.service.pod_capacity / (pb.phi_max * pb.service.min_feasible_headway());
        return Infeasibility{InfeasibleReason::headway_window_empty, limit, lo - hi};
    }
    return std::nullopt;
}

enum class Regime { two_pods_sqrt, kink, full_sqrt };

/// Unconstrained minimiser of the cost in f once P is eliminated through
/// P*(f) = max{2, X rho/(f K) + 1}. The reduced cost is convex in f.
inline std::pair<double, Regime> unconstrained_frequency(const DesignProblem& pb, double X) {
    const double kink = pb.capacity_kink(X);
    const double f1 = pb.sqrt_frequency_two_pods(X);
    if (f1 >= kink) return {f1, Regime::two_pods_sqrt};
    const double f2 = pb.sqrt_frequency_full(X);
    if (f2 < kink) return {f2, Regime::full_sqrt};
    return {kink, Regime::kink};
}

inline std::optional<Design::Integer> integer_design(const DesignProblem& pb, double X, double P) {
    std::optional<Design::Integer> best;
    const int hiP = static_cast<int>(std::ceil(P - 1e-12));
    const int loP = std::max(2, static_cast<int>(std::floor(P + 1e-12)));
    for (int pods : {loP, hiP}) {
        if (pods < 2) continue;
        const double lo = std::max(pb.min_frequency(X), pb.capacity_kink(X) / (pods - 1.0));
        double hi = pb.max_frequency();
        if (pb.energy) hi = std::min(hi, pb.energy->budget / ((pods - 1.0) + pb.energy->efficiency));
        if (lo > hi) continue;
        const double interior = std::sqrt(pb.service.wait_value * X / (2.0 * pb.cycle_time * pods * pb.pod_cost));
        const double f = std::clamp(interior, lo, hi);
        if (!(f > 0.0)) continue;
        const double cost = evaluate_cost(pb, X, f, pods).cost_total;
        if (!best || cost < best->cost_total) best = Design::Integer{pods, f, cost};
    }
    return best;
}

}  // namespace detail

/// Operating stage at demand X, read off which bound is active in the closed
/// forms. Ties resolve to the lower-demand stage.
inline StageLabel classify(const DesignProblem& pb, double X) {
    if (auto inf = detail::infeasibility(pb, X)) return StageLabel::infeasible(inf->reason);
    const double lo = pb.min_frequency(X);
    const double ceiling = pb.frequency_ceiling(X);
    const auto [u, regime] = detail::unconstrained_frequency(pb, X);
    if (u > ceiling) {
        const double energyCap = std::min(pb.energy_bound_two_pods(), pb.energy_bound_full(X));
        return {pb.max_frequency() <= energyCap ? Stage::MFH : Stage::ELS, std::nullopt};
    }
    if (u < lo) return {pb.min_pods(X, lo) > 2.0 ? Stage::FLB2 : Stage::FSB, std::nullopt};
    switch (regime) {
        case detail::Regime::two_pods_sqrt: return {Stage::IC, std::nullopt};
        case detail::Regime::kink: return {Stage::FSB, std::nullopt};
        case detail::Regime::full_sqrt: return {Stage::FLB, std::nullopt};
    }
    return {Stage::IC, std::nullopt};
}

/// Closed-form optimum. Both case candidates are built from their formulas:
///   P = 2:       f = min{1/h, E2, max{sqrt(pi_w X / 4 t_c g), X max(rho,phi)/K}}
///   P tight:     f = min{1/h, E(X), max{sqrt(pi_w X / 2 t_c g), X phi/K}}
/// with E2, E(X) the energy bounds (infinite without an energy limit); the
/// cheaper feasible candidate wins.
inline Outcome optimize(const DesignProblem& pb, double X) {
    if (!(X > 0.0)) throw std::invalid_argument("demand must be positive");
    if (auto inf = detail::infeasibility(pb, X)) return *inf;

    const double K = pb.service.pod_capacity;
    const double fCap = pb.max_frequency();
    const double peakShare = std::max(pb.rho_max, pb.phi_max);

    const double fCase1 = std::min({fCap, pb.energy_bound_two_pods(),
                                    std::max(pb.sqrt_frequency_two_pods(X), X * peakShare / K)});
    const double fCase2 = std::min({fCap, pb.energy_bound_full(X),
                                    std::max(pb.sqrt_frequency_full(X), pb.min_frequency(X))});

    std::optional<Design> best;
    for (double f : {fCase1, fCase2}) {
        if (!(f > 0.0)) continue;
        const double P = pb.min_pods(X, f);
        if (!violated_constraints(pb, X, f, P).empty()) continue;
        Design d = evaluate_cost(pb, X, f, P);
        if (!best || d.cost_total < best->cost_total) best = d;
    }
    if (!best) throw std::logic_error("no feasible closed-form candidate at X=" + std::to_string(X));
    best->stage = classify(pb, X);
    best->integer = detail::integer_design(pb, X, best->P);
    return *best;
}

inline Outcome optimize_core(const ServiceParameters& params, const DemandStatistics& stats, double X) {
    return optimize(core_problem(params, stats), X);
}

struct StageBoundary {
    StageLabel from;
    StageLabel to;
    double X = 0.0;

    std::string name() const { return from.str() + "->" + to.str(); }
};

struct StageThresholds {
    std::vector<StageBoundary> boundaries;  // ascending in X
    std::vector<Stage> present;             // stages met while X grows, in order
    std::vector<Stage> absent;              // stages of the strategy's taxonomy never met
    double headway_limit = 0.0;             // largest X with a non-empty headway window
    std::optional<double> energy_limit;     // mobile only: start of charging infeasibility
    std::optional<double> energy_limited_onset;  // mobile only: X where E(X) meets 1/h

    std::optional<double> boundary(Stage from, Stage to) const {
        for (const auto& b : boundaries)
            if (b.from.stage == from && b.to.stage == to) return b.X;
        return std::nullopt;
    }
    bool has(Stage s) const { return std::find(present.begin(), present.end(), s) != present.end(); }
};

namespace detail {

/// Positive root X of sqrt(a X) = (R - b X) / eta.
inline double sqrt_meets_decreasing(double a, double R, double b, double eta) {
    const double ra = std::sqrt(a);
    const double s = (-eta * ra + std::sqrt(eta * eta * a + 4.0 * b * R)) / (2.0 * b);
    return s * s;
}

/// Every demand value at which some comparison inside `classify` can flip.
inline std::vector<double> candidate_breakpoints(const DesignProblem& pb) {
    const auto& sp = pb.service;
    const double K = sp.pod_capacity;
    const double h = sp.min_feasible_headway();
    const double a1 = sp.wait_value / (4.0 * pb.cycle_time * pb.pod_cost);
    const double a2 = sp.wait_value / (2.0 * pb.cycle_time * pb.pod_cost);
    const double rho = pb.rho_max;
    const double phi = pb.phi_max;
    std::vector<double> xs;
    for (double a : {a1, a2}) {
        xs.push_back(1.0 / (h * h * a));                  // sqrt term meets 1/h
        if (rho > 0) xs.push_back(a * K * K / (rho * rho));  // sqrt term meets X rho/K
        if (phi > 0) xs.push_back(a * K * K / (phi * phi));  // sqrt term meets X phi/K
    }
    if (rho > 0) xs.push_back(K / (rho * h));
    if (phi > 0) xs.push_back(K / (phi * h));
    if (pb.energy) {
        const double R = pb.energy->budget;
        const double eta = pb.energy->efficiency;
        const double e2 = R / (1.0 + eta);
        for (double a : {a1, a2}) {
            xs.push_back(e2 * e2 / a);
            if (rho > 0) xs.push_back(sqrt_meets_decreasing(a, R, rho / K, eta));
        }
        if (rho > 0) {
            xs.push_back(K * e2 / rho);
            xs.push_back(K * eta / rho * (R / eta - 1.0 / h));
        }
        if (phi > 0) xs.push_back(K * e2 / phi);
        xs.push_back(energy_limit_demand(pb));
    }
    std::vector<double> out;
    for (double x : xs)
        if (std::isfinite(x) && x > 0.0) out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }),
              out.end());
    return out;
}

}  // namespace detail

/// Demand thresholds where the optimal design changes stage. Each boundary is
/// an exact closed-form value; which ones are real is decided by classifying
/// the open intervals between them.
inline StageThresholds thresholds(const DesignProblem& pb) {
    StageThresholds out;
    const auto xs = detail::candidate_breakpoints(pb);
    out.headway_limit = pb.service.pod_capacity / (pb.phi_max * pb.service.min_feasible_headway());
    if (pb.energy) {
        out.energy_limit = detail::energy_limit_demand(pb);
        if (pb.rho_max > 0)
            out.energy_limited_onset = pb.service.pod_capacity * pb.energy->efficiency / pb.rho_max *
                                       (pb.energy->budget / pb.energy->efficiency - pb.max_frequency());
    }
    auto probe = [&](std::size_t i) {
        // label of the open interval left of xs[i] (i == xs.size(): right of the last one)
        if (xs.empty()) return classify(pb, 1.0);
        if (i == 0) return classify(pb, xs[0] * 0.5);
        if (i == xs.size()) return classify(pb, xs.back() * 2.0);
        return classify(pb, std::sqrt(xs[i - 1] * xs[i]));
    };
    StageLabel prev = probe(0);
    out.present.push_back(prev.stage);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const StageLabel next = probe(i + 1);
        if (!(next == prev)) {
            out.boundaries.push_back({prev, next, xs[i]});
            if (std::find(out.present.begin(), out.present.end(), next.stage) == out.present.end())
                out.present.push_back(next.stage);
        }
        prev = next;
    }
    std::vector<Stage> taxonomy{Stage::IC, Stage::FSB, Stage::FLB, Stage::FLB2, Stage::MFH};
    if (pb.energy) taxonomy.push_back(Stage::ELS);
    for (Stage s : taxonomy)
        if (!out.has(s)) out.absent.push_back(s);
    return out;
}

}  // namespace slam
