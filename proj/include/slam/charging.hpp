#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "slam/core_design.hpp"

namespace slam {

/// Cycle time under depot charging: motion time plus the recharge time per cycle.
inline double depot_cycle_time(const ServiceParameters& params, const EnergyParameters& energy) {
    return params.motion_time + energy.depot_charge_time(params.motion_time);
}

/// Depot charging only lengthens the cycle; pod cost and constraints are the core ones.
inline DesignProblem depot_problem(const ServiceParameters& params, const DemandStatistics& stats,
                                   const EnergyParameters& energy) {
    params.validate();
    energy.validate();
    return DesignProblem{params, stats.rho_max, stats.phi_max, depot_cycle_time(params, energy), params.pod_cost,
                         std::nullopt};
}

/// Mobile (V2V) charging keeps t_c = T, pays gamma_m per pod and adds the
/// headway-energy constraint on the longest segment.
inline DesignProblem mobile_problem(const ServiceParameters& params, const DemandStatistics& stats,
                                    const EnergyParameters& energy) {
    params.validate();
    energy.validate();
    return DesignProblem{params,
                         stats.rho_max,
                         stats.phi_max,
                         params.motion_time,
                         energy.mobile_pod_cost,
                         EnergyLimit{energy.energy_budget(), energy.efficiency}};
}

inline Outcome optimize_depot(const ServiceParameters& params, const DemandStatistics& stats,
                              const EnergyParameters& energy, double X) {
    return optimize(depot_problem(params, stats, energy), X);
}

inline Outcome optimize_mobile(const ServiceParameters& params, const DemandStatistics& stats,
                               const EnergyParameters& energy, double X) {
    return optimize(mobile_problem(params, stats, energy), X);
}

/// Largest frequency the charging pod can sustain with P pods per bus:
/// 1/f >= ((P-1)/eta + 1) * delta- * T^max * eta / delta+.
inline double mobile_headway_energy_bound(const EnergyParameters& energy, double P) {
    if (!(P >= 2.0)) throw std::invalid_argument("a bus needs at least 2 pods");
    const double eta = energy.efficiency;
    return energy.charge_rate /
           (eta * energy.discharge_rate * energy.max_segment_time * ((P - 1.0) / eta + 1.0));
}

/// Battery level of the charging pod at departure from each stop.
struct BatteryTrace {
    std::vector<double> levels;    // kWh, levels[0] is the initial level
    std::vector<double> delta_E;   // kWh, delta_E[k] = levels[k+1] - levels[k]
    std::optional<int> first_negative;  // index into levels of the first level below zero
};

/// Net change of the charging pod over one segment plus one headway of dwell:
/// -delta- T_seg - (P-1) delta- T_seg / eta + delta+ / (f eta).
/// The dwell term divides by eta as written in the model; a receiving-side
/// loss would multiply by eta instead.
inline double charging_pod_delta(const EnergyParameters& energy, double segmentTime, double f, double P) {
    const double eta = energy.efficiency;
    const double move = energy.discharge_rate * segmentTime;
    return -move - (P - 1.0) * move / eta + energy.charge_rate / (f * eta);
}

/// Applies the per-stop battery recursion over `laps` passes of the segment list.
/// An empty segment list falls back to S segments of T^max.
inline BatteryTrace battery_trajectory(const EnergyParameters& energy, const ServiceParameters& params, double f,
                                       double P, double initialKwh, int laps,
                                       const std::vector<double>& segmentTimes = {}) {
    if (!(f > 0.0)) throw std::invalid_argument("frequency must be positive");
    if (!(P >= 2.0)) throw std::invalid_argument("a bus needs at least 2 pods");
    std::vector<double> segs = segmentTimes;
    if (segs.empty()) segs.assign(static_cast<std::size_t>(params.stops), energy.max_segment_time);
    BatteryTrace trace;
    trace.levels.push_back(initialKwh);
    if (initialKwh < 0.0) trace.first_negative = 0;
    for (int lap = 0; lap < laps; ++lap) {
        for (double seg : segs) {
            const double dE = charging_pod_delta(energy, seg, f, P);
            trace.delta_E.push_back(dE);
            trace.levels.push_back(trace.levels.back() + dE);
            if (trace.levels.back() < 0.0 && !trace.first_negative)
                trace.first_negative = static_cast<int>(trace.levels.size()) - 1;
        }
    }
    return trace;
}

}  // namespace slam
