#pragma once

#include "slam/charging.hpp"
#include "slam/core_design.hpp"

namespace slam {

inline DesignProblem make_problem(Strategy strategy, const ServiceParameters& params, const DemandStatistics& stats,
                                  const EnergyParameters& energy = {}) {
    switch (strategy) {
        case Strategy::core: return core_problem(params, stats);
        case Strategy::depot: return depot_problem(params, stats, energy);
        case Strategy::mobile: return mobile_problem(params, stats, energy);
    }
    throw std::invalid_argument("unknown strategy");
}

inline Outcome optimize(Strategy strategy, const ServiceParameters& params, const DemandStatistics& stats,
                        const EnergyParameters& energy, double X) {
    return optimize(make_problem(strategy, params, stats, energy), X);
}

inline StageLabel classify_stage(const ServiceParameters& params, const DemandStatistics& stats, double X,
                                 Strategy strategy, const EnergyParameters& energy = {}) {
    if (!(X > 0.0)) throw std::invalid_argument("demand must be positive");
    return classify(make_problem(strategy, params, stats, energy), X);
}

inline StageThresholds stage_thresholds(const ServiceParameters& params, const DemandStatistics& stats,
                                        Strategy strategy, const EnergyParameters& energy = {}) {
    return thresholds(make_problem(strategy, params, stats, energy));
}

}  // namespace slam
