#pragma once

#include <cmath>
#include <stdexcept>

namespace slam {

/// Conventional single-line bus: fleet cost F * (gamma0 + gamma1 K), cycle
/// time T + t X / f, demand spread evenly along the line.
struct TraditionalParameters {
    double fixed_bus_cost = 8.04;       // gamma0, $/bus-h
    double seat_cost = 8.04 / 32.0;     // gamma1, $/seat-h (illustrative default)
    double motion_time = 0.4;           // T, h
    double boarding_time = 3.0 / 3600;  // t, h/pax
    double wait_value = 4.44;           // pi_w
    double invehicle_value = 1.48;      // pi_v
    double trip_ratio = 0.4;            // l/L
    double demand = 1000.0;             // X, pax/h

    void validate() const {
        if (!(fixed_bus_cost > 0 && seat_cost > 0 && motion_time > 0 && boarding_time > 0 && wait_value > 0 &&
              invehicle_value > 0 && trip_ratio > 0 && demand > 0))
            throw std::invalid_argument("traditional parameters must be positive");
    }
};

struct TraditionalDesign {
    double f = 0.0;           // buses/h
    double capacity = 0.0;    // K, pax/bus
    double cycle_time = 0.0;  // T + t X / f
    double cost_user_wait = 0.0;
    double cost_user_invehicle = 0.0;
    double cost_operator = 0.0;
    double cost_total = 0.0;
};

/// Objective at an arbitrary (f, K); used by the optimiser and its cross-checks.
inline TraditionalDesign evaluate_traditional(const TraditionalParameters& tp, double f, double K) {
    TraditionalDesign d;
    d.f = f;
    d.capacity = K;
    const double X = tp.demand;
    d.cycle_time = tp.motion_time + tp.boarding_time * X / f;
    d.cost_user_wait = tp.wait_value * X / (2.0 * f);
    d.cost_user_invehicle = tp.invehicle_value * tp.trip_ratio * d.cycle_time * X;
    d.cost_operator = f * d.cycle_time * (tp.fixed_bus_cost + tp.seat_cost * K);
    d.cost_total = d.cost_user_wait + d.cost_user_invehicle + d.cost_operator;
    return d;
}

/// First-order optimum with the load constraint K >= X l / (f L) binding.
inline TraditionalDesign optimize_traditional(const TraditionalParameters& tp) {
    tp.validate();
    const double X = tp.demand;
    const double r = tp.trip_ratio;
    const double numerator = X * tp.wait_value / 2.0 + tp.invehicle_value * r * tp.boarding_time * X * X +
                             tp.boarding_time * tp.seat_cost * r * X * X;
    const double f = std::sqrt(numerator / (tp.motion_time * tp.fixed_bus_cost));
    return evaluate_traditional(tp, f, X * r / f);
}

/// Limit of K* as demand grows without bound, consistent with optimize_traditional.
inline double traditional_capacity_limit(const TraditionalParameters& tp) {
    const double r = tp.trip_ratio;
    return r * std::sqrt(tp.motion_time * tp.fixed_bus_cost /
                         (tp.invehicle_value * r * tp.boarding_time + tp.boarding_time * tp.seat_cost * r));
}

}  // namespace slam
