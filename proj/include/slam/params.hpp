#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace slam {

// All internal quantities: time in hours, money in $/h, demand in pax/h.
inline constexpr double kSecondsPerHour = 3600.0;

constexpr double seconds_to_hours(double s) { return s / kSecondsPerHour; }
constexpr double hours_to_seconds(double h) { return h * kSecondsPerHour; }

/// Line geometry, pod capacity, boarding time, swap time and cost constants
/// of a stop-less modular line.
struct ServiceParameters {
    double pod_capacity = 16.0;                       // K_P, pax per pod
    double boarding_time = seconds_to_hours(3.0);     // t, h per boarding/alighting pax
    double swap_time = seconds_to_hours(10.0);        // theta, h to detach/move/reattach
    double motion_time = 0.4;                         // T, h in motion per cycle
    int stops = 20;                                   // S
    double pod_cost = 8.04;                           // gamma, $/pod-h
    double wait_value = 4.44;                         // pi_w, $/pax-h
    double invehicle_value = 1.48;                    // pi_v, $/pax-h
    double trip_ratio = 0.4;                          // l/L

    /// 2*K_P*t + theta, the shortest headway that lets a boarding pod finish.
    double min_feasible_headway() const { return 2.0 * pod_capacity * boarding_time + swap_time; }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
        };
        positive(pod_capacity, "pod_capacity");
        positive(boarding_time, "boarding_time");
        positive(swap_time, "swap_time");
        positive(motion_time, "motion_time");
        if (stops < 2) throw std::invalid_argument("stops must be at least 2");
        positive(pod_cost, "pod_cost");
        positive(wait_value, "wait_value");
        positive(invehicle_value, "invehicle_value");
        if (!(trip_ratio > 0.0 && trip_ratio <= 1.0))
            throw std::invalid_argument("trip_ratio must lie in (0, 1]");
    }
};

/// Battery and charging constants shared by the depot and mobile strategies.
struct EnergyParameters {
    double charge_rate = 160.0;        // delta+, kW
    double discharge_rate = 40.0;      // delta-, kW
    double efficiency = 0.9627;        // eta, fraction of supplied energy stored
    double battery_hours = 8.0;        // B, hours of travel per full battery
    double max_segment_time = 0.02;    // T^max_{s-1,s}, h
    double mobile_pod_cost = 8.21;     // gamma_m, $/pod-h

    /// delta+ / (delta- * T^max): the energy budget that bounds f*((P-1) + eta).
    double energy_budget() const { return charge_rate / (discharge_rate * max_segment_time); }

    /// Depot recharge time per cycle, T*delta-/(eta*delta+).
    double depot_charge_time(double motion_time) const {
        return motion_time * discharge_rate / (efficiency * charge_rate);
    }

    void validate() const {
        if (!(discharge_rate > 0.0)) throw std::invalid_argument("discharge_rate must be positive");
        if (!(charge_rate >= discharge_rate))
            throw std::invalid_argument("charge_rate must be at least discharge_rate");
        if (!(efficiency > 0.0 && efficiency <= 1.0))
            throw std::invalid_argument("efficiency must lie in (0, 1]");
        if (!(battery_hours > 0.0)) throw std::invalid_argument("battery_hours must be positive");
        if (!(max_segment_time > 0.0)) throw std::invalid_argument("max_segment_time must be positive");
        if (!(mobile_pod_cost > 0.0)) throw std::invalid_argument("mobile_pod_cost must be positive");
    }
};

enum class Strategy { core, depot, mobile };

inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::core: return "core";
        case Strategy::depot: return "depot";
        case Strategy::mobile: return "mobile";
    }
    return "unknown";
}

inline std::optional<Strategy> parse_strategy(std::string_view text) {
    if (text == "core") return Strategy::core;
    if (text == "depot") return Strategy::depot;
    if (text == "mobile") return Strategy::mobile;
    return std::nullopt;
}

enum class Stage { IC, FSB, FLB, FLB2, MFH, ELS, Infeasible };

enum class InfeasibleReason { headway_window_empty, energy_window_empty };

inline std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::IC: return "IC";
        case Stage::FSB: return "FSB";
        case Stage::FLB: return "FLB";
        case Stage::FLB2: return "FLB2";
        case Stage::MFH: return "MFH";
        case Stage::ELS: return "ELS";
        case Stage::Infeasible: return "INFEASIBLE";
    }
    return "unknown";
}

inline std::string_view to_string(InfeasibleReason r) {
    switch (r) {
        case InfeasibleReason::headway_window_empty: return "headway_window_empty";
        case InfeasibleReason::energy_window_empty: return "energy_window_empty";
    }
    return "unknown";
}

/// Operating stage of a design. An infeasible label carries exactly one reason.
struct StageLabel {
    Stage stage = Stage::IC;
    std::optional<InfeasibleReason> reason;

    static StageLabel infeasible(InfeasibleReason r) { return {Stage::Infeasible, r}; }
    bool feasible() const { return stage != Stage::Infeasible; }
    bool operator==(const StageLabel&) const = default;

    std::string str() const {
        if (stage == Stage::Infeasible && reason)
            return std::string(to_string(stage)) + "(" + std::string(to_string(*reason)) + ")";
        return std::string(to_string(stage));
    }
};

}  // namespace slam
