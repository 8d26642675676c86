#pragma once

#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slam/baseline.hpp"
#include "slam/demand.hpp"
#include "slam/params.hpp"
#include "slam/simulator.hpp"

namespace slam {

// Flat `key = value` configuration. Blank lines and `#` comments are ignored.
// Times carry their unit in the key name; everything is converted to hours on
// load. Keys under `sim.` configure the simulator.

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct Config {
    ServiceParameters service;
    EnergyParameters energy;
    DemandStatistics stats = DemandStatistics::from_shares(0.4, 0.1);
    TraditionalParameters traditional;
    sim::SimConfig sim;
    double demand = 1000.0;              // default X for optimize
    std::optional<std::string> od_file;  // replaces rho_max/phi_max when given
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + text + "'");
    }
    if (used != text.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
    return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
    const double v = parse_number(key, text);
    if (v != static_cast<int>(v)) throw ConfigError(key, "expected an integer, got '" + text + "'");
    return static_cast<int>(v);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number(key, item));
    }
    return out;
}

}  // namespace detail

/// Reads a config stream on top of the built-in defaults. `baseDir` resolves
/// a relative od_file path.
inline Config parse_config(std::istream& in, const std::string& baseDir = "") {
    using namespace detail;
    Config c;
    std::optional<double> rho, phi, tripRatio;
    std::optional<double> spacingKm, speed;

    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto num = [](double& target) -> Setter {
        return [&target](const std::string& k, const std::string& v) { target = parse_number(k, v); };
    };
    auto sec = [](double& target) -> Setter {
        return [&target](const std::string& k, const std::string& v) { target = seconds_to_hours(parse_number(k, v)); };
    };
    auto opt = [](std::optional<double>& target) -> Setter {
        return [&target](const std::string& k, const std::string& v) { target = parse_number(k, v); };
    };
    auto& s = c.service;
    auto& e = c.energy;
    auto& tp = c.traditional;
    auto& sm = c.sim;
    const std::map<std::string, Setter> setters{
        {"pod_capacity", num(s.pod_capacity)},
        {"boarding_time_s", sec(s.boarding_time)},
        {"swap_time_s", sec(s.swap_time)},
        {"motion_time_h", num(s.motion_time)},
        {"stops", [&](const std::string& k, const std::string& v) { s.stops = parse_int(k, v); }},
        {"stop_spacing_km", opt(spacingKm)},
        {"speed_kmh", opt(speed)},
        {"pod_cost", num(s.pod_cost)},
        {"wait_value", num(s.wait_value)},
        {"invehicle_value", num(s.invehicle_value)},
        {"trip_ratio", opt(tripRatio)},
        {"rho_max", opt(rho)},
        {"phi_max", opt(phi)},
        {"od_file", [&](const std::string&, const std::string& v) { c.od_file = v; }},
        {"demand", num(c.demand)},
        {"charge_rate_kw", num(e.charge_rate)},
        {"discharge_rate_kw", num(e.discharge_rate)},
        {"efficiency", num(e.efficiency)},
        {"battery_hours", num(e.battery_hours)},
        {"max_segment_time_h", num(e.max_segment_time)},
        {"mobile_pod_cost", num(e.mobile_pod_cost)},
        {"fixed_bus_cost", num(tp.fixed_bus_cost)},
        {"seat_cost", num(tp.seat_cost)},
        {"sim.n_buses", [&](const std::string& k, const std::string& v) { sm.n_buses = parse_int(k, v); }},
        {"sim.n_stops", [&](const std::string& k, const std::string& v) { sm.n_stops = parse_int(k, v); }},
        {"sim.full_stops",
         [&](const std::string& k, const std::string& v) {
             sm.full_stops.clear();
             for (double x : parse_list(k, v)) {
                 if (x != static_cast<int>(x)) throw ConfigError(k, "stop indices must be integers");
                 sm.full_stops.insert(static_cast<int>(x));
             }
         }},
        {"sim.horizon_h", num(sm.horizon_h)},
        {"sim.arrival_rates", [&](const std::string& k, const std::string& v) { sm.arrival_rates = parse_list(k, v); }},
        {"sim.pods_per_bus", [&](const std::string& k, const std::string& v) { sm.pods_per_bus = parse_int(k, v); }},
        {"sim.battery_kwh", num(sm.battery_kwh)},
        {"sim.stop_spacing_m", num(sm.stop_spacing_m)},
        {"sim.speed_kmh", num(sm.speed_kmh)},
        {"sim.recharge_margin", num(sm.recharge_margin)},
        {"sim.mobile_initial_soc", num(sm.mobile_initial_soc)},
        {"sim.seed",
         [&](const std::string& k, const std::string& v) {
             try {
                 std::size_t used = 0;
                 sm.seed = std::stoull(v, &used);
                 if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
             } catch (const std::exception&) {
                 throw ConfigError(k, "expected a non-negative integer, got '" + v + "'");
             }
         }},
    };

    std::set<std::string> seen;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineNo) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(key, "unknown key (line " + std::to_string(lineNo) + ")");
        if (!seen.insert(key).second) throw ConfigError(key, "given twice");
        if (value.empty()) throw ConfigError(key, "missing value");
        it->second(key, value);
    }

    if (spacingKm || speed) {
        if (!(spacingKm && speed)) throw ConfigError("speed_kmh", "stop_spacing_km and speed_kmh go together");
        if (seen.count("motion_time_h")) throw ConfigError("motion_time_h", "conflicts with stop_spacing_km/speed_kmh");
        if (!(*spacingKm > 0.0 && *speed > 0.0)) throw ConfigError("speed_kmh", "must be positive");
        s.motion_time = s.stops * *spacingKm / *speed;
    }

    if (c.od_file) {
        if (rho || phi) throw ConfigError("od_file", "conflicts with rho_max/phi_max");
        std::string path = *c.od_file;
        if (!path.empty() && path.front() != '/' && !baseDir.empty()) path = baseDir + "/" + path;
        try {
            const ODMatrix od = load_od_csv(path);
            c.stats = compute_statistics(od);
            if (!tripRatio) tripRatio = mean_trip_ratio(od);
            if (od.stops() != s.stops) throw ConfigError("od_file", "matrix size does not match stops");
        } catch (const DemandError& err) {
            throw ConfigError("od_file", err.what());
        }
    } else {
        c.stats = DemandStatistics::from_shares(rho.value_or(0.4), phi.value_or(0.1));
    }
    s.trip_ratio = tripRatio.value_or(0.4);

    auto check = [](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& err) {
            throw ConfigError(field, err.what());
        }
    };
    check("service", [&] { s.validate(); });
    check("energy", [&] { e.validate(); });
    if (!(c.stats.rho_max > 0.0 && c.stats.rho_max <= 1.0)) throw ConfigError("rho_max", "must lie in (0, 1]");
    if (!(c.stats.phi_max >= 0.0 && c.stats.phi_max <= 1.0)) throw ConfigError("phi_max", "must lie in [0, 1]");
    if (!(c.demand > 0.0)) throw ConfigError("demand", "must be positive");

    // derived blocks follow the shared constants
    tp.motion_time = s.motion_time;
    tp.boarding_time = s.boarding_time;
    tp.wait_value = s.wait_value;
    tp.invehicle_value = s.invehicle_value;
    tp.trip_ratio = s.trip_ratio;
    tp.demand = c.demand;
    check("traditional", [&] { tp.validate(); });
    sm.service = s;
    sm.energy = e;
    check("sim", [&] { sm.validate(); });
    return c;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file " + path);
    const auto slash = path.find_last_of('/');
    return parse_config(in, slash == std::string::npos ? "" : path.substr(0, slash));
}

/// Explicit path, then $SLAM_CONFIG, then built-in defaults.
inline Config resolve_config(const std::optional<std::string>& path) {
    if (path && !path->empty()) return load_config(*path);
    if (const char* env = std::getenv("SLAM_CONFIG"); env && *env) return load_config(env);
    std::istringstream empty;
    return parse_config(empty);
}

}  // namespace slam
