#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "slam/params.hpp"

namespace slam::sim {

// Discrete-event model of a stop-less modular loop.
//
// Geometry: stops 1..n sit D metres apart on a loop; the terminal (and depot
// charger) is at stop 1, position 0. Buses move at constant speed and only
// halt at full stops and, under depot charging, at the terminal to recharge.
// At every other stop the front pod detaches carrying the alighting
// passengers and the standby pod waiting at the stop attaches in its place.
// The swap itself is compressed into theta: the detached pod reaches the
// platform theta/2 after the pass and the standby pod leaves it theta/2
// before the next bus passes.
//
// Passenger trips are one-directional within a lap (destination downstream of
// origin). A passenger's board time is the moment they leave the stop aboard
// a bus: the attach at swap stops, the bus departure at full stops.

enum class ChargingStrategy { depot, mobile };

inline const char* to_string(ChargingStrategy s) { return s == ChargingStrategy::depot ? "depot" : "mobile"; }

struct SimConfig {
    ServiceParameters service;  // pod capacity, boarding time and swap time are used
    EnergyParameters energy;    // charge/discharge rates and efficiency are used
    ChargingStrategy strategy = ChargingStrategy::depot;
    int n_buses = 3;
    int n_stops = 9;
    std::set<int> full_stops{1, 5};
    double horizon_h = 3.0;
    std::vector<double> arrival_rates{120, 30, 30, 30, 120, 30, 30, 30, 0};  // pax/h per stop
    // destination_weights[i][j]: relative weight of trips from stop i+1 to stop j+1;
    // only downstream destinations are used. Empty means uniform over downstream stops.
    std::vector<std::vector<double>> destination_weights;
    int pods_per_bus = 4;
    double battery_kwh = 320.0;    // whole-bus pack; split evenly across pods under mobile charging
    double stop_spacing_m = 225.0;
    double speed_kmh = 20.0;
    double recharge_margin = 1.05;  // recharge when remaining energy < margin * one lap
    double mobile_initial_soc = 0.5;
    std::uint64_t seed = 1;

    double segment_hours() const { return stop_spacing_m / 1000.0 / speed_kmh; }
    double lap_hours() const { return segment_hours() * n_stops; }
    double lap_length_m() const { return stop_spacing_m * n_stops; }
    double position_of(int stop) const { return (stop - 1) * stop_spacing_m; }
    bool is_full_stop(int stop) const { return full_stops.count(stop) > 0; }

    void validate() const {
        if (n_buses < 1) throw std::invalid_argument("n_buses must be at least 1");
        if (n_stops < 2) throw std::invalid_argument("n_stops must be at least 2");
        for (int s : full_stops)
            if (s < 1 || s > n_stops) throw std::invalid_argument("full stop " + std::to_string(s) + " is not a stop");
        if (!(horizon_h > 0.0)) throw std::invalid_argument("horizon must be positive");
        if (static_cast<int>(arrival_rates.size()) != n_stops)
            throw std::invalid_argument("arrival_rates needs one entry per stop");
        for (double r : arrival_rates)
            if (!(r >= 0.0)) throw std::invalid_argument("arrival rates must be non-negative");
        if (!destination_weights.empty() && static_cast<int>(destination_weights.size()) != n_stops)
            throw std::invalid_argument("destination_weights needs one row per stop");
        if (pods_per_bus < 2) throw std::invalid_argument("a bus needs at least 2 pods");
        if (!(battery_kwh > 0.0)) throw std::invalid_argument("battery_kwh must be positive");
        if (!(stop_spacing_m > 0.0) || !(speed_kmh > 0.0))
            throw std::invalid_argument("stop spacing and speed must be positive");
        if (!(recharge_margin >= 1.0)) throw std::invalid_argument("recharge_margin must be at least 1");
        if (!(mobile_initial_soc >= 0.0 && mobile_initial_soc <= 1.0))
            throw std::invalid_argument("mobile_initial_soc must lie in [0, 1]");
        if (service.swap_time / 2.0 > segment_hours())
            throw std::invalid_argument("half the swap time must fit within one segment");
        if (recharge_margin * lap_energy_kwh() > battery_kwh)
            throw std::invalid_argument("battery cannot cover one lap plus margin");
    }

    /// Whole-bus consumption for one lap: every pod draws delta- while moving.
    double lap_energy_kwh() const { return pods_per_bus * energy.discharge_rate * lap_hours(); }
};

enum class EventKind {
    bus_arrive,
    bus_depart,
    pod_detach,
    pod_attach,
    board,
    alight,
    recharge_start,
    recharge_end,
    fault,
};

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::bus_arrive: return "bus_arrive";
        case EventKind::bus_depart: return "bus_depart";
        case EventKind::pod_detach: return "pod_detach";
        case EventKind::pod_attach: return "pod_attach";
        case EventKind::board: return "board";
        case EventKind::alight: return "alight";
        case EventKind::recharge_start: return "recharge_start";
        case EventKind::recharge_end: return "recharge_end";
        case EventKind::fault: return "fault";
    }
    return "unknown";
}

struct LogEvent {
    double time_s = 0.0;
    EventKind kind = EventKind::fault;
    int bus = -1;
    int pod = -1;
    int stop = -1;
    int pax = -1;
    std::string detail;
};

struct PassengerRecord {
    int id = 0;
    int origin = 0;
    int destination = 0;
    double arrival_s = 0.0;
    double board_s = std::numeric_limits<double>::quiet_NaN();
    double alight_s = std::numeric_limits<double>::quiet_NaN();
    int bus = -1;

    bool boarded() const { return !std::isnan(board_s); }
    bool alighted() const { return !std::isnan(alight_s); }
};

/// Charging-pod battery at one departure from a stop.
struct ChargeRecord {
    double time_s = 0.0;
    int pod = -1;
    int bus = -1;
    int stop = -1;
    double level_kwh = 0.0;
    double previous_kwh = 0.0;  // level at this pod's previous departure
    double segment_h = 0.0;     // time in motion since that departure
    double dwell_h = 0.0;       // time charging at a stop since that departure
    bool clamped = false;       // recharge stopped at a full battery
};

/// Bus occupancy as it leaves a stop, split the way the pods would carry it.
struct LoadSnapshot {
    double time_s = 0.0;
    int bus = -1;
    int stop = -1;
    int onboard = 0;
    int alight_next = 0;     // riders for the next stop, gathered in the front pod
    bool next_is_full = false;
    int standby_load = 0;    // riders in the pod that just attached (swap stops)
};

struct EventLog {
    SimConfig config;
    std::vector<LogEvent> events;  // sorted by time, stable in processing order
    std::vector<PassengerRecord> passengers;
    std::vector<ChargeRecord> charges;  // mobile only
    std::vector<LoadSnapshot> loads;
    std::vector<double> bus_energy_kwh;  // depot only: remaining energy at horizon
    double min_bus_energy_kwh = 0.0;     // depot only: lowest level reached by any bus
    int faults = 0;
};

namespace detail {

enum class Ev {
    pax_arrival,
    pod_open,
    pod_serve,
    approach,
    bus_arrive,
    recharge_done,
    bus_serve,
};

struct Pending {
    double t;
    int order;  // same-time priority
    std::uint64_t seq;
    Ev type;
    int a;  // bus, stop or passenger
    int b;  // stop or session

    bool operator>(const Pending& o) const {
        if (t != o.t) return t > o.t;
        if (order != o.order) return order > o.order;
        return seq > o.seq;
    }
};

struct Pod {
    double battery = 0.0;
    double dwell_since = 0.0;   // when it was left at a stop; charging runs until the next attach
    double moved_h = 0.0;       // motion since last departure record
    double dwell_h = 0.0;       // charging since last departure record
    double last_record = 0.0;   // level at last departure record
};

struct Bus {
    int front_pod = -1;
    std::vector<int> onboard;  // passenger ids
    std::vector<int> by_destination;
    std::vector<int> boarding_now;  // boarded during the current full-stop halt
    int standby_load = 0;
    double energy = 0.0;
    int laps = 0;
    int stop = 1;
};

struct StopState {
    std::deque<int> queue;  // waiting passengers, arrival order
    int standby_pod = -1;
    std::vector<int> in_pod;  // passengers seated in the standby pod
    int session = 0;
    bool open = false;
    bool serving = false;
    bool closed = false;
    double ready_at = 0.0;  // when alighting from the standby pod is done
};

class Engine {
public:
    explicit Engine(const SimConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        log_.config = cfg_;
        K_ = static_cast<int>(cfg_.service.pod_capacity);
        P_ = cfg_.pods_per_bus;
        seg_s_ = hours_to_seconds(cfg_.segment_hours());
        lap_s_ = seg_s_ * cfg_.n_stops;
        horizon_s_ = hours_to_seconds(cfg_.horizon_h);
        theta_s_ = hours_to_seconds(cfg_.service.swap_time);
        t_s_ = hours_to_seconds(cfg_.service.boarding_time);
        pod_cap_ = cfg_.battery_kwh / P_;
    }

    EventLog run() {
        setup();
        generate_passengers();
        while (!agenda_.empty()) {
            const Pending ev = agenda_.top();
            if (ev.t > horizon_s_) break;
            agenda_.pop();
            dispatch(ev);
        }
        finish();
        return std::move(log_);
    }

private:
    void push(double t, Ev type, int a, int b = 0) {
        static constexpr int kOrder[] = {0, 1, 2, 3, 4, 5, 6};
        agenda_.push({t, kOrder[static_cast<int>(type)], seq_++, type, a, b});
    }

    void emit(double t, EventKind k, int bus, int pod, int stop, int pax, std::string detail = {}) {
        log_.events.push_back({t, k, bus, pod, stop, pax, std::move(detail)});
    }

    void fault(double t, int bus, int stop, const std::string& what) {
        ++log_.faults;
        emit(t, EventKind::fault, bus, -1, stop, -1, what);
    }

    int new_pod(double battery) {
        Pod p;
        p.battery = battery;
        p.last_record = battery;
        pods_.push_back(p);
        return static_cast<int>(pods_.size()) - 1;
    }

    void setup() {
        const double initial = cfg_.mobile_initial_soc * pod_cap_;
        log_.min_bus_energy_kwh = cfg_.battery_kwh;
        buses_.resize(cfg_.n_buses);
        for (int b = 0; b < cfg_.n_buses; ++b) {
            Bus& bus = buses_[b];
            bus.by_destination.assign(cfg_.n_stops + 1, 0);
            bus.energy = cfg_.battery_kwh;
            for (int k = 0; k < P_ - 1; ++k) new_pod(initial);  // non-boarding pods
            bus.front_pod = new_pod(initial);
            // buses enter service at stop 1, evenly spaced over one lap
            push(b * lap_s_ / cfg_.n_buses, Ev::bus_arrive, b, 1);
        }
        stops_.resize(cfg_.n_stops + 1);
        for (int s = 1; s <= cfg_.n_stops; ++s) {
            if (cfg_.is_full_stop(s)) continue;
            StopState& st = stops_[s];
            st.standby_pod = new_pod(initial);
            pods_[st.standby_pod].dwell_since = 0.0;
            st.open = true;
        }
    }

    void generate_passengers() {
        std::mt19937_64 rng(cfg_.seed);
        for (int s = 1; s <= cfg_.n_stops; ++s) {
            const double rate = cfg_.arrival_rates[s - 1];
            std::vector<double> weights(cfg_.n_stops, 0.0);
            double totalWeight = 0.0;
            for (int d = s + 1; d <= cfg_.n_stops; ++d) {
                weights[d - 1] = cfg_.destination_weights.empty() ? 1.0 : cfg_.destination_weights[s - 1][d - 1];
                totalWeight += weights[d - 1];
            }
            if (!(rate > 0.0) || !(totalWeight > 0.0)) continue;
            std::exponential_distribution<double> gap(rate / kSecondsPerHour);
            std::discrete_distribution<int> dest(weights.begin(), weights.end());
            for (double t = gap(rng); t <= horizon_s_; t += gap(rng)) {
                PassengerRecord p;
                p.id = static_cast<int>(log_.passengers.size());
                p.origin = s;
                p.destination = dest(rng) + 1;
                p.arrival_s = t;
                log_.passengers.push_back(p);
            }
        }
        std::stable_sort(log_.passengers.begin(), log_.passengers.end(),
                         [](const PassengerRecord& a, const PassengerRecord& b) { return a.arrival_s < b.arrival_s; });
        for (std::size_t i = 0; i < log_.passengers.size(); ++i) {
            log_.passengers[i].id = static_cast<int>(i);
            push(log_.passengers[i].arrival_s, Ev::pax_arrival, static_cast<int>(i));
        }
    }

    void dispatch(const Pending& ev) {
        switch (ev.type) {
            case Ev::pax_arrival: on_pax_arrival(ev.t, ev.a); break;
            case Ev::pod_open: on_pod_open(ev.t, ev.a, ev.b); break;
            case Ev::pod_serve: on_pod_serve(ev.t, ev.a, ev.b); break;
            case Ev::approach: on_approach(ev.t, ev.a, ev.b); break;
            case Ev::bus_arrive: on_bus_arrive(ev.t, ev.a, ev.b); break;
            case Ev::recharge_done: on_recharge_done(ev.t, ev.a); break;
            case Ev::bus_serve: on_bus_serve(ev.t, ev.a, ev.b); break;
        }
    }

    // -- passengers and standby pods ---------------------------------------

    void on_pax_arrival(double t, int id) {
        const int s = log_.passengers[id].origin;
        StopState& st = stops_[s];
        st.queue.push_back(id);
        if (!cfg_.is_full_stop(s) && st.open && !st.closed && !st.serving) {
            st.serving = true;
            push(t, Ev::pod_serve, s, st.session);
        }
    }

    void on_pod_open(double t, int s, int session) {
        StopState& st = stops_[s];
        if (session != st.session || st.closed) return;
        st.open = true;
        if (!st.serving) {
            st.serving = true;
            push(t, Ev::pod_serve, s, st.session);
        }
    }

    // one passenger steps into the standby pod per boarding time
    void on_pod_serve(double t, int s, int session) {
        StopState& st = stops_[s];
        if (session != st.session || st.closed || !st.open) {
            st.serving = false;
            return;
        }
        if (st.queue.empty() || static_cast<int>(st.in_pod.size()) >= K_) {
            st.serving = false;
            return;
        }
        st.in_pod.push_back(st.queue.front());
        st.queue.pop_front();
        push(t + t_s_, Ev::pod_serve, s, st.session);
    }

    void on_approach(double t, int bus, int s) {
        StopState& st = stops_[s];
        if (st.ready_at > t) fault(t, bus, s, "pod_late");
        st.closed = true;
        st.open = false;
    }

    // -- buses ---------------------------------------------------------------

    void on_bus_arrive(double t, int b, int s) {
        Bus& bus = buses_[b];
        bus.stop = s;
        const bool lapDone = s == 1 && bus.laps > 0;
        emit(t, EventKind::bus_arrive, b, bus.front_pod, s, -1, lapDone ? "lap" : "");
        if (cfg_.strategy == ChargingStrategy::depot && s == 1 && bus.laps > 0 &&
            bus.energy < cfg_.recharge_margin * cfg_.lap_energy_kwh()) {
            const double rate = P_ * cfg_.energy.efficiency * cfg_.energy.charge_rate;  // kW into the pack
            const double need = cfg_.battery_kwh - bus.energy;
            emit(t, EventKind::recharge_start, b, -1, s, -1, "kwh=" + fmt(bus.energy));
            push(t + hours_to_seconds(need / rate), Ev::recharge_done, b, s);
            return;
        }
        serve_stop(t, b, s);
    }

    void on_recharge_done(double t, int b) {
        Bus& bus = buses_[b];
        bus.energy = cfg_.battery_kwh;
        emit(t, EventKind::recharge_end, b, -1, bus.stop, -1, "kwh=" + fmt(bus.energy));
        serve_stop(t, b, bus.stop);
    }

    void serve_stop(double t, int b, int s) {
        Bus& bus = buses_[b];
        if (cfg_.is_full_stop(s)) {
            const int n = alight_all(t, b, s, 0.0);
            push(t + n * t_s_, Ev::bus_serve, b, s);
            return;
        }
        swap_pods(t, b, s);
        depart(t, b, s);
        (void)bus;
    }

    /// Drops riders for stop s in order; returns how many alighted.
    int alight_all(double t, int b, int s, double offset) {
        Bus& bus = buses_[b];
        int n = 0;
        std::vector<int> stay;
        for (int id : bus.onboard) {
            PassengerRecord& p = log_.passengers[id];
            if (p.destination == s) {
                ++n;
                p.alight_s = t + offset + n * t_s_;
                emit(p.alight_s, EventKind::alight, b, -1, s, id);
            } else {
                stay.push_back(id);
            }
        }
        bus.onboard = std::move(stay);
        bus.by_destination[s] = 0;
        return n;
    }

    /// Can the bus at stop s take one more rider for `dest` without breaking
    /// a pod limit at any downstream stop?
    bool admissible(const Bus& bus, int s, int dest) const {
        if (static_cast<int>(bus.onboard.size()) + 1 > P_ * K_) return false;
        int through = static_cast<int>(bus.onboard.size()) + 1;
        for (int k = s + 1; k <= cfg_.n_stops; ++k) {
            const int alight = bus.by_destination[k] + (dest == k ? 1 : 0);
            through -= alight;
            if (!cfg_.is_full_stop(k) && (alight > K_ || through > (P_ - 1) * K_)) return false;
        }
        return true;
    }

    void take_on(double t, int b, int s, int id) {
        Bus& bus = buses_[b];
        PassengerRecord& p = log_.passengers[id];
        bus.onboard.push_back(id);
        bus.by_destination[p.destination] += 1;
        p.board_s = t;
        p.bus = b;
        emit(t, EventKind::board, b, -1, s, id);
    }

    void on_bus_serve(double t, int b, int s) {
        Bus& bus = buses_[b];
        StopState& st = stops_[s];
        for (auto it = st.queue.begin(); it != st.queue.end(); ++it) {
            const int dest = log_.passengers[*it].destination;
            if (admissible(bus, s, dest)) {
                // count the rider now so later admissions see it; board time is the departure
                bus.onboard.push_back(*it);
                bus.by_destination[dest] += 1;
                bus.boarding_now.push_back(*it);
                st.queue.erase(it);
                push(t + t_s_, Ev::bus_serve, b, s);
                return;
            }
        }
        for (int id : bus.boarding_now) {
            PassengerRecord& p = log_.passengers[id];
            p.board_s = t;
            p.bus = b;
            emit(t, EventKind::board, b, -1, s, id);
        }
        bus.boarding_now.clear();
        if (cfg_.strategy == ChargingStrategy::mobile) record_charge(t, b, s, 0.0);
        depart(t, b, s);
    }

    void swap_pods(double t, int b, int s) {
        Bus& bus = buses_[b];
        StopState& st = stops_[s];
        const int leaving = bus.front_pod;
        const int joining = st.standby_pod;

        // standby pod leaves the platform: settle its charge, then its riders join
        double dwell_h = 0.0;
        if (cfg_.strategy == ChargingStrategy::mobile) dwell_h = (t - pods_[joining].dwell_since) / kSecondsPerHour;
        emit(t, EventKind::pod_detach, b, leaving, s, -1);
        emit(t, EventKind::pod_attach, b, joining, s, -1);

        std::vector<int> riders = alighters_for(t, bus, s);
        std::vector<int> rejected;
        int accepted = 0;
        for (int id : st.in_pod) {
            if (admissible(bus, s, log_.passengers[id].destination)) {
                take_on(t, b, s, id);
                ++accepted;
            } else {
                rejected.push_back(id);
            }
        }
        // refused riders step back onto the platform ahead of later arrivals
        for (auto it = rejected.rbegin(); it != rejected.rend(); ++it) st.queue.push_front(*it);
        st.in_pod.clear();

        bus.front_pod = joining;
        if (cfg_.strategy == ChargingStrategy::mobile) {
            Pod& pj = pods_[joining];
            pj.dwell_h += dwell_h;
            record_charge(t, b, s, dwell_h);
        }

        // the detached pod becomes the next standby pod
        st.session += 1;
        st.standby_pod = leaving;
        st.open = false;
        st.closed = false;
        st.serving = false;
        const double platform = t + theta_s_ / 2.0;
        int n = 0;
        for (int id : riders) {
            PassengerRecord& p = log_.passengers[id];
            ++n;
            p.alight_s = platform + n * t_s_;
            emit(p.alight_s, EventKind::alight, b, leaving, s, id);
        }
        st.ready_at = platform + n * t_s_;
        pods_[leaving].dwell_since = t;
        push(st.ready_at, Ev::pod_open, s, st.session);

        bus.standby_load = accepted;
    }

    std::vector<int> alighters_for(double t, Bus& bus, int s) {
        std::vector<int> out, stay;
        for (int id : bus.onboard) (log_.passengers[id].destination == s ? out : stay).push_back(id);
        bus.onboard = std::move(stay);
        bus.by_destination[s] = 0;
        if (static_cast<int>(out.size()) > K_) fault(t, -1, s, "front_pod_overflow");
        return out;
    }

    void record_charge(double t, int b, int s, double dwell_h) {
        Pod& p = pods_[buses_[b].front_pod];
        const double eta = cfg_.energy.efficiency;
        const double raw = p.battery + cfg_.energy.charge_rate * dwell_h / eta;
        ChargeRecord rec;
        rec.time_s = t;
        rec.pod = buses_[b].front_pod;
        rec.bus = b;
        rec.stop = s;
        rec.previous_kwh = p.last_record;
        rec.segment_h = p.moved_h;
        rec.dwell_h = p.dwell_h;
        rec.clamped = raw > pod_cap_;
        p.battery = std::min(raw, pod_cap_);
        rec.level_kwh = p.battery;
        log_.charges.push_back(rec);
        p.last_record = p.battery;
        p.moved_h = 0.0;
        p.dwell_h = 0.0;
    }

    void depart(double t, int b, int s) {
        Bus& bus = buses_[b];
        emit(t, EventKind::bus_depart, b, bus.front_pod, s, -1);
        const int next = s % cfg_.n_stops + 1;
        LoadSnapshot snap;
        snap.time_s = t;
        snap.bus = b;
        snap.stop = s;
        snap.onboard = static_cast<int>(bus.onboard.size());
        snap.alight_next = bus.by_destination[next];
        snap.next_is_full = cfg_.is_full_stop(next);
        snap.standby_load = bus.standby_load;
        bus.standby_load = 0;
        log_.loads.push_back(snap);
        if (s == 1) bus.laps += 1;

        const double arrive = t + seg_s_;
        if (!cfg_.is_full_stop(next)) push(arrive - theta_s_ / 2.0, Ev::approach, b, next);
        push(arrive, Ev::bus_arrive, b, next);
        consume_segment(b);
    }

    // energy drawn on the segment just started, booked at departure
    void consume_segment(int b) {
        Bus& bus = buses_[b];
        const double seg_h = cfg_.segment_hours();
        if (cfg_.strategy == ChargingStrategy::depot) {
            bus.energy -= P_ * cfg_.energy.discharge_rate * seg_h;
            log_.min_bus_energy_kwh = std::min(log_.min_bus_energy_kwh, bus.energy);
            if (bus.energy < 0.0 && !depleted_.count(b)) {
                depleted_.insert(b);
                fault(log_.events.back().time_s, b, -1, "battery_depleted");
            }
            return;
        }
        Pod& front = pods_[bus.front_pod];
        const double eta = cfg_.energy.efficiency;
        const double move = cfg_.energy.discharge_rate * seg_h;
        front.battery -= move + (P_ - 1) * move / eta;
        front.moved_h += seg_h;
        if (front.battery < 0.0 && !depleted_.count(100000 + bus.front_pod)) {
            depleted_.insert(100000 + bus.front_pod);
            fault(log_.events.back().time_s, b, -1, "charging_pod_depleted");
        }
    }

    void finish() {
        std::stable_sort(log_.events.begin(), log_.events.end(),
                         [](const LogEvent& a, const LogEvent& b) { return a.time_s < b.time_s; });
        for (const Bus& bus : buses_) log_.bus_energy_kwh.push_back(bus.energy);
        if (cfg_.strategy == ChargingStrategy::mobile) log_.min_bus_energy_kwh = 0.0;
    }

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return buf;
    }

    SimConfig cfg_;
    EventLog log_;
    int K_ = 0;
    int P_ = 0;
    double seg_s_ = 0.0;
    double lap_s_ = 0.0;
    double horizon_s_ = 0.0;
    double theta_s_ = 0.0;
    double t_s_ = 0.0;
    double pod_cap_ = 0.0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>> agenda_;
    std::vector<Bus> buses_;
    std::vector<StopState> stops_;
    std::vector<Pod> pods_;
    std::set<int> depleted_;
};

}  // namespace detail

inline EventLog run_simulation(const SimConfig& cfg) { return detail::Engine(cfg).run(); }

struct WaitingStats {
    double mean_s = 0.0;
    double median_s = 0.0;
    double p95_s = 0.0;
    int count = 0;        // passengers who boarded
    int not_boarded = 0;  // still waiting at the horizon
};

inline WaitingStats waiting_time_stats(const std::vector<PassengerRecord>& passengers) {
    WaitingStats out;
    std::vector<double> waits;
    for (const auto& p : passengers) {
        if (p.boarded())
            waits.push_back(p.board_s - p.arrival_s);
        else
            ++out.not_boarded;
    }
    out.count = static_cast<int>(waits.size());
    if (waits.empty()) return out;
    std::sort(waits.begin(), waits.end());
    out.mean_s = std::accumulate(waits.begin(), waits.end(), 0.0) / waits.size();
    const std::size_t n = waits.size();
    out.median_s = n % 2 ? waits[n / 2] : 0.5 * (waits[n / 2 - 1] + waits[n / 2]);
    // nearest-rank percentile
    const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * n));
    out.p95_s = waits[std::max<std::size_t>(rank, 1) - 1];
    return out;
}

inline WaitingStats waiting_time_stats(const EventLog& log) { return waiting_time_stats(log.passengers); }

struct TrajectoryPoint {
    double time_s = 0.0;
    double pos_m = 0.0;
};

/// Piecewise-linear position trace of one bus. Arriving back at the terminal
/// emits the lap end (pos = lap length) followed by the restart at 0 at the
/// same instant; halts appear as horizontal segments.
inline std::vector<TrajectoryPoint> timespace_points(const EventLog& log, int bus) {
    if (bus < 0 || bus >= log.config.n_buses) throw std::out_of_range("unknown bus id " + std::to_string(bus));
    std::vector<TrajectoryPoint> out;
    for (const auto& e : log.events) {
        if (e.bus != bus) continue;
        if (e.kind == EventKind::bus_arrive) {
            if (e.stop == 1 && e.detail == "lap") out.push_back({e.time_s, log.config.lap_length_m()});
            out.push_back({e.time_s, log.config.position_of(e.stop)});
        } else if (e.kind == EventKind::bus_depart) {
            out.push_back({e.time_s, log.config.position_of(e.stop)});
        }
    }
    return out;
}

struct Interval {
    double start_s = 0.0;
    double end_s = 0.0;
    int bus = -1;
};

/// Terminal recharge periods, from the recharge events.
inline std::vector<Interval> recharge_gaps(const EventLog& log) {
    std::vector<Interval> out;
    std::vector<double> open(log.config.n_buses, -1.0);
    for (const auto& e : log.events) {
        if (e.kind == EventKind::recharge_start) open[e.bus] = e.time_s;
        if (e.kind == EventKind::recharge_end && open[e.bus] >= 0.0) {
            out.push_back({open[e.bus], e.time_s, e.bus});
            open[e.bus] = -1.0;
        }
    }
    for (int b = 0; b < log.config.n_buses; ++b)
        if (open[b] >= 0.0) out.push_back({open[b], hours_to_seconds(log.config.horizon_h), b});
    return out;
}

/// Horizontal stretches of a trajectory at the terminal lasting at least `minDuration_s`.
inline std::vector<Interval> terminal_halts(const std::vector<TrajectoryPoint>& pts, double minDuration_s) {
    std::vector<Interval> out;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].pos_m == 0.0 && pts[i - 1].pos_m == 0.0 && pts[i].time_s - pts[i - 1].time_s >= minDuration_s)
            out.push_back({pts[i - 1].time_s, pts[i].time_s, -1});
    }
    return out;
}

struct InvariantReport {
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/// Conservation, capacity and battery checks over a finished run.
inline InvariantReport check_invariants(const EventLog& log) {
    InvariantReport rep;
    auto fail = [&](std::string what) {
        if (rep.failures.size() < 20) rep.failures.push_back(std::move(what));
    };
    const auto& cfg = log.config;
    const int K = static_cast<int>(cfg.service.pod_capacity);
    const int P = cfg.pods_per_bus;

    for (std::size_t i = 1; i < log.events.size(); ++i)
        if (log.events[i].time_s < log.events[i - 1].time_s) fail("event times decrease at index " + std::to_string(i));

    int boarded = 0, alighted = 0, riding = 0;
    for (const auto& p : log.passengers) {
        if (p.boarded()) {
            ++boarded;
            if (p.board_s < p.arrival_s) fail("passenger " + std::to_string(p.id) + " boards before arriving");
            if (p.alighted()) {
                ++alighted;
                if (p.alight_s < p.board_s) fail("passenger " + std::to_string(p.id) + " alights before boarding");
            } else {
                ++riding;
            }
        } else if (p.alighted()) {
            fail("passenger " + std::to_string(p.id) + " alights without boarding");
        }
    }
    // replay the log: riders leave a bus when their pod detaches or when they step off at a full stop
    std::vector<std::set<int>> onboard(cfg.n_buses);
    int boardEvents = 0, alightEvents = 0;
    for (const auto& e : log.events) {
        if (e.kind == EventKind::board) {
            ++boardEvents;
            onboard[e.bus].insert(e.pax);
            if (static_cast<int>(onboard[e.bus].size()) > P * K) fail("bus " + std::to_string(e.bus) + " above capacity");
        } else if (e.kind == EventKind::pod_detach) {
            int n = 0;
            for (auto it = onboard[e.bus].begin(); it != onboard[e.bus].end();) {
                if (log.passengers[*it].destination == e.stop) {
                    it = onboard[e.bus].erase(it);
                    ++n;
                } else {
                    ++it;
                }
            }
            if (n > K) fail("detached pod above K_P at stop " + std::to_string(e.stop));
        } else if (e.kind == EventKind::alight) {
            ++alightEvents;
            if (e.pod < 0 && onboard[e.bus].erase(e.pax) == 0)
                fail("passenger " + std::to_string(e.pax) + " alights from a bus it is not on");
        }
    }
    int leftOnboard = 0;
    for (const auto& s : onboard) leftOnboard += static_cast<int>(s.size());
    if (boardEvents != boarded || alightEvents != alighted) fail("event counts disagree with passenger records");
    if (boarded != alighted + riding || leftOnboard != riding) fail("boarded != alighted + onboard at end");

    for (const auto& s : log.loads) {
        if (s.onboard > P * K) fail("bus load above P*K_P");
        if (s.standby_load > K) fail("standby pod above K_P");
        if (!s.next_is_full && (s.alight_next > K || s.onboard - s.alight_next > (P - 1) * K))
            fail("pod split above K_P before stop " + std::to_string(s.stop % cfg.n_stops + 1));
    }

    if (cfg.strategy == ChargingStrategy::depot) {
        if (log.min_bus_energy_kwh < 0.0) fail("bus battery below zero");
    } else {
        const double cap = cfg.battery_kwh / P;
        const double eta = cfg.energy.efficiency;
        for (const auto& c : log.charges) {
            if (c.level_kwh < 0.0 || c.level_kwh > cap + 1e-9) fail("charging pod level outside [0, capacity]");
            const double expected =
                std::min(cap, c.previous_kwh - cfg.energy.discharge_rate * c.segment_h * (1.0 + (P - 1) / eta) +
                                  cfg.energy.charge_rate * c.dwell_h / eta);
            if (std::abs(expected - c.level_kwh) > 1e-6) fail("charging pod " + std::to_string(c.pod) + " off recursion");
        }
    }
    return rep;
}

inline void write_events_csv(const EventLog& log, std::ostream& out) {
    auto opt = [](int v) { return v < 0 ? std::string() : std::to_string(v); };
    out << "time_s,event,bus,pod,stop,pax,detail\n";
    char buf[32];
    for (const auto& e : log.events) {
        std::snprintf(buf, sizeof buf, "%.3f", e.time_s);
        out << buf << ',' << to_string(e.kind) << ',' << opt(e.bus) << ',' << opt(e.pod) << ',' << opt(e.stop)
            << ',' << opt(e.pax) << ',' << e.detail << '\n';
    }
}

inline void write_trajectory_csv(const EventLog& log, std::ostream& out) {
    out << "bus,time_s,pos_m\n";
    char buf[64];
    for (int b = 0; b < log.config.n_buses; ++b) {
        for (const auto& p : timespace_points(log, b)) {
            std::snprintf(buf, sizeof buf, "%d,%.3f,%.3f\n", b, p.time_s, p.pos_m);
            out << buf;
        }
    }
}

}  // namespace slam::sim
