#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slam/params.hpp"

namespace slam {

/// Error raised while reading or validating origin-destination data.
class DemandError : public std::runtime_error {
public:
    enum class Kind { malformed, negative_entry, lower_triangle, degenerate, bad_pattern };

    DemandError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Hourly origin-destination demand over an ordered, one-directional stop
/// sequence. Stops are 1-indexed in the public accessors.
class ODMatrix {
public:
    ODMatrix() = default;

    explicit ODMatrix(int stops) : stops_(stops), flows_(static_cast<std::size_t>(stops) * stops, 0.0) {
        if (stops < 2) throw DemandError(DemandError::Kind::malformed, "an OD matrix needs at least 2 stops");
    }

    int stops() const { return stops_; }

    double operator()(int origin, int destination) const { return flows_[index(origin, destination)]; }

    void set(int origin, int destination, double paxPerHour) {
        if (!(paxPerHour >= 0.0))
            throw DemandError(DemandError::Kind::negative_entry,
                              "negative flow at (" + std::to_string(origin) + "," + std::to_string(destination) + ")");
        if (destination <= origin && paxPerHour != 0.0)
            throw DemandError(DemandError::Kind::lower_triangle,
                              "flow from stop " + std::to_string(origin) + " to non-downstream stop " +
                                  std::to_string(destination));
        flows_[index(origin, destination)] = paxPerHour;
    }

    double total() const {
        double sum = 0.0;
        for (double v : flows_) sum += v;
        return sum;
    }

    ODMatrix scaled(double factor) const {
        ODMatrix out = *this;
        for (double& v : out.flows_) v *= factor;
        return out;
    }

    /// Copy with every trip that starts or ends at `stop` removed.
    ODMatrix without_stop(int stop) const {
        ODMatrix out = *this;
        for (int k = 1; k <= stops_; ++k) {
            out.flows_[index(stop, k)] = 0.0;
            out.flows_[index(k, stop)] = 0.0;
        }
        return out;
    }

private:
    std::size_t index(int origin, int destination) const {
        if (origin < 1 || origin > stops_ || destination < 1 || destination > stops_)
            throw std::out_of_range("stop index out of range");
        return static_cast<std::size_t>(origin - 1) * stops_ + (destination - 1);
    }

    int stops_ = 0;
    std::vector<double> flows_;
};

/// Scalar demand shape consumed by the design models plus per-stop profiles.
/// Profiles are indexed 0..S-1 for stops 1..S.
struct DemandStatistics {
    double phi_max = 0.0;  // largest per-stop boarding-or-alighting share of X
    double rho_max = 0.0;  // largest link-load share of X
    double total = 0.0;    // X
    std::vector<double> board;
    std::vector<double> alight;
    std::vector<double> load;  // pax/h crossing each stop without boarding or alighting there

    /// Shape-only statistics, as used when rho_max/phi_max come from config.
    static DemandStatistics from_shares(double rho, double phi) {
        DemandStatistics s;
        s.rho_max = rho;
        s.phi_max = phi;
        return s;
    }
};

namespace detail {

inline DemandStatistics statistics_over(const ODMatrix& od, const std::set<int>& excludedFromPhi) {
    const int S = od.stops();
    DemandStatistics st;
    st.total = od.total();
    if (!(st.total > 0.0)) throw DemandError(DemandError::Kind::degenerate, "total demand is zero");
    st.board.assign(S, 0.0);
    st.alight.assign(S, 0.0);
    st.load.assign(S, 0.0);
    for (int i = 1; i <= S; ++i) {
        for (int j = i + 1; j <= S; ++j) {
            const double x = od(i, j);
            st.board[i - 1] += x;
            st.alight[j - 1] += x;
            // passengers i -> j cross every stop strictly between them
            for (int k = i + 1; k < j; ++k) st.load[k - 1] += x;
        }
    }
    double peakStop = 0.0;
    double peakLoad = 0.0;
    for (int s = 1; s <= S; ++s) {
        if (!excludedFromPhi.count(s)) peakStop = std::max({peakStop, st.board[s - 1], st.alight[s - 1]});
        peakLoad = std::max(peakLoad, st.load[s - 1]);
    }
    st.phi_max = peakStop / st.total;
    st.rho_max = peakLoad / st.total;
    return st;
}

}  // namespace detail

/// Boarding, alighting and load profiles with their peak shares of total demand.
inline DemandStatistics compute_statistics(const ODMatrix& od) { return detail::statistics_over(od, {}); }

struct FullStopAnalysis {
    std::set<int> full_stops;        // 1-indexed
    double threshold = 0.0;          // pax/h, K_P / (2 K_P t + theta)
    DemandStatistics statistics;     // phi_max recomputed without the full stops
};

/// Stops whose hourly boardings or alightings exceed what a single swapping
/// pod can serve. Those stops are dropped from the phi_max maximum; the load
/// profile is unchanged. When every stop is a full stop phi_max becomes 0.
inline FullStopAnalysis identify_full_stops(const ODMatrix& od, const ServiceParameters& params) {
    FullStopAnalysis out;
    out.threshold = params.pod_capacity / params.min_feasible_headway();
    const DemandStatistics base = compute_statistics(od);
    for (int s = 1; s <= od.stops(); ++s) {
        if (base.board[s - 1] > out.threshold || base.alight[s - 1] > out.threshold) out.full_stops.insert(s);
    }
    out.statistics = out.full_stops.empty() ? base : detail::statistics_over(od, out.full_stops);
    return out;
}

/// Demand-weighted mean trip length (in segments) over the line length (S segments, loop).
inline double mean_trip_ratio(const ODMatrix& od) {
    double weighted = 0.0;
    for (int i = 1; i <= od.stops(); ++i)
        for (int j = i + 1; j <= od.stops(); ++j) weighted += od(i, j) * (j - i);
    const double X = od.total();
    if (!(X > 0.0)) throw DemandError(DemandError::Kind::degenerate, "total demand is zero");
    return weighted / X / od.stops();
}

inline ODMatrix parse_od_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw DemandError(DemandError::Kind::malformed,
                                  "line " + std::to_string(lineNo) + ": not a number: '" + cell + "'");
            }
            if (cell.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
                throw DemandError(DemandError::Kind::malformed,
                                  "line " + std::to_string(lineNo) + ": not a number: '" + cell + "'");
            row.push_back(v);
        }
        if (!line.empty() && line.back() == ',')
            throw DemandError(DemandError::Kind::malformed, "line " + std::to_string(lineNo) + ": trailing comma");
        rows.push_back(std::move(row));
    }
    const int S = static_cast<int>(rows.size());
    if (S < 2) throw DemandError(DemandError::Kind::malformed, "OD grid needs at least 2 rows");
    for (int i = 0; i < S; ++i) {
        if (static_cast<int>(rows[i].size()) != S)
            throw DemandError(DemandError::Kind::malformed, "OD grid is not square: row " + std::to_string(i + 1) +
                                                                " has " + std::to_string(rows[i].size()) +
                                                                " columns, expected " + std::to_string(S));
    }
    ODMatrix od(S);
    for (int i = 1; i <= S; ++i)
        for (int j = 1; j <= S; ++j) od.set(i, j, rows[i - 1][j - 1]);
    return od;
}

inline ODMatrix load_od_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open OD file: " + path);
    return parse_od_csv(in);
}

inline void write_od_csv(const ODMatrix& od, std::ostream& out) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (int i = 1; i <= od.stops(); ++i) {
        for (int j = 1; j <= od.stops(); ++j) out << (j > 1 ? "," : "") << od(i, j);
        out << '\n';
    }
}

/// Synthetic demand pattern. `peaked` mixes all-pairs, adjacent-stop and a
/// stop-1 to stop-2 feeder component so the peak shares hit the targets.
struct DemandPattern {
    enum class Kind { uniform, peaked } kind = Kind::uniform;
    double rho_target = 0.0;
    double phi_target = 0.0;

    static DemandPattern uniform() { return {}; }
    static DemandPattern peaked(double rho, double phi) { return {Kind::peaked, rho, phi}; }
};

inline ODMatrix synthesize_od(int stops, double total, DemandPattern pattern) {
    if (!(total > 0.0)) throw DemandError(DemandError::Kind::degenerate, "total demand must be positive");
    const int S = stops;
    ODMatrix allPairs(S);
    const double pairs = S * (S - 1) / 2.0;
    for (int i = 1; i <= S; ++i)
        for (int j = i + 1; j <= S; ++j) allPairs.set(i, j, 1.0 / pairs);
    if (pattern.kind == DemandPattern::Kind::uniform) return allPairs.scaled(total);

    // Component shares at the stops that attain the peaks.
    const DemandStatistics u = compute_statistics(allPairs);
    const double rhoU = u.rho_max;
    const double phiU = u.board[0];             // all-pairs boarding peaks at stop 1
    const double phiA = 1.0 / (S - 1);          // adjacent trips board 1/(S-1) at each stop
    const double a = pattern.rho_target / rhoU;  // only the all-pairs part loads interior stops
    // phi = a*phiU + b*phiA + c, with b = 1 - a - c
    const double c = (pattern.phi_target - a * phiU - (1.0 - a) * phiA) / (1.0 - phiA);
    const double b = 1.0 - a - c;
    if (!(a > 0.0) || a > 1.0 || c < 0.0 || b < 0.0)
        throw DemandError(DemandError::Kind::bad_pattern,
                          "peak shares (rho=" + std::to_string(pattern.rho_target) +
                              ", phi=" + std::to_string(pattern.phi_target) + ") unreachable on " +
                              std::to_string(S) + " stops");
    ODMatrix od(S);
    for (int i = 1; i <= S; ++i) {
        for (int j = i + 1; j <= S; ++j) {
            double x = a * allPairs(i, j);
            if (j == i + 1) x += b * phiA;
            if (i == 1 && j == 2) x += c;
            od.set(i, j, x * total);
        }
    }
    return od;
}

}  // namespace slam
