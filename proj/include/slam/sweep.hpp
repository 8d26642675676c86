#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "slam/strategy.hpp"

namespace slam {

enum class Spacing { linear, log };

struct SweepRow {
    double X = 0.0;
    StageLabel stage;
    std::optional<Design> design;              // set when feasible
    std::optional<Infeasibility> infeasibility;  // set otherwise

    bool feasible() const { return design.has_value(); }
};

inline std::vector<double> demand_grid(double lo, double hi, int steps, Spacing spacing) {
    if (steps < 1) throw std::invalid_argument("sweep needs at least one step");
    if (!(lo > 0.0)) throw std::invalid_argument("sweep lower demand must be positive");
    if (steps == 1) {
        if (hi < lo) throw std::invalid_argument("sweep range is inverted");
        return {lo};
    }
    if (!(hi > lo)) throw std::invalid_argument("sweep needs X_lo < X_hi");
    std::vector<double> xs(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double s = static_cast<double>(i) / (steps - 1);
        xs[i] = spacing == Spacing::linear ? lo + (hi - lo) * s : lo * std::pow(hi / lo, s);
    }
    xs.back() = hi;
    return xs;
}

/// One optimised row per demand level. Rows are computed on worker threads
/// and always returned in ascending X.
inline std::vector<SweepRow> demand_sweep(const DesignProblem& pb, double lo, double hi, int steps,
                                          Spacing spacing = Spacing::linear, unsigned threads = 0) {
    const auto xs = demand_grid(lo, hi, steps, spacing);
    std::vector<SweepRow> rows(xs.size());
    threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(xs.size()));
    auto work = [&](unsigned w) {
        for (std::size_t i = w; i < xs.size(); i += threads) {
            SweepRow& row = rows[i];
            row.X = xs[i];
            const Outcome o = optimize(pb, xs[i]);
            if (const auto* d = std::get_if<Design>(&o)) {
                row.design = *d;
                row.stage = d->stage;
            } else {
                row.infeasibility = std::get<Infeasibility>(o);
                row.stage = StageLabel::infeasible(row.infeasibility->reason);
            }
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    return rows;
}

inline std::vector<SweepRow> demand_sweep(const ServiceParameters& params, const DemandStatistics& stats,
                                          const EnergyParameters& energy, Strategy strategy, double lo, double hi,
                                          int steps, Spacing spacing = Spacing::linear) {
    return demand_sweep(make_problem(strategy, params, stats, energy), lo, hi, steps, spacing);
}

struct SweepBoundary {
    double X = 0.0;  // midpoint of the two rows that differ
    StageLabel from;
    StageLabel to;
};

inline std::vector<SweepBoundary> detect_stage_boundaries(const std::vector<SweepRow>& rows) {
    std::vector<SweepBoundary> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i].stage == rows[i - 1].stage))
            out.push_back({0.5 * (rows[i - 1].X + rows[i].X), rows[i - 1].stage, rows[i].stage});
    }
    return out;
}

namespace detail {
inline std::string sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}
}  // namespace detail

inline const char* kSweepCsvHeader =
    "X,f_star,P_star,P_int,stage,cost_wait,cost_iv,cost_op,cost_total,avg_cost,feasible,reason";

/// Infeasible rows leave the numeric design columns empty.
inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    using detail::sig6;
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
        out << sig6(r.X) << ',';
        if (r.design) {
            const Design& d = *r.design;
            out << sig6(d.f) << ',' << sig6(d.P) << ',' << (d.integer ? std::to_string(d.integer->pods) : "") << ','
                << to_string(r.stage.stage) << ',' << sig6(d.cost_user_wait) << ',' << sig6(d.cost_user_invehicle)
                << ',' << sig6(d.cost_operator) << ',' << sig6(d.cost_total) << ',' << sig6(d.avg_cost) << ",1,\n";
        } else {
            out << ",,," << to_string(r.stage.stage) << ",,,,,,0," << to_string(r.infeasibility->reason) << '\n';
        }
    }
}

}  // namespace slam
