#include <gtest/gtest.h>

#include <sstream>

#include "slam/oracle.hpp"
#include "slam/sweep.hpp"

using namespace slam;

namespace {

const ServiceParameters kParams{};
const DemandStatistics kStats = DemandStatistics::from_shares(0.4, 0.1);
const EnergyParameters kEnergy{};

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Grid, LinearAndLog) {
    const auto lin = demand_grid(50, 5000, 500, Spacing::linear);
    ASSERT_EQ(lin.size(), 500u);
    EXPECT_EQ(lin.front(), 50.0);
    EXPECT_EQ(lin.back(), 5000.0);
    EXPECT_NEAR(lin[1] - lin[0], 4950.0 / 499, 1e-9);
    const auto lg = demand_grid(10, 1000, 3, Spacing::log);
    EXPECT_NEAR(lg[1], 100.0, 1e-9);
    EXPECT_THROW(demand_grid(100, 50, 10, Spacing::linear), std::invalid_argument);
    EXPECT_THROW(demand_grid(0, 50, 10, Spacing::linear), std::invalid_argument);
    EXPECT_THROW(demand_grid(10, 50, 0, Spacing::linear), std::invalid_argument);
}

TEST(Sweep, CoreStagesAndBoundaries) {
    const auto rows = demand_sweep(kParams, kStats, kEnergy, Strategy::core, 50, 5000, 500);
    ASSERT_EQ(rows.size(), 500u);
    const double step = 4950.0 / 499;
    const auto b = detect_stage_boundaries(rows);
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[0].from.stage, Stage::IC);
    EXPECT_EQ(b[0].to.stage, Stage::FSB);
    EXPECT_EQ(b[1].to.stage, Stage::FLB);
    EXPECT_EQ(b[2].to.stage, Stage::MFH);
    const auto th = stage_thresholds(kParams, kStats, Strategy::core);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(b[i].X, th.boundaries[i].X, step);
}

TEST(Sweep, SingleStepEqualsOptimize) {
    const auto rows = demand_sweep(kParams, kStats, kEnergy, Strategy::depot, 777, 777, 1);
    ASSERT_EQ(rows.size(), 1u);
    const Design d = design_of(optimize(Strategy::depot, kParams, kStats, kEnergy, 777));
    ASSERT_TRUE(rows[0].design);
    EXPECT_EQ(rows[0].design->f, d.f);
    EXPECT_EQ(rows[0].design->P, d.P);
    EXPECT_EQ(rows[0].design->cost_total, d.cost_total);
}

TEST(Sweep, ConstantStageHasNoBoundaries) {
    const auto rows = demand_sweep(kParams, kStats, kEnergy, Strategy::core, 10, 400, 40);
    EXPECT_TRUE(detect_stage_boundaries(rows).empty());
}

TEST(Sweep, MobileCrossesIntoInfeasibility) {
    const auto rows = demand_sweep(kParams, kStats, kEnergy, Strategy::mobile, 50, 8000, 500);
    const double step = 7950.0 / 499;
    const auto b = detect_stage_boundaries(rows);
    ASSERT_FALSE(b.empty());
    EXPECT_EQ(b.back().to.stage, Stage::Infeasible);
    EXPECT_EQ(*b.back().to.reason, InfeasibleReason::energy_window_empty);
    // the headway window closes first at this configuration
    const auto& first = *std::find_if(b.begin(), b.end(), [](const SweepBoundary& x) { return !x.to.feasible(); });
    EXPECT_EQ(*first.to.reason, InfeasibleReason::headway_window_empty);
    EXPECT_NEAR(first.X, 5433.962, step);
    EXPECT_NEAR(b.back().X, 6448.1028, step);
}

TEST(Sweep, SlowChargerShowsEnergyLimitedStage) {
    EnergyParameters e = kEnergy;
    e.charge_rate = 100;
    const auto rows = demand_sweep(kParams, kStats, e, Strategy::mobile, 50, 4500, 500);
    const auto b = detect_stage_boundaries(rows);
    const auto it = std::find_if(b.begin(), b.end(), [](const SweepBoundary& x) {
        return x.from.stage == Stage::MFH && x.to.stage == Stage::ELS;
    });
    ASSERT_NE(it, b.end());
    EXPECT_NEAR(it->X, 3692.18, 4450.0 / 499);
}

TEST(Sweep, RowsSatisfyConstraintsAndScaleEconomies) {
    for (Strategy s : {Strategy::core, Strategy::depot, Strategy::mobile}) {
        const auto pb = make_problem(s, kParams, kStats, kEnergy);
        const auto rows = demand_sweep(pb, 20, 8000, 400);
        double avg = 1e300;
        for (const auto& r : rows) {
            if (!r.feasible()) continue;
            EXPECT_TRUE(violated_constraints(pb, r.X, r.design->f, r.design->P).empty());
            EXPECT_LE(r.design->avg_cost, avg + 1e-12);
            avg = r.design->avg_cost;
        }
    }
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
    const auto pb = make_problem(Strategy::mobile, kParams, kStats, kEnergy);
    const auto a = demand_sweep(pb, 50, 7000, 123, Spacing::log, 1);
    const auto b = demand_sweep(pb, 50, 7000, 123, Spacing::log, 5);
    std::ostringstream sa, sb;
    write_sweep_csv(a, sa);
    write_sweep_csv(b, sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Csv, HeaderAndRows) {
    const auto rows = demand_sweep(kParams, kStats, kEnergy, Strategy::core, 1000, 6000, 2);
    std::ostringstream out;
    write_sweep_csv(rows, out);
    const std::string s = out.str();
    EXPECT_EQ(count_lines(s), 3);
    EXPECT_EQ(s.substr(0, s.find('\n')),
              "X,f_star,P_star,P_int,stage,cost_wait,cost_iv,cost_op,cost_total,avg_cost,feasible,reason");
    EXPECT_NE(s.find("\n1000,25,2,2,FSB,88.8,236.8,321.6,647.2,0.6472,1,\n"), std::string::npos);
    EXPECT_NE(s.find("\n6000,,,,INFEASIBLE,,,,,,0,headway_window_empty\n"), std::string::npos);
}
