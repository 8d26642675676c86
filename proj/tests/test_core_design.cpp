#include <gtest/gtest.h>

#include <random>

#include "slam/core_design.hpp"
#include "slam/oracle.hpp"

using namespace slam;

namespace {

const ServiceParameters kParams{};
const DemandStatistics kStats = DemandStatistics::from_shares(0.4, 0.1);

Design core_at(double X, const ServiceParameters& p = kParams, const DemandStatistics& s = kStats) {
    return design_of(optimize_core(p, s, X));
}

}  // namespace

TEST(Feasibility, ReferenceLimit) {
    const auto ok = check_feasibility(kParams, kStats, 1000);
    EXPECT_TRUE(ok.ok);
    EXPECT_NEAR(ok.threshold, 5433.962, 1e-3);
    const auto bad = check_feasibility(kParams, kStats, 6000);
    EXPECT_FALSE(bad.ok);
    EXPECT_GT(bad.margin, 0.0);
    const auto o = optimize_core(kParams, kStats, 6000);
    ASSERT_FALSE(is_feasible(o));
    EXPECT_EQ(std::get<Infeasibility>(o).reason, InfeasibleReason::headway_window_empty);
}

TEST(Feasibility, TinyServiceTimesAlwaysFeasible) {
    ServiceParameters p;
    p.swap_time = 1e-12;
    p.boarding_time = 1e-12;
    EXPECT_TRUE(check_feasibility(p, kStats, 1e7).ok);
}

TEST(Cost, ReferenceBreakdown) {
    const Design d = evaluate_cost(kParams, 1000, 25, 2, 0.4, 8.04);
    EXPECT_NEAR(d.cost_user_wait, 88.8, 1e-9);
    EXPECT_NEAR(d.cost_user_invehicle, 236.8, 1e-9);
    EXPECT_NEAR(d.cost_operator, 321.6, 1e-9);
    EXPECT_NEAR(d.cost_total, 647.2, 1e-9);
    EXPECT_NEAR(d.avg_cost, 0.6472, 1e-12);
}

TEST(Cost, ZeroDemandAndFrequencyDoubling) {
    const Design zero = evaluate_cost(kParams, 0, 10, 3, 0.4, 8.04);
    EXPECT_EQ(zero.cost_user_wait, 0.0);
    EXPECT_EQ(zero.cost_user_invehicle, 0.0);
    EXPECT_NEAR(zero.cost_operator, (10 * 0.4 * 3 + 20) * 8.04, 1e-9);
    const Design a = evaluate_cost(kParams, 700, 12, 2.5, 0.4, 8.04);
    const Design b = evaluate_cost(kParams, 700, 24, 2.5, 0.4, 8.04);
    EXPECT_NEAR(b.cost_user_wait, a.cost_user_wait / 2, 1e-12);
    EXPECT_NEAR(b.cost_operator - a.cost_operator, 12 * 0.4 * 2.5 * 8.04, 1e-9);
}

TEST(Cost, RejectsBadInputs) {
    EXPECT_THROW(evaluate_cost(kParams, 100, 0, 2, 0.4, 8.04), std::invalid_argument);
    EXPECT_THROW(evaluate_cost(kParams, 100, 5, 1.5, 0.4, 8.04), std::invalid_argument);
}

TEST(Optimize, ReferencePoints) {
    const Design ic = core_at(100);
    EXPECT_NEAR(ic.f, 5.87494, 1e-4);
    EXPECT_DOUBLE_EQ(ic.P, 2.0);
    EXPECT_EQ(ic.stage.stage, Stage::IC);
    EXPECT_NEAR(ic.cost_total, 260.055, 1e-3);

    const Design fsb = core_at(1000);
    EXPECT_NEAR(fsb.f, 25.0, 1e-9);
    EXPECT_NEAR(fsb.P, 2.0, 1e-12);
    EXPECT_EQ(fsb.stage.stage, Stage::FSB);
    EXPECT_NEAR(fsb.cost_total, 647.2, 1e-9);

    const Design flb = core_at(1400);
    EXPECT_NEAR(flb.f, 31.08726, 1e-4);
    EXPECT_NEAR(flb.P, 2.125863, 1e-5);
    EXPECT_EQ(flb.stage.stage, Stage::FLB);
    // the Case-2 pod formula gives the same P
    const double Pc2 = 1 + std::sqrt(2 * 0.16 * 0.4 * 8.04 * 1400 / (4.44 * 256));
    EXPECT_NEAR(flb.P, Pc2, 1e-9);

    const Design mfh = core_at(3000);
    EXPECT_NEAR(mfh.f, 33.96226, 1e-4);
    EXPECT_NEAR(mfh.P, 3.208333, 1e-5);
    EXPECT_EQ(mfh.stage.stage, Stage::MFH);
}

TEST(Optimize, BindingStructure) {
    const auto pb = core_problem(kParams, kStats);
    for (double X : {100.0, 300.0, 500.0}) {
        const Design d = core_at(X);
        EXPECT_EQ(d.P, 2.0);
        EXPECT_GT(kParams.pod_capacity, X * kStats.rho_max / d.f * (1 + 1e-6));  // capacity slack
    }
    for (double X : {600.0, 900.0, 1200.0, 1600.0, 2500.0, 5000.0}) {
        const Design d = core_at(X);
        const double load = X * kStats.rho_max / (d.f * (d.P - 1));
        EXPECT_NEAR(load / kParams.pod_capacity, 1.0, 1e-9) << X;
        EXPECT_TRUE(violated_constraints(pb, X, d.f, d.P).empty());
        EXPECT_GE(1.0 / d.f * (1 + 1e-12), kParams.min_feasible_headway());
        EXPECT_GE(d.f * (1 + 1e-12), X * kStats.phi_max / kParams.pod_capacity);
    }
}

TEST(Optimize, CostComponentsSum) {
    for (double X : {50.0, 777.0, 4000.0}) {
        const Design d = core_at(X);
        EXPECT_NEAR(d.cost_total, d.cost_user_wait + d.cost_user_invehicle + d.cost_operator, 1e-9);
        EXPECT_NEAR(d.avg_cost, d.cost_total / X, 1e-12);
    }
}

TEST(Optimize, MonotoneAndScaleEconomies) {
    double f = 0, P = 0, avg = 1e300;
    for (double X = 20; X < 5400; X += 7.3) {
        const Design d = core_at(X);
        EXPECT_GE(d.f, f - 1e-9);
        EXPECT_GE(d.P, P - 1e-9);
        EXPECT_LE(d.avg_cost, avg + 1e-12);
        f = d.f;
        P = d.P;
        avg = d.avg_cost;
    }
}

TEST(Optimize, TripRatioShiftsCostOnly) {
    ServiceParameters p = kParams;
    p.trip_ratio = 0.9;
    for (double X : {100.0, 1000.0, 2000.0}) {
        const Design a = core_at(X);
        const Design b = core_at(X, p);
        EXPECT_EQ(a.f, b.f);
        EXPECT_EQ(a.P, b.P);
        EXPECT_NEAR(b.cost_total - a.cost_total, 1.48 * 0.5 * 0.4 * X, 1e-9);
    }
}

TEST(Optimize, IntegerView) {
    const Design d = core_at(3000);
    ASSERT_TRUE(d.integer);
    EXPECT_TRUE(d.integer->pods == 3 || d.integer->pods == 4);
    EXPECT_GE(d.integer->cost_total, d.cost_total - 1e-9);
    const auto pb = core_problem(kParams, kStats);
    EXPECT_TRUE(violated_constraints(pb, 3000, d.integer->f, d.integer->pods).empty());
    // matches the integer-mode oracle
    oracle::GridOptions opt;
    opt.pod_mode = oracle::PodMode::integer;
    const auto best = oracle::grid_search(pb, 3000, opt);
    ASSERT_TRUE(best.found());
    EXPECT_EQ(static_cast<int>(best.P), d.integer->pods);
    EXPECT_LE(d.integer->cost_total, best.cost * (1 + 1e-9));
}

TEST(Optimize, RejectsNonPositiveDemand) {
    EXPECT_THROW(optimize_core(kParams, kStats, 0.0), std::invalid_argument);
}

TEST(Classify, ReferenceBoundaries) {
    const auto pb = core_problem(kParams, kStats);
    EXPECT_EQ(classify(pb, 500).stage, Stage::IC);
    EXPECT_EQ(classify(pb, 600).stage, Stage::FSB);
    const double edge = 4.44 * 256 / (4 * 0.4 * 8.04 * 0.16);
    EXPECT_EQ(classify(pb, edge).stage, Stage::IC);  // tie goes to the lower stage
    EXPECT_EQ(classify(pb, edge * (1 + 1e-9)).stage, Stage::FSB);

    const auto th = thresholds(pb);
    ASSERT_EQ(th.boundaries.size(), 4u);
    EXPECT_EQ(th.boundaries.back().to.stage, Stage::Infeasible);
    EXPECT_NEAR(th.boundaries.back().X, th.headway_limit, 1e-9);
    EXPECT_NEAR(*th.boundary(Stage::IC, Stage::FSB), 552.2388, 1e-3);
    EXPECT_NEAR(*th.boundary(Stage::FSB, Stage::FLB), 1104.4776, 1e-3);
    EXPECT_NEAR(*th.boundary(Stage::FLB, Stage::MFH), 1670.9226, 1e-3);
    EXPECT_FALSE(th.has(Stage::FLB2));
    EXPECT_EQ(th.absent, std::vector<Stage>{Stage::FLB2});
    EXPECT_NEAR(th.headway_limit, 5433.962, 1e-3);
}

TEST(Classify, ClosedFormBoundaryExpressions) {
    const double tc = 0.4, g = 8.04, pw = 4.44, K = 16, rho = 0.4, phi = 0.1;
    const double h = kParams.min_feasible_headway();
    EXPECT_NEAR(pw * K * K / (4 * tc * g * rho * rho), 552.2388, 1e-3);
    EXPECT_NEAR(pw * K * K / (2 * tc * g * rho * rho), 1104.4776, 1e-3);
    EXPECT_NEAR(2 * tc * g / (h * h * pw), 1670.9226, 1e-3);
    EXPECT_NEAR(pw * K * K / (2 * phi * phi * tc * g), 17671.64, 1e-2);
}

TEST(Classify, LargeSwapTimeSkipsLargeBusStage) {
    // h = 156 s caps f at 23.08/h before two pods run out of room
    ServiceParameters p = kParams;
    p.swap_time = seconds_to_hours(60);
    const auto th = thresholds(core_problem(p, kStats));
    EXPECT_FALSE(th.has(Stage::FLB));
    ASSERT_EQ(th.boundaries.size(), 3u);
    EXPECT_EQ(th.boundaries[1].from.stage, Stage::FSB);
    EXPECT_EQ(th.boundaries[1].to.stage, Stage::MFH);
    EXPECT_NEAR(th.boundaries[1].X, 16 * 3600.0 / (156 * 0.4), 1e-6);
    EXPECT_NEAR(th.headway_limit, 16 * 3600.0 / (156 * 0.1), 1e-6);
}

TEST(Classify, EqualSharesHaveNoSecondFullStage) {
    const auto th = thresholds(core_problem(kParams, DemandStatistics::from_shares(0.2, 0.2)));
    EXPECT_FALSE(th.has(Stage::FLB2));
}

TEST(Classify, SecondFullStageWhenBoardingPeakDominates) {
    // phi close to rho and a long swap: the max-headway bound binds while P > 2
    ServiceParameters p = kParams;
    p.swap_time = seconds_to_hours(1);
    const auto pb = core_problem(p, DemandStatistics::from_shares(0.4, 0.3));
    const auto th = thresholds(pb);
    EXPECT_TRUE(th.has(Stage::FLB2));
    // labels along a sweep never revisit a stage
    std::vector<Stage> seen;
    for (double X = 10; X < th.headway_limit; X *= 1.01) {
        const Stage s = classify(pb, X).stage;
        if (seen.empty() || seen.back() != s) {
            EXPECT_EQ(std::count(seen.begin(), seen.end(), s), 0);
            seen.push_back(s);
        }
    }
}

TEST(Oracle, ClosedFormNeverWorseOnReferenceLine) {
    const auto pb = core_problem(kParams, kStats);
    for (double X : {100.0, 552.0, 553.0, 1000.0, 1104.0, 1105.0, 1400.0, 1671.0, 3000.0, 5400.0}) {
        const Design d = core_at(X);
        const auto best = oracle::grid_search(pb, X);
        ASSERT_TRUE(best.found());
        EXPECT_LE(oracle::compare(d, best).cost_gap_rel, 1e-9) << X;
    }
}
