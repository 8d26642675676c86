#include <gtest/gtest.h>

#include <random>

#include "slam/oracle.hpp"

using namespace slam;

namespace {

const ServiceParameters kParams{};
const DemandStatistics kStats = DemandStatistics::from_shares(0.4, 0.1);
const EnergyParameters kEnergy{};

DesignProblem core() { return core_problem(kParams, kStats); }

}  // namespace

TEST(Oracle, ReferenceDemand) {
    const auto pb = core();
    const auto best = oracle::grid_search(pb, 1000);
    ASSERT_TRUE(best.found());
    const auto grid = oracle::default_frequency_grid(pb, 1000, 10000);
    const double ratio = grid[1] / grid[0];
    EXPECT_NEAR(best.f, 25.0, 25.0 * (ratio - 1) + 1e-9);
    const double pStep = (oracle::default_pod_ceiling(pb, 1000, grid[0]) - 2.0) / 999;
    EXPECT_NEAR(best.P, 2.0, pStep);
    EXPECT_NEAR(best.cost, evaluate_cost(pb, 1000, best.f, best.P).cost_total, 1e-9);
}

TEST(Oracle, AgreesOnInfeasibility) {
    const auto headway = oracle::grid_search(core(), 6000);
    EXPECT_EQ(headway.status, oracle::Result::Status::infeasible);
    EXPECT_EQ(headway.reason, InfeasibleReason::headway_window_empty);
    EXPECT_FALSE(check_feasibility(kParams, kStats, 6000).ok);

    const auto mobile = make_problem(Strategy::mobile, kParams, kStats, kEnergy);
    const auto past = oracle::grid_search(mobile, 6460);
    EXPECT_EQ(past.status, oracle::Result::Status::infeasible);
    EXPECT_EQ(past.reason, InfeasibleReason::energy_window_empty);
}

TEST(Oracle, EachConstraintRejectedWithItsTag) {
    const auto pb = make_problem(Strategy::mobile, kParams, kStats, kEnergy);
    const double X = 1000;
    using oracle::violations;
    EXPECT_TRUE(violations(pb, X, 25, 2).empty());
    EXPECT_EQ(violations(pb, X, 40, 3), std::vector<Constraint>{Constraint::min_headway});
    EXPECT_EQ(violations(pb, X, 5, 20), std::vector<Constraint>{Constraint::max_headway});
    EXPECT_EQ(violations(pb, X, 20, 2.1), std::vector<Constraint>{Constraint::capacity});
    EXPECT_EQ(violations(pb, 10, 25, 1.9), std::vector<Constraint>{Constraint::min_pods});
    auto tight = kEnergy;
    tight.charge_rate = 45;  // budget 56.25: f * (P - 1 + eta) <= 56.25
    const auto pe = make_problem(Strategy::mobile, kParams, kStats, tight);
    EXPECT_EQ(violations(pe, X, 30, 2), std::vector<Constraint>{Constraint::headway_energy});
    // the closed-form checker tags the same points identically
    EXPECT_EQ(violated_constraints(pb, X, 40, 3), violations(pb, X, 40, 3));
    EXPECT_EQ(violated_constraints(pe, X, 30, 2), violations(pe, X, 30, 2));
}

TEST(Oracle, RefiningNeverRaisesMinimum) {
    const auto pb = core();
    for (double X : {300.0, 1400.0, 3000.0}) {
        double last = 1e300;
        for (int n : {100, 1000, 10000}) {
            // nested grids: each finer grid contains the coarser one
            auto grid = oracle::default_frequency_grid(pb, X, 101);
            std::vector<double> fine;
            const int k = n / 100;
            for (std::size_t i = 0; i + 1 < grid.size(); ++i)
                for (int j = 0; j < k; ++j) fine.push_back(grid[i] * std::pow(grid[i + 1] / grid[i], double(j) / k));
            fine.push_back(grid.back());
            oracle::GridOptions opt;
            opt.f_grid = fine;
            opt.p_points = 200;
            const auto r = oracle::grid_search(pb, X, opt);
            ASSERT_TRUE(r.found());
            EXPECT_LE(r.cost, last + 1e-9);
            last = r.cost;
        }
    }
}

TEST(Oracle, DeterministicAcrossThreadCounts) {
    const auto pb = make_problem(Strategy::depot, kParams, kStats, kEnergy);
    oracle::GridOptions one;
    one.threads = 1;
    one.f_points = 3000;
    one.p_points = 300;
    oracle::GridOptions many = one;
    many.threads = 7;
    for (double X : {200.0, 900.0, 2500.0}) {
        const auto a = oracle::grid_search(pb, X, one);
        const auto b = oracle::grid_search(pb, X, many);
        EXPECT_EQ(a.f, b.f);
        EXPECT_EQ(a.P, b.P);
        EXPECT_EQ(a.cost, b.cost);
    }
}

TEST(Compare, Gaps) {
    const auto pb = core();
    const Design d = design_of(optimize(pb, 1000));
    oracle::Result same;
    same.status = oracle::Result::Status::found;
    same.f = d.f;
    same.P = d.P;
    same.cost = d.cost_total;
    const auto zero = oracle::compare(d, same);
    EXPECT_EQ(zero.cost_gap_rel, 0.0);
    EXPECT_EQ(zero.f_gap, 0.0);
    EXPECT_EQ(zero.P_gap, 0.0);
    Design worse = evaluate_cost(pb, 1000, d.f * 1.2, pb.min_pods(1000, d.f * 1.2));
    EXPECT_GT(oracle::compare(worse, same).cost_gap_rel, 0.0);
    EXPECT_THROW(oracle::compare(d, oracle::Result{}), std::invalid_argument);
}

TEST(Compare, RandomScenariosAllStrategies) {
    std::mt19937_64 rng(2024);
    for (Strategy s : {Strategy::core, Strategy::depot, Strategy::mobile}) {
        for (int i = 0; i < 25; ++i) {
            const auto sc = oracle::random_scenario(rng, s);
            const auto pb = make_problem(s, sc.params, sc.stats, sc.energy);
            const auto o = optimize(pb, sc.X);
            ASSERT_TRUE(is_feasible(o));
            const Design& d = std::get<Design>(o);
            EXPECT_TRUE(violated_constraints(pb, sc.X, d.f, d.P).empty());
            oracle::GridOptions opt;
            opt.f_points = 2000;
            opt.p_points = 300;
            const auto best = oracle::grid_search(pb, sc.X, opt);
            ASSERT_TRUE(best.found());
            EXPECT_LE(oracle::compare(d, best).cost_gap_rel, 1e-9) << to_string(s) << " X=" << sc.X;
        }
    }
}

TEST(Compare, InfeasibleDrawsAgree) {
    std::mt19937_64 rng(99);
    int infeasible = 0;
    for (int i = 0; i < 60; ++i) {
        const auto sc = oracle::random_scenario(rng, Strategy::mobile, false);
        const auto pb = make_problem(Strategy::mobile, sc.params, sc.stats, sc.energy);
        const auto o = optimize(pb, sc.X);
        if (is_feasible(o)) continue;
        ++infeasible;
        oracle::GridOptions opt;
        opt.f_points = 500;
        opt.p_points = 100;
        const auto r = oracle::grid_search(pb, sc.X, opt);
        EXPECT_EQ(r.status, oracle::Result::Status::infeasible);
        EXPECT_EQ(r.reason, std::get<Infeasibility>(o).reason);
    }
    EXPECT_GT(infeasible, 0);
}
