#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "legible/errors.hpp"
#include "legible/mdp.hpp"
#include "support.hpp"

namespace legible {
namespace {

TabularMdp single_state(double reward, double gamma) {
    auto kernel = std::make_shared<const TransitionKernel>(
        1, 1, std::vector<std::vector<Successor>>{{{0, 1.0}}});
    return TabularMdp(kernel, {reward}, gamma);
}

TEST(ValueIteration, AbsorbingStateSumsGeometricSeries) {
    const SolveResult r = value_iterate(single_state(1.0, 0.9), 1e-10);
    EXPECT_NEAR(r.values[0], 10.0, 1e-8);
    EXPECT_TRUE(r.converged);
}

TEST(ValueIteration, ZeroRewardGivesZeroValues) {
    TabularMdp mdp = oracle::random_mdp(30, 4, 7);
    mdp = TabularMdp(mdp.shared_kernel(), std::vector<double>(30 * 4, 0.0), 0.9);
    const SolveResult r = value_iterate(mdp);
    for (double v : r.values) EXPECT_EQ(v, 0.0);
    for (double q : r.q_table) EXPECT_EQ(q, 0.0);
}

TEST(ValueIteration, MatchesBackwardInductionOnOpenMaze) {
    const GoalMdpFamily family = build_family(parse_maze("...\n...\n..A\n"));
    const TabularMdp& mdp = family.mdps[0];
    const SolveResult r = value_iterate(mdp, 1e-10);
    const std::vector<double> q = oracle::backward_induction(mdp, 200);
    ASSERT_EQ(r.q_table.size(), q.size());
    for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(r.q_table[i], q[i], 1e-4) << i;
}

TEST(ValueIteration, GreedyMatchesOracleArgmaxWhereGapIsClear) {
    const GoalMdpFamily family = build_family(parse_maze("...\n...\n..A\n"));
    const TabularMdp& mdp = family.mdps[0];
    const Policy greedy = greedy_policy(value_iterate(mdp, 1e-10));
    const std::vector<double> q = oracle::backward_induction(mdp, 200);
    const std::size_t A = mdp.num_actions();
    for (StateId x = 0; x < mdp.num_states(); ++x) {
        std::vector<double> row(q.begin() + static_cast<std::ptrdiff_t>(x * A),
                                q.begin() + static_cast<std::ptrdiff_t>((x + 1) * A));
        std::vector<double> sorted = row;
        std::sort(sorted.rbegin(), sorted.rend());
        if (sorted[0] - sorted[1] <= 1e-3) continue;
        const auto best = static_cast<ActionId>(std::max_element(row.begin(), row.end()) - row.begin());
        EXPECT_EQ(greedy.action(x), best) << "state " << x;
    }
}

TEST(ValueIteration, ResidualTraceIsNonIncreasing) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SolveResult r = value_iterate(oracle::random_mdp(60, 4, seed), 1e-9);
        ASSERT_FALSE(r.residual_trace.empty());
        for (std::size_t i = 1; i < r.residual_trace.size(); ++i) {
            EXPECT_LE(r.residual_trace[i], r.residual_trace[i - 1] + 1e-15);
        }
        EXPECT_LE(r.residual, 1e-9);
        EXPECT_EQ(r.residual, r.residual_trace.back());
    }
}

TEST(ValueIteration, ValuesAreRowMaximaOfQ) {
    const SolveResult r = value_iterate(oracle::random_mdp(50, 5, 3));
    for (StateId x = 0; x < r.num_states(); ++x) {
        const auto row = r.q_row(x);
        EXPECT_NEAR(r.values[x], *std::max_element(row.begin(), row.end()), 1e-9);
    }
}

TEST(ValueIteration, ReportsNonConvergenceWithoutThrowing) {
    const SolveResult r = value_iterate(oracle::random_mdp(20, 3, 1), 1e-12, 3);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 3u);
    EXPECT_GT(r.residual, 1e-12);
}

TEST(ValueIteration, ExpiredDeadlineThrows) {
    EXPECT_THROW(value_iterate(oracle::random_mdp(20, 3, 1), 1e-6, 100, Deadline::after_seconds(0.0)),
                 TimeoutError);
}

TEST(ValueIteration, IsDeterministic) {
    const TabularMdp mdp = oracle::random_mdp(40, 4, 11);
    EXPECT_EQ(value_iterate(mdp).q_table, value_iterate(mdp).q_table);
}

TEST(ValueIteration, OptimalValueDominatesRandomPolicies) {
    const TabularMdp mdp = oracle::random_mdp(100, 4, 21);
    const SolveResult r = value_iterate(mdp, 1e-10);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<ActionId> pick(0, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto make_policy = [&] {
            if (trial % 2 == 0) {
                std::vector<ActionId> actions(100);
                for (ActionId& a : actions) a = pick(rng);
                return Policy::deterministic(std::move(actions), 4);
            }
            std::vector<double> p(400);
            for (std::size_t x = 0; x < 100; ++x) {
                double total = 0.0;
                for (std::size_t a = 0; a < 4; ++a) total += p[x * 4 + a] = unit(rng);
                for (std::size_t a = 0; a < 4; ++a) p[x * 4 + a] /= total;
            }
            return Policy::stochastic(std::move(p), 4);
        };
        const Policy policy = make_policy();
        const std::vector<double> v = evaluate_policy(mdp, policy);
        for (StateId x = 0; x < 100; ++x) EXPECT_GE(r.values[x], v[x] - 1e-6);
    }
}

TEST(ValueIteration, ExactEvaluationOfGreedyPolicyMatchesValues) {
    const TabularMdp mdp = oracle::random_mdp(80, 3, 4);
    const SolveResult r = value_iterate(mdp, 1e-12);
    const std::vector<double> v = evaluate_policy(mdp, greedy_policy(r));
    for (StateId x = 0; x < 80; ++x) EXPECT_NEAR(v[x], r.values[x], 1e-9);
}

TEST(TabularMdp, RejectsUnnormalizedRows) {
    const std::vector<std::vector<Successor>> rows{{{0, 0.5}, {1, 0.4}}, {{1, 1.0}}};
    EXPECT_THROW(TransitionKernel(2, 1, rows), InvalidModel);
}

TEST(TabularMdp, RejectsOutOfRangeSuccessor) {
    const std::vector<std::vector<Successor>> rows{{{2, 1.0}}, {{1, 1.0}}};
    EXPECT_THROW(TransitionKernel(2, 1, rows), InvalidModel);
}

TEST(TabularMdp, RejectsDiscountOfOne) {
    auto kernel = std::make_shared<const TransitionKernel>(
        1, 1, std::vector<std::vector<Successor>>{{{0, 1.0}}});
    EXPECT_THROW(TabularMdp(kernel, {0.0}, 1.0), InvalidModel);
    EXPECT_THROW(TabularMdp(kernel, {0.0, 1.0}, 0.5), InvalidModel);
}

TEST(GreedyPolicy, FullTiePicksFirstAction) {
    const std::vector<double> row{0.0, 0.0, 0.0, 0.0, 0.0};
    EXPECT_EQ(argmax_action(row), 0u);
}

TEST(GreedyPolicy, PartialTiePicksLowestIndex) {
    const std::vector<double> row{1.0, 3.0, 2.0, 3.0, 0.0};
    EXPECT_EQ(argmax_action(row), 1u);
    EXPECT_EQ(greedy_policy(oracle::result_from_q(row, 5)).action(0), 1u);
}

TEST(GreedyPolicy, InvariantUnderRewardShiftAndScale) {
    const TabularMdp mdp = oracle::random_mdp(60, 4, 9);
    const Policy base = greedy_policy(value_iterate(mdp, 1e-12));
    for (const auto& [shift, scale] : {std::pair{5.0, 1.0}, std::pair{-3.0, 1.0}, std::pair{0.0, 7.5},
                                       std::pair{2.0, 0.25}}) {
        std::vector<double> rewards(mdp.rewards().begin(), mdp.rewards().end());
        for (double& r : rewards) r = scale * r + shift;
        const TabularMdp moved(mdp.shared_kernel(), rewards, mdp.discount());
        EXPECT_EQ(greedy_policy(value_iterate(moved, 1e-12)).actions(), base.actions())
            << "shift " << shift << " scale " << scale;
    }
}

TEST(BoltzmannPolicy, ZeroInverseTemperatureIsUniform) {
    const Policy p = boltzmann_policy(value_iterate(oracle::random_mdp(10, 5, 2)), 0.0);
    for (StateId x = 0; x < 10; ++x) {
        for (ActionId a = 0; a < 5; ++a) EXPECT_DOUBLE_EQ(p.probability(x, a), 0.2);
    }
}

TEST(BoltzmannPolicy, IdenticalQRowIsUniform) {
    const Policy p = boltzmann_policy(oracle::result_from_q({4.0, 4.0, 4.0}, 3), 50.0);
    for (ActionId a = 0; a < 3; ++a) EXPECT_NEAR(p.probability(0, a), 1.0 / 3.0, 1e-12);
}

TEST(BoltzmannPolicy, TwoActionSoftmax) {
    const Policy p = boltzmann_policy(oracle::result_from_q({1.0, 2.0}, 2), 1.0);
    const double e = std::exp(1.0);
    EXPECT_NEAR(p.probability(0, 0), 1.0 / (1.0 + e), 1e-12);
    EXPECT_NEAR(p.probability(0, 1), e / (1.0 + e), 1e-12);
    EXPECT_NEAR(p.probability(0, 0), 0.2689, 1e-4);
}

TEST(BoltzmannPolicy, RowsStayNormalizedAtLargeInverseTemperature) {
    const SolveResult r = value_iterate(oracle::random_mdp(50, 5, 8));
    for (double eta : {1.0, 10.0, 100.0, 1000.0}) {
        const Policy p = boltzmann_policy(r, eta);
        for (StateId x = 0; x < 50; ++x) {
            const auto row = p.row(x);
            double total = 0.0;
            for (double v : row) {
                EXPECT_TRUE(std::isfinite(v));
                EXPECT_GE(v, 0.0);
                total += v;
            }
            EXPECT_NEAR(total, 1.0, 1e-9);
        }
    }
}

TEST(Rollout, HorizonOneGivesOneStep) {
    const GoalMdpFamily family = build_family(parse_maze("....A\n"));
    const Policy greedy = greedy_policy(value_iterate(family.mdps[0]));
    const Trajectory t = rollout(family.mdps[0], greedy, 0, 1, 3);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.steps[0].state, 0u);
    EXPECT_EQ(t.steps[0].t, 0u);
}

TEST(Rollout, WallLockedCellNeverMoves) {
    const MazeSpec spec = parse_maze("A#.\n###\n");
    const GoalMdpFamily family = build_family(spec);
    const Policy greedy = greedy_policy(value_iterate(family.mdps[0]));
    const StateId locked = spec.state_of({0, 2});
    const Trajectory t = rollout(family.mdps[0], greedy, locked, 25, 1);
    ASSERT_EQ(t.size(), 25u);
    for (const Step& s : t.steps) EXPECT_EQ(s.state, locked);
    EXPECT_EQ(t.final_state, locked);
}

TEST(Rollout, SameSeedSameTrajectory) {
    const GoalMdpFamily family = build_family(oracle::fixture("states_10x10"));
    const Policy greedy = greedy_policy(value_iterate(family.mdps[2]));
    const StateId start = family.spec.state_of(family.spec.free_non_goal_cells().front());
    EXPECT_EQ(rollout(family.mdps[2], greedy, start, 40, 99),
              rollout(family.mdps[2], greedy, start, 40, 99));
}

TEST(Rollout, StopsOnEnteringGoal) {
    const GoalMdpFamily family = build_family(parse_maze("..A\n", 0.0));
    const Policy greedy = greedy_policy(value_iterate(family.mdps[0]));
    const Trajectory t = rollout(family.mdps[0], greedy, 0, 10, 0);
    EXPECT_EQ(t.size(), 2u);
    EXPECT_TRUE(t.reached_terminal);
    EXPECT_EQ(t.final_state, 2u);
}

TEST(Softmax, MatchesLogSumExp) {
    const std::vector<double> v{700.0, 701.0, 699.5};
    std::vector<double> out(3);
    softmax(v, 1.0, out);
    const double lse = log_sum_exp(v, 1.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out[i], std::exp(v[i] - lse), 1e-12);
}

}  // namespace
}  // namespace legible
