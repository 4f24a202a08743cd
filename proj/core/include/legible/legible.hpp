#pragma once

// Policy-legible planning: the legible reward is the posterior probability of
// the target goal given a single (state, action) pair, with per-goal
// likelihoods from a max-entropy model over the optimal Q-functions. Solving
// the resulting ordinary MDP yields the legible policy.

#include <memory>
#include <span>
#include <vector>

#include "legible/maze.hpp"
#include "legible/mdp.hpp"

namespace legible {

inline constexpr double kDefaultBeta = 1.0;

struct SolveSettings {
    double tolerance = kDefaultTolerance;
    std::size_t max_iterations = kDefaultMaxIterations;
};

// A goal family together with the optimal solution of every member.
struct SolvedFamily {
    GoalMdpFamily family;
    std::vector<SolveResult> optimal;  // label order

    std::size_t num_goals() const noexcept { return optimal.size(); }
};

SolvedFamily solve_family(GoalMdpFamily family, const SolveSettings& settings = {},
                          const Deadline& deadline = {});

class LegibleProblem {
public:
    // An empty prior means uniform. Throws std::invalid_argument when the
    // target is out of range, beta < 0, or the prior is not a distribution.
    LegibleProblem(std::shared_ptr<const SolvedFamily> solved, std::size_t target_goal,
                   double beta = kDefaultBeta, std::vector<double> goal_prior = {});

    const SolvedFamily& solved() const noexcept { return *solved_; }
    const std::shared_ptr<const SolvedFamily>& solved_ptr() const noexcept { return solved_; }
    const GoalMdpFamily& family() const noexcept { return solved_->family; }
    std::size_t target_goal() const noexcept { return target_; }
    std::size_t num_goals() const noexcept { return solved_->num_goals(); }
    double beta() const noexcept { return beta_; }
    std::span<const double> goal_prior() const noexcept { return prior_; }

    LegibleProblem with_target(std::size_t target_goal) const;

private:
    std::shared_ptr<const SolvedFamily> solved_;
    std::size_t target_;
    double beta_;
    std::vector<double> prior_;
};

// prior[n] exp(beta Q_n(x,a)) / sum_m prior[m] exp(beta Q_m(x,a)) for the
// problem's target n.
double legible_reward(const LegibleProblem& problem, StateId state, ActionId action);

// Dense [state][action] table of legible_reward.
std::vector<double> legible_reward_table(const LegibleProblem& problem);

struct LegibleSolution {
    SolveResult result;
    Policy policy;  // greedy in result
};

// Solves <X, A, P, r_leg, gamma> with the family's shared kernel and discount.
LegibleSolution solve_legible(const LegibleProblem& problem, const SolveSettings& settings = {},
                              const Deadline& deadline = {});

// Greedy optimal and legible policies for every goal of a solved family.
struct GoalPolicies {
    std::vector<Policy> optimal;
    std::vector<Policy> legible;

    const Policy& get(PolicyType type, std::size_t goal) const;
};

GoalPolicies make_goal_policies(const std::shared_ptr<const SolvedFamily>& solved,
                                double beta = kDefaultBeta, const SolveSettings& settings = {});

}  // namespace legible
