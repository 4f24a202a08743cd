#include "legible/legible.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace legible {

SolvedFamily solve_family(GoalMdpFamily family, const SolveSettings& settings,
                          const Deadline& deadline) {
    SolvedFamily solved{std::move(family), {}};
    solved.optimal.reserve(solved.family.num_goals());
    for (const TabularMdp& mdp : solved.family.mdps) {
        solved.optimal.push_back(
            value_iterate(mdp, settings.tolerance, settings.max_iterations, deadline));
    }
    return solved;
}

LegibleProblem::LegibleProblem(std::shared_ptr<const SolvedFamily> solved, std::size_t target_goal,
                               double beta, std::vector<double> goal_prior)
    : solved_(std::move(solved)), target_(target_goal), beta_(beta), prior_(std::move(goal_prior)) {
    if (!solved_) throw std::invalid_argument("legible problem needs a solved family");
    const std::size_t n = solved_->num_goals();
    if (n == 0 || n != solved_->family.num_goals()) {
        throw std::invalid_argument("per-goal Q-tables do not match the goal count");
    }
    if (target_ >= n) throw std::invalid_argument("target goal out of range");
    if (!(beta_ >= 0.0) || !std::isfinite(beta_)) throw std::invalid_argument("beta must be >= 0");
    if (prior_.empty()) prior_.assign(n, 1.0 / static_cast<double>(n));
    if (prior_.size() != n) throw std::invalid_argument("goal prior has the wrong length");
    double total = 0.0;
    for (double p : prior_) {
        if (!(p >= 0.0)) throw std::invalid_argument("goal prior has a negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw std::invalid_argument("goal prior does not sum to 1");
    }
}

LegibleProblem LegibleProblem::with_target(std::size_t target_goal) const {
    return LegibleProblem(solved_, target_goal, beta_, prior_);
}

double legible_reward(const LegibleProblem& problem, StateId state, ActionId action) {
    const auto& optimal = problem.solved().optimal;
    const auto prior = problem.goal_prior();
    const std::size_t target = problem.target_goal();
    if (prior[target] == 0.0) return 0.0;

    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < optimal.size(); ++m) {
        if (prior[m] > 0.0) top = std::max(top, problem.beta() * optimal[m].q(state, action));
    }
    double total = 0.0;
    double own = 0.0;
    for (std::size_t m = 0; m < optimal.size(); ++m) {
        if (prior[m] == 0.0) continue;
        const double term = prior[m] * std::exp(problem.beta() * optimal[m].q(state, action) - top);
        total += term;
        if (m == target) own = term;
    }
    return own / total;
}

std::vector<double> legible_reward_table(const LegibleProblem& problem) {
    const std::size_t S = problem.family().num_states();
    const std::size_t A = problem.family().num_actions();
    std::vector<double> table(S * A);
    for (StateId x = 0; x < S; ++x) {
        for (ActionId a = 0; a < A; ++a) table[x * A + a] = legible_reward(problem, x, a);
    }
    return table;
}

LegibleSolution solve_legible(const LegibleProblem& problem, const SolveSettings& settings,
                              const Deadline& deadline) {
    const GoalMdpFamily& family = problem.family();
    const TabularMdp legible_mdp(family.shared_kernel(), legible_reward_table(problem),
                                 family.discount());
    SolveResult result =
        value_iterate(legible_mdp, settings.tolerance, settings.max_iterations, deadline);
    Policy policy = greedy_policy(result);
    return {std::move(result), std::move(policy)};
}

const Policy& GoalPolicies::get(PolicyType type, std::size_t goal) const {
    switch (type) {
        case PolicyType::optimal: return optimal.at(goal);
        case PolicyType::legible: return legible.at(goal);
        default: break;
    }
    throw std::invalid_argument("no stored policy of that type");
}

GoalPolicies make_goal_policies(const std::shared_ptr<const SolvedFamily>& solved, double beta,
                                const SolveSettings& settings) {
    GoalPolicies policies;
    for (std::size_t n = 0; n < solved->num_goals(); ++n) {
        policies.optimal.push_back(greedy_policy(solved->optimal[n]));
        policies.legible.push_back(
            solve_legible(LegibleProblem(solved, n, beta), settings).policy);
    }
    return policies;
}

}  // namespace legible
