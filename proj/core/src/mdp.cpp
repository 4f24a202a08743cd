#include "legible/mdp.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "legible/errors.hpp"
#include "policy_system.hpp"

namespace legible {

TransitionKernel::TransitionKernel(std::size_t num_states, std::size_t num_actions,
                                   const std::vector<std::vector<Successor>>& rows,
                                   std::vector<bool> terminal)
    : num_states_(num_states), num_actions_(num_actions), terminal_(std::move(terminal)) {
    if (num_states == 0 || num_actions == 0) {
        throw InvalidModel("kernel needs at least one state and one action");
    }
    if (rows.size() != num_states * num_actions) {
        throw InvalidModel("kernel has " + std::to_string(rows.size()) + " rows, expected " +
                           std::to_string(num_states * num_actions));
    }
    if (terminal_.empty()) {
        terminal_.assign(num_states, false);
    } else if (terminal_.size() != num_states) {
        throw InvalidModel("terminal flags do not match the state count");
    }

    offsets_.reserve(rows.size() + 1);
    offsets_.push_back(0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double total = 0.0;
        for (const Successor& s : rows[r]) {
            if (s.state >= num_states) {
                throw InvalidModel("successor " + std::to_string(s.state) + " out of range in row " +
                                   std::to_string(r));
            }
            if (!(s.probability >= 0.0)) {
                throw InvalidModel("negative probability in row " + std::to_string(r));
            }
            total += s.probability;
            entries_.push_back(s);
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance) {
            throw InvalidModel("row " + std::to_string(r) + " (state " +
                               std::to_string(r / num_actions) + ", action " +
                               std::to_string(r % num_actions) + ") sums to " +
                               std::to_string(total));
        }
        offsets_.push_back(entries_.size());
    }
}

double TransitionKernel::probability(StateId state, ActionId action, StateId next) const {
    double p = 0.0;
    for (const Successor& s : successors(state, action)) {
        if (s.state == next) p += s.probability;
    }
    return p;
}

StateId TransitionKernel::sample(StateId state, ActionId action, Rng& rng) const {
    const auto row = successors(state, action);
    if (row.size() == 1) return row.front().state;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double cumulative = 0.0;
    for (const Successor& s : row) {
        cumulative += s.probability;
        if (u < cumulative) return s.state;
    }
    return row.back().state;
}

TabularMdp::TabularMdp(std::shared_ptr<const TransitionKernel> kernel, std::vector<double> rewards,
                       double discount)
    : kernel_(std::move(kernel)), rewards_(std::move(rewards)), discount_(discount) {
    if (!kernel_) throw InvalidModel("null transition kernel");
    if (rewards_.size() != kernel_->num_states() * kernel_->num_actions()) {
        throw InvalidModel("reward table has " + std::to_string(rewards_.size()) +
                           " entries, expected " +
                           std::to_string(kernel_->num_states() * kernel_->num_actions()));
    }
    if (!(discount_ >= 0.0 && discount_ < 1.0)) {
        throw InvalidModel("discount must lie in [0, 1), got " + std::to_string(discount_));
    }
    for (double r : rewards_) {
        if (!std::isfinite(r)) throw InvalidModel("non-finite reward");
    }
}

SolveResult value_iterate(const TabularMdp& mdp, double tolerance, std::size_t max_iterations,
                          const Deadline& deadline) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_iterations == 0) throw std::invalid_argument("max_iterations must be >= 1");

    const std::size_t S = mdp.num_states();
    const std::size_t A = mdp.num_actions();
    const double gamma = mdp.discount();
    const auto rewards = mdp.rewards();

    SolveResult result;
    result.num_actions = A;
    result.values.assign(S, 0.0);
    result.q_table.assign(S * A, 0.0);
    std::vector<double> next_values(S, 0.0);

    for (std::size_t sweep = 0; sweep < max_iterations; ++sweep) {
        if (deadline.expired()) throw TimeoutError("value iteration exceeded its deadline");
        double residual = 0.0;
        for (StateId x = 0; x < S; ++x) {
            double best = -std::numeric_limits<double>::infinity();
            for (ActionId a = 0; a < A; ++a) {
                double expected = 0.0;
                for (const Successor& s : mdp.successors(x, a)) {
                    expected += s.probability * result.values[s.state];
                }
                const double q = rewards[x * A + a] + gamma * expected;
                result.q_table[x * A + a] = q;
                best = std::max(best, q);
            }
            next_values[x] = best;
            residual = std::max(residual, std::abs(best - result.values[x]));
        }
        result.values.swap(next_values);
        result.iterations = sweep + 1;
        result.residual = residual;
        result.residual_trace.push_back(residual);
        if (residual <= tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

Policy Policy::deterministic(std::vector<ActionId> actions, std::size_t num_actions) {
    for (ActionId a : actions) {
        if (a >= num_actions) throw std::invalid_argument("action index out of range");
    }
    Policy p;
    p.kind_ = Kind::deterministic;
    p.num_states_ = actions.size();
    p.num_actions_ = num_actions;
    p.actions_ = std::move(actions);
    return p;
}

Policy Policy::stochastic(std::vector<double> probabilities, std::size_t num_actions) {
    if (num_actions == 0 || probabilities.size() % num_actions != 0) {
        throw std::invalid_argument("probability table is not a whole number of rows");
    }
    Policy p;
    p.kind_ = Kind::stochastic;
    p.num_states_ = probabilities.size() / num_actions;
    p.num_actions_ = num_actions;
    for (std::size_t x = 0; x < p.num_states_; ++x) {
        double total = 0.0;
        for (std::size_t a = 0; a < num_actions; ++a) {
            const double v = probabilities[x * num_actions + a];
            if (!(v >= 0.0)) throw std::invalid_argument("negative action probability");
            total += v;
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance) {
            throw std::invalid_argument("policy row " + std::to_string(x) + " sums to " +
                                        std::to_string(total));
        }
    }
    p.probabilities_ = std::move(probabilities);
    return p;
}

ActionId Policy::action(StateId state) const {
    if (!is_deterministic()) throw std::logic_error("action() on a stochastic policy");
    return actions_.at(state);
}

double Policy::probability(StateId state, ActionId action) const {
    if (is_deterministic()) return actions_.at(state) == action ? 1.0 : 0.0;
    return probabilities_.at(state * num_actions_ + action);
}

ActionId Policy::sample(StateId state, Rng& rng) const {
    if (is_deterministic()) return actions_.at(state);
    const auto probs = row(state);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double cumulative = 0.0;
    for (ActionId a = 0; a < probs.size(); ++a) {
        cumulative += probs[a];
        if (u < cumulative) return a;
    }
    // Rounding left u above the final cumulative sum; fall back to the last
    // action with mass.
    for (ActionId a = probs.size(); a-- > 0;) {
        if (probs[a] > 0.0) return a;
    }
    return 0;
}

ActionId argmax_action(std::span<const double> q_row, double tie_tolerance) {
    const double best = *std::max_element(q_row.begin(), q_row.end());
    const double slack = tie_tolerance * std::max(std::abs(best), std::numeric_limits<double>::min());
    for (ActionId a = 0; a < q_row.size(); ++a) {
        if (q_row[a] >= best - slack) return a;
    }
    return 0;
}

Policy greedy_policy(const SolveResult& result, double tie_tolerance) {
    std::vector<ActionId> actions(result.num_states());
    for (StateId x = 0; x < actions.size(); ++x) {
        actions[x] = argmax_action(result.q_row(x), tie_tolerance);
    }
    return Policy::deterministic(std::move(actions), result.num_actions);
}

void softmax(std::span<const double> values, double scale, std::span<double> out) {
    double top = -std::numeric_limits<double>::infinity();
    for (double v : values) top = std::max(top, scale * v);
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = std::exp(scale * values[i] - top);
        total += out[i];
    }
    for (double& o : out) o /= total;
}

double log_sum_exp(std::span<const double> values, double scale) {
    double top = -std::numeric_limits<double>::infinity();
    for (double v : values) top = std::max(top, scale * v);
    double total = 0.0;
    for (double v : values) total += std::exp(scale * v - top);
    return top + std::log(total);
}

Policy boltzmann_policy(const SolveResult& result, double temperature_inverse) {
    if (!(temperature_inverse >= 0.0)) {
        throw std::invalid_argument("temperature_inverse must be >= 0");
    }
    const std::size_t A = result.num_actions;
    std::vector<double> probabilities(result.q_table.size());
    for (StateId x = 0; x < result.num_states(); ++x) {
        softmax(result.q_row(x), temperature_inverse,
                std::span<double>(probabilities.data() + x * A, A));
    }
    return Policy::stochastic(std::move(probabilities), A);
}

namespace detail {

Eigen::SparseMatrix<double> policy_system(const TabularMdp& mdp, const Policy& policy) {
    const std::size_t S = mdp.num_states();
    const std::size_t A = mdp.num_actions();
    if (policy.num_states() != S || policy.num_actions() != A) {
        throw std::invalid_argument("policy shape does not match the MDP");
    }
    const double gamma = mdp.discount();
    std::vector<Eigen::Triplet<double>> triplets;
    for (StateId x = 0; x < S; ++x) {
        const auto ix = static_cast<Eigen::Index>(x);
        triplets.emplace_back(ix, ix, 1.0);
        for (ActionId a = 0; a < A; ++a) {
            const double pa = policy.probability(x, a);
            if (pa == 0.0) continue;
            for (const Successor& s : mdp.successors(x, a)) {
                triplets.emplace_back(ix, static_cast<Eigen::Index>(s.state),
                                      -gamma * pa * s.probability);
            }
        }
    }
    Eigen::SparseMatrix<double> system(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    system.setFromTriplets(triplets.begin(), triplets.end());
    system.makeCompressed();
    return system;
}

Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& system,
                             const Eigen::VectorXd& rhs) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(system);
    if (solver.info() != Eigen::Success) throw InvalidModel("policy evaluation system is singular");
    return solver.solve(rhs);
}

}  // namespace detail

std::vector<double> evaluate_policy(const TabularMdp& mdp, const Policy& policy) {
    const auto system = detail::policy_system(mdp, policy);
    Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(system.rows());
    for (StateId x = 0; x < mdp.num_states(); ++x) {
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            r_pi[static_cast<Eigen::Index>(x)] += policy.probability(x, a) * mdp.reward(x, a);
        }
    }
    const Eigen::VectorXd v = detail::solve_sparse(system, r_pi);
    return {v.data(), v.data() + v.size()};
}

const char* to_string(PolicyType type) {
    switch (type) {
        case PolicyType::optimal: return "optimal";
        case PolicyType::legible: return "legible";
        case PolicyType::lmdp: return "lmdp";
        case PolicyType::other: break;
    }
    return "other";
}

Trajectory rollout(const TabularMdp& mdp, const Policy& policy, StateId start,
                   std::size_t horizon, std::uint64_t rng_seed) {
    if (start >= mdp.num_states()) throw std::invalid_argument("start state out of range");
    if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");

    const TransitionKernel& kernel = mdp.kernel();
    Rng rng(rng_seed);
    Trajectory trajectory;
    trajectory.final_state = start;
    if (kernel.is_terminal(start)) {
        trajectory.reached_terminal = true;
        return trajectory;
    }
    StateId state = start;
    for (std::size_t t = 0; t < horizon; ++t) {
        const ActionId action = policy.sample(state, rng);
        trajectory.steps.push_back({t, state, action});
        state = kernel.sample(state, action, rng);
        if (kernel.is_terminal(state)) {
            trajectory.reached_terminal = true;
            break;
        }
    }
    trajectory.final_state = state;
    return trajectory;
}

}  // namespace legible
