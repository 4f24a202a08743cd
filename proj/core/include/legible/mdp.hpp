#pragma once

// Tabular MDPs with a shared sparse transition kernel, exact dynamic
// programming, and the policies derived from a solved Q-table.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "legible/deadline.hpp"

namespace legible {

using StateId = std::size_t;
using ActionId = std::size_t;
using Rng = std::mt19937_64;

inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr double kDefaultTolerance = 1e-6;
inline constexpr std::size_t kDefaultMaxIterations = 10000;

struct Successor {
    StateId state;
    double probability;

    bool operator==(const Successor&) const = default;
};

// P(y | x, a) stored row-compressed: one contiguous successor list per
// (state, action). States flagged terminal end rollouts on entry.
class TransitionKernel {
public:
    // rows[state * num_actions + action] lists that pair's successors.
    TransitionKernel(std::size_t num_states, std::size_t num_actions,
                     const std::vector<std::vector<Successor>>& rows,
                     std::vector<bool> terminal = {});

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }

    std::span<const Successor> successors(StateId state, ActionId action) const {
        const std::size_t row = state * num_actions_ + action;
        return {entries_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
    }

    // Probability of landing in `next`; 0 when not listed.
    double probability(StateId state, ActionId action, StateId next) const;

    bool is_terminal(StateId state) const { return terminal_[state]; }
    const std::vector<bool>& terminal() const noexcept { return terminal_; }

    StateId sample(StateId state, ActionId action, Rng& rng) const;

    bool operator==(const TransitionKernel&) const = default;

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<std::size_t> offsets_;
    std::vector<Successor> entries_;
    std::vector<bool> terminal_;
};

// <X, A, P, r, gamma>. Immutable after construction; the kernel may be shared
// between MDPs that differ only in reward.
class TabularMdp {
public:
    // Throws InvalidModel when a row fails to normalize, an index is out of
    // range, the reward table has the wrong size, or discount is outside [0,1).
    TabularMdp(std::shared_ptr<const TransitionKernel> kernel, std::vector<double> rewards,
               double discount);

    std::size_t num_states() const noexcept { return kernel_->num_states(); }
    std::size_t num_actions() const noexcept { return kernel_->num_actions(); }
    double discount() const noexcept { return discount_; }

    const TransitionKernel& kernel() const noexcept { return *kernel_; }
    const std::shared_ptr<const TransitionKernel>& shared_kernel() const noexcept {
        return kernel_;
    }

    double reward(StateId state, ActionId action) const {
        return rewards_[state * num_actions() + action];
    }
    std::span<const double> rewards() const noexcept { return rewards_; }

    std::span<const Successor> successors(StateId state, ActionId action) const {
        return kernel_->successors(state, action);
    }

private:
    std::shared_ptr<const TransitionKernel> kernel_;
    std::vector<double> rewards_;
    double discount_;
};

struct SolveResult {
    std::vector<double> values;   // v*
    std::vector<double> q_table;  // q*, row-major [state][action]
    std::size_t num_actions = 0;
    std::size_t iterations = 0;
    double residual = 0.0;  // max-norm change of the final sweep
    bool converged = false;
    std::vector<double> residual_trace;  // one entry per sweep

    std::size_t num_states() const noexcept { return values.size(); }
    double q(StateId state, ActionId action) const {
        return q_table[state * num_actions + action];
    }
    std::span<const double> q_row(StateId state) const {
        return {q_table.data() + state * num_actions, num_actions};
    }
};

// Synchronous value iteration. Stops once the max-norm Bellman residual is
// <= tolerance or after max_iterations sweeps; non-convergence is reported
// through `converged`/`residual`, not thrown. Throws TimeoutError if the
// deadline passes between sweeps.
SolveResult value_iterate(const TabularMdp& mdp, double tolerance = kDefaultTolerance,
                          std::size_t max_iterations = kDefaultMaxIterations,
                          const Deadline& deadline = {});

class Policy {
public:
    enum class Kind { deterministic, stochastic };

    static Policy deterministic(std::vector<ActionId> actions, std::size_t num_actions);
    // `probabilities` is row-major [state][action]; rows must sum to 1.
    static Policy stochastic(std::vector<double> probabilities, std::size_t num_actions);

    Kind kind() const noexcept { return kind_; }
    bool is_deterministic() const noexcept { return kind_ == Kind::deterministic; }
    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }

    // Deterministic policies only.
    ActionId action(StateId state) const;
    const std::vector<ActionId>& actions() const noexcept { return actions_; }

    double probability(StateId state, ActionId action) const;
    // Stochastic policies only.
    std::span<const double> row(StateId state) const {
        return {probabilities_.data() + state * num_actions_, num_actions_};
    }

    ActionId sample(StateId state, Rng& rng) const;

private:
    Policy() = default;

    Kind kind_ = Kind::deterministic;
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::vector<ActionId> actions_;
    std::vector<double> probabilities_;
};

// Relative width inside which Q-values count as tied.
inline constexpr double kTieTolerance = 1e-12;

// argmax of a Q row, lowest index among (near-)ties.
ActionId argmax_action(std::span<const double> q_row, double tie_tolerance = kTieTolerance);

Policy greedy_policy(const SolveResult& result, double tie_tolerance = kTieTolerance);

// pi(a|x) proportional to exp(temperature_inverse * q(x,a)).
Policy boltzmann_policy(const SolveResult& result, double temperature_inverse);

// Max-subtracted softmax of scale * values, written to `out`.
void softmax(std::span<const double> values, double scale, std::span<double> out);
double log_sum_exp(std::span<const double> values, double scale);

// Exact v^pi by a sparse linear solve of (I - gamma P_pi) v = r_pi.
std::vector<double> evaluate_policy(const TabularMdp& mdp, const Policy& policy);

enum class PolicyType { optimal, legible, lmdp, other };

const char* to_string(PolicyType type);

struct Step {
    std::size_t t;
    StateId state;
    ActionId action;

    bool operator==(const Step&) const = default;
};

struct Trajectory {
    std::vector<Step> steps;
    StateId final_state = 0;  // state after the last action
    bool reached_terminal = false;
    std::optional<std::size_t> true_goal;
    PolicyType policy_type = PolicyType::other;

    std::size_t size() const noexcept { return steps.size(); }
    bool empty() const noexcept { return steps.empty(); }
    // State observed after step i.
    StateId next_state(std::size_t i) const {
        return i + 1 < steps.size() ? steps[i + 1].state : final_state;
    }

    bool operator==(const Trajectory&) const = default;
};

// Samples up to `horizon` steps; stops early after entering a terminal state.
// A terminal start yields an empty trajectory.
Trajectory rollout(const TabularMdp& mdp, const Policy& policy, StateId start,
                   std::size_t horizon, std::uint64_t rng_seed);

}  // namespace legible
