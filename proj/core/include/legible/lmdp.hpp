#pragma once

// Belief-based legibility baseline. A simulated observer keeps a belief over
// goals, updated by Bayes' rule from each observed (x, a, x') with a
// Boltzmann model of the agent; an online UCT search over (state, belief)
// trades task reward against the distance from that belief to the one-hot
// belief on the true goal.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "legible/legible.hpp"
#include "legible/mdp.hpp"

namespace legible {

struct BeliefState {
    std::vector<double> probabilities;

    static BeliefState uniform(std::size_t num_goals);
    static BeliefState one_hot(std::size_t num_goals, std::size_t goal);

    std::size_t size() const noexcept { return probabilities.size(); }
    double operator[](std::size_t i) const { return probabilities[i]; }
    // Nonnegative and summing to 1 within kProbabilityTolerance.
    bool is_valid() const;

    bool operator==(const BeliefState&) const = default;
};

// pi_hat(a | x, goal) for every goal: a Boltzmann policy over each goal's
// optimal Q with inverse temperature observer_eta. Computed once per family.
class ObserverModel {
public:
    ObserverModel(const SolvedFamily& solved, double observer_eta);

    std::size_t num_goals() const noexcept { return num_goals_; }
    double observer_eta() const noexcept { return eta_; }
    double likelihood(std::size_t goal, StateId state, ActionId action) const {
        return likelihood_[(goal * num_states_ + state) * num_actions_ + action];
    }

private:
    std::size_t num_goals_;
    std::size_t num_states_;
    std::size_t num_actions_;
    double eta_;
    std::vector<double> likelihood_;
};

struct BeliefUpdate {
    BeliefState belief;
    // The unnormalized posterior vanished; `belief` is the prior unchanged.
    bool degenerate = false;
};

// b'(g) proportional to T(x'|x,a) pi_hat(a|x,g) b(g). The kernel is shared by
// every goal, so T cancels after the feasibility check. Throws
// ImpossibleTransition when T(x'|x,a) = 0.
BeliefUpdate belief_update(const BeliefState& belief, StateId prev_state, ActionId action,
                           StateId next_state, const TransitionKernel& kernel,
                           const ObserverModel& observer);

// Same update, evaluating pi_hat on the fly from the solved family.
BeliefUpdate belief_update(const BeliefState& belief, StateId prev_state, ActionId action,
                           StateId next_state, const SolvedFamily& solved, double observer_eta);

enum class DistanceKind { kl, euclidean, tv };

const char* to_string(DistanceKind kind);

inline constexpr double kDefaultKlCap = 1e6;

// kl: sum_g target(g) log(target(g) / belief(g)), capped at kl_cap when the
// belief has no mass where the target does. euclidean: 2-norm of the
// difference. tv: half the L1 difference.
double belief_distance(const BeliefState& belief, const BeliefState& target, DistanceKind kind,
                       double kl_cap = kDefaultKlCap);

enum class RolloutPolicy { random, boltzmann };

struct UctConfig {
    std::size_t iterations_per_step = 2000;
    double exploration_constant = 1.4142135623730951;  // times return_scale()
    std::size_t rollout_horizon = 25;  // total simulated depth per iteration
    RolloutPolicy rollout_policy = RolloutPolicy::random;
    DistanceKind distance_kind = DistanceKind::kl;
    double legibility_weight = 1.0;
    std::uint64_t rng_seed = 0;
    double observer_eta = 1.0;
    double kl_cap = kDefaultKlCap;
    std::optional<double> episode_time_budget_secs;

    // Throws std::invalid_argument.
    void validate() const;
};

struct UctSearchResult {
    ActionId action = 0;
    std::vector<std::size_t> visit_counts;  // per root action
    std::vector<double> mean_returns;       // per root action, 0 if unvisited
};

class LmdpPlanner {
public:
    LmdpPlanner(std::shared_ptr<const SolvedFamily> solved, UctConfig config);

    const UctConfig& config() const noexcept { return config_; }
    const SolvedFamily& solved() const noexcept { return *solved_; }
    const ObserverModel& observer() const noexcept { return observer_; }
    // Boltzmann rollout policy for `goal`; only with RolloutPolicy::boltzmann.
    const Policy& rollout_policy(std::size_t goal) const;

    // One UCT search from (current, belief). The root action is the most
    // visited, lowest index on ties. Deterministic for a fixed seed. Throws
    // TimeoutError if the deadline passes mid-search.
    UctSearchResult search(StateId current, const BeliefState& belief, std::size_t true_goal,
                           std::uint64_t seed, const Deadline& deadline = {}) const;

    // legibility_weight * distance(b', one_hot(true_goal)).
    double legibility_penalty(const BeliefState& next_belief, std::size_t true_goal) const;

    // r_task(x,a) - legibility_penalty(b', true_goal).
    double step_reward(StateId state, ActionId action, const BeliefState& next_belief,
                       std::size_t true_goal) const;

    // Continuation value after entering an absorbing goal cell with belief
    // b': V*_true(goal) minus the penalty of b' repeated forever.
    double terminal_value(StateId goal_state, const BeliefState& belief,
                          std::size_t true_goal) const;

    // Typical magnitude of a return: the largest optimal task value plus the
    // uniform-belief penalty held forever. The UCB bonus is scaled by it.
    double return_scale(std::size_t true_goal) const;

private:
    std::shared_ptr<const SolvedFamily> solved_;
    UctConfig config_;
    ObserverModel observer_;
    std::vector<Policy> rollout_policies_;  // Boltzmann per goal, when requested
};

ActionId uct_plan_step(const LmdpPlanner& planner, StateId current, const BeliefState& belief,
                       std::size_t true_goal);

struct LmdpEpisode {
    Trajectory trajectory;
    std::vector<BeliefState> beliefs;  // steps + 1 entries, starting uniform
};

// Plans, acts, and updates the observer belief until a goal is entered or
// `horizon` steps pass. Throws TimeoutError when the configured episode
// budget (or `deadline`) runs out.
LmdpEpisode lmdp_rollout(const LmdpPlanner& planner, StateId start, std::size_t true_goal,
                         std::size_t horizon, const Deadline& deadline = {});

}  // namespace legible
