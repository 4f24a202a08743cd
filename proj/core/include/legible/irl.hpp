#pragma once

// Learners that watch demonstrations: Bayesian goal inference over the known
// goal family, and gradient IRL that recovers a per-state reward.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "legible/legible.hpp"
#include "legible/mdp.hpp"

namespace legible {

using StateAction = std::pair<StateId, ActionId>;

struct Demonstration {
    std::vector<StateAction> pairs;
    PolicyType source_policy = PolicyType::optimal;
    std::size_t true_goal = 0;
};

struct GoalPosterior {
    std::vector<double> log_likelihoods;
    std::vector<double> posterior;

    // argmax of the posterior, lowest index on ties.
    std::size_t prediction() const;
};

inline constexpr double kDefaultLearnerEta = 1.0;

// log L_n = sum_i [eta Q_n(x_i,a_i) - logsumexp_a eta Q_n(x_i,a)], uniform prior.
GoalPosterior goal_posterior(std::span<const StateAction> pairs, const SolvedFamily& solved,
                             double eta = kDefaultLearnerEta);

// Incremental form of goal_posterior for revealing pairs one at a time.
class GoalInference {
public:
    GoalInference(const SolvedFamily& solved, double eta = kDefaultLearnerEta);

    void observe(StateId state, ActionId action);
    GoalPosterior posterior() const;
    std::size_t prediction() const;

private:
    const SolvedFamily& solved_;
    double eta_;
    std::vector<double> log_likelihoods_;
};

// Reveals the demonstration's pairs in order and records whether the
// prediction after k pairs (k = 1..max_pairs) names the true goal. Once the
// pairs run out the last prediction carries forward.
std::vector<bool> incremental_correctness(const Demonstration& demo, const SolvedFamily& solved,
                                          std::size_t max_pairs, double eta = kDefaultLearnerEta);

struct GirlOptions {
    double eta = 1.0;
    double learning_rate = 0.5;
    std::size_t iterations = 100;
    SolveSettings solve{1e-8, kDefaultMaxIterations};
};

struct GirlEvaluation {
    double log_likelihood = 0.0;  // mean over demonstration pairs
    std::vector<double> gradient;  // d log_likelihood / d state_reward
    SolveResult solution;          // q* under the evaluated reward
};

// The template's kernel and discount with reward r(x, a) = state_reward[x].
TabularMdp with_state_reward(const TabularMdp& mdp_template, std::span<const double> state_reward);

// Mean Boltzmann log-likelihood of the pairs and its gradient, linearizing q*
// around the greedy policy of the current reward.
GirlEvaluation girl_evaluate(const Demonstration& demo, const TabularMdp& mdp_template,
                             std::span<const double> state_reward, double eta,
                             const SolveSettings& settings = {1e-8, kDefaultMaxIterations});

struct GirlResult {
    std::vector<double> reward;  // one weight per state
    std::vector<double> log_likelihood_trace;  // accepted iterates, starting at zero reward
    std::size_t halvings = 0;
};

// Gradient ascent from the zero reward. A step that lowers the likelihood by
// more than 1e-6 is halved and retried; 20 consecutive halvings throw
// DivergenceError.
GirlResult girl_recover(const Demonstration& demo, const TabularMdp& mdp_template,
                        const GirlOptions& options = {});

// `count` rollouts of at most `horizon` steps under the goal's greedy policy
// of the requested type.
std::vector<Demonstration> sample_demo_trajectories(const GoalMdpFamily& family,
                                                    const GoalPolicies& policies,
                                                    PolicyType policy_type, StateId start,
                                                    std::size_t goal, std::size_t count = 10,
                                                    std::size_t horizon = 20,
                                                    std::uint64_t rng_seed = 0);

// `count` free non-goal states drawn uniformly (with replacement), each paired
// with the policy's greedy action for `goal`.
Demonstration sample_demo_states(const GoalMdpFamily& family, const GoalPolicies& policies,
                                 PolicyType policy_type, std::size_t goal,
                                 std::size_t count = 20, std::uint64_t rng_seed = 0);

}  // namespace legible
