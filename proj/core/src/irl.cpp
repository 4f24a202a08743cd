#include "legible/irl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "legible/errors.hpp"
#include "policy_system.hpp"

namespace legible {
namespace {

double pair_log_likelihood(const SolveResult& solution, StateId state, ActionId action,
                           double eta) {
    return eta * solution.q(state, action) - log_sum_exp(solution.q_row(state), eta);
}

GoalPosterior normalize(std::vector<double> log_likelihoods) {
    GoalPosterior out;
    out.posterior.resize(log_likelihoods.size());
    softmax(log_likelihoods, 1.0, out.posterior);
    out.log_likelihoods = std::move(log_likelihoods);
    return out;
}

}  // namespace

std::size_t GoalPosterior::prediction() const {
    return static_cast<std::size_t>(std::max_element(posterior.begin(), posterior.end()) -
                                    posterior.begin());
}

GoalPosterior goal_posterior(std::span<const StateAction> pairs, const SolvedFamily& solved,
                             double eta) {
    GoalInference inference(solved, eta);
    for (const auto& [state, action] : pairs) inference.observe(state, action);
    return inference.posterior();
}

GoalInference::GoalInference(const SolvedFamily& solved, double eta)
    : solved_(solved), eta_(eta), log_likelihoods_(solved.num_goals(), 0.0) {
    if (!(eta > 0.0)) throw std::invalid_argument("learner eta must be positive");
}

void GoalInference::observe(StateId state, ActionId action) {
    if (state >= solved_.family.num_states() || action >= solved_.family.num_actions()) {
        throw std::invalid_argument("demonstration pair out of range");
    }
    for (std::size_t n = 0; n < log_likelihoods_.size(); ++n) {
        log_likelihoods_[n] += pair_log_likelihood(solved_.optimal[n], state, action, eta_);
    }
}

GoalPosterior GoalInference::posterior() const { return normalize(log_likelihoods_); }

std::size_t GoalInference::prediction() const { return posterior().prediction(); }

std::vector<bool> incremental_correctness(const Demonstration& demo, const SolvedFamily& solved,
                                          std::size_t max_pairs, double eta) {
    GoalInference inference(solved, eta);
    std::vector<bool> correct;
    correct.reserve(max_pairs);
    bool last = false;
    for (std::size_t k = 0; k < max_pairs; ++k) {
        if (k < demo.pairs.size()) {
            inference.observe(demo.pairs[k].first, demo.pairs[k].second);
            last = inference.prediction() == demo.true_goal;
        } else if (demo.pairs.empty()) {
            last = inference.prediction() == demo.true_goal;
        }
        correct.push_back(last);
    }
    return correct;
}

TabularMdp with_state_reward(const TabularMdp& mdp_template, std::span<const double> state_reward) {
    const std::size_t S = mdp_template.num_states();
    const std::size_t A = mdp_template.num_actions();
    if (state_reward.size() != S) throw std::invalid_argument("reward vector has the wrong length");
    std::vector<double> rewards(S * A);
    for (StateId x = 0; x < S; ++x) {
        std::fill_n(rewards.begin() + static_cast<std::ptrdiff_t>(x * A), A, state_reward[x]);
    }
    return TabularMdp(mdp_template.shared_kernel(), std::move(rewards), mdp_template.discount());
}

GirlEvaluation girl_evaluate(const Demonstration& demo, const TabularMdp& mdp_template,
                             std::span<const double> state_reward, double eta,
                             const SolveSettings& settings) {
    if (demo.pairs.empty()) throw EmptyTrajectory();
    const std::size_t S = mdp_template.num_states();
    const std::size_t A = mdp_template.num_actions();
    const TabularMdp mdp = with_state_reward(mdp_template, state_reward);

    GirlEvaluation out;
    out.solution = value_iterate(mdp, settings.tolerance, settings.max_iterations);

    // dQ(x,a)/dw = e_x + gamma P(.|x,a) M with M = (I - gamma P_pi)^-1 for
    // the greedy pi. The e_x terms cancel in the Boltzmann log-likelihood,
    // leaving gradient = eta gamma M^T c with c the expected-successor gap.
    Eigen::VectorXd successor_gap = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
    std::vector<double> pi(A);
    double total = 0.0;
    for (const auto& [state, action] : demo.pairs) {
        if (state >= S || action >= A) throw std::invalid_argument("demonstration pair out of range");
        total += pair_log_likelihood(out.solution, state, action, eta);
        softmax(out.solution.q_row(state), eta, pi);
        for (const Successor& s : mdp.successors(state, action)) {
            successor_gap[static_cast<Eigen::Index>(s.state)] += s.probability;
        }
        for (ActionId a = 0; a < A; ++a) {
            for (const Successor& s : mdp.successors(state, a)) {
                successor_gap[static_cast<Eigen::Index>(s.state)] -= pi[a] * s.probability;
            }
        }
    }
    const double n = static_cast<double>(demo.pairs.size());
    out.log_likelihood = total / n;

    const Policy greedy = greedy_policy(out.solution);
    const Eigen::SparseMatrix<double> system_t =
        detail::policy_system(mdp, greedy).transpose();
    const Eigen::VectorXd z = detail::solve_sparse(system_t, successor_gap);
    const double scale = eta * mdp.discount() / n;
    out.gradient.resize(S);
    for (StateId x = 0; x < S; ++x) out.gradient[x] = scale * z[static_cast<Eigen::Index>(x)];
    return out;
}

GirlResult girl_recover(const Demonstration& demo, const TabularMdp& mdp_template,
                        const GirlOptions& options) {
    if (demo.pairs.empty()) throw EmptyTrajectory();
    if (!(options.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");

    constexpr double kSlack = 1e-6;
    constexpr std::size_t kMaxHalvings = 20;

    GirlResult result;
    result.reward.assign(mdp_template.num_states(), 0.0);
    GirlEvaluation current =
        girl_evaluate(demo, mdp_template, result.reward, options.eta, options.solve);
    result.log_likelihood_trace.push_back(current.log_likelihood);

    double step = options.learning_rate;
    std::vector<double> candidate(result.reward.size());
    for (std::size_t it = 0; it < options.iterations; ++it) {
        std::size_t halvings = 0;
        while (true) {
            for (std::size_t x = 0; x < candidate.size(); ++x) {
                candidate[x] = result.reward[x] + step * current.gradient[x];
            }
            GirlEvaluation next =
                girl_evaluate(demo, mdp_template, candidate, options.eta, options.solve);
            if (next.log_likelihood >= current.log_likelihood - kSlack) {
                result.reward = candidate;
                current = std::move(next);
                break;
            }
            step *= 0.5;
            ++result.halvings;
            if (++halvings >= kMaxHalvings) {
                throw DivergenceError("log-likelihood kept decreasing after " +
                                      std::to_string(kMaxHalvings) + " step halvings");
            }
        }
        result.log_likelihood_trace.push_back(current.log_likelihood);
    }
    return result;
}

std::vector<Demonstration> sample_demo_trajectories(const GoalMdpFamily& family,
                                                    const GoalPolicies& policies,
                                                    PolicyType policy_type, StateId start,
                                                    std::size_t goal, std::size_t count,
                                                    std::size_t horizon, std::uint64_t rng_seed) {
    if (goal >= family.num_goals()) throw std::invalid_argument("goal out of range");
    const Policy& policy = policies.get(policy_type, goal);
    Rng seeds(rng_seed);
    std::vector<Demonstration> demos;
    demos.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Trajectory t = rollout(family.mdps[goal], policy, start, horizon, seeds());
        Demonstration demo;
        demo.source_policy = policy_type;
        demo.true_goal = goal;
        for (const Step& s : t.steps) demo.pairs.emplace_back(s.state, s.action);
        demos.push_back(std::move(demo));
    }
    return demos;
}

Demonstration sample_demo_states(const GoalMdpFamily& family, const GoalPolicies& policies,
                                 PolicyType policy_type, std::size_t goal, std::size_t count,
                                 std::uint64_t rng_seed) {
    if (count == 0) throw std::invalid_argument("count must be >= 1");
    if (goal >= family.num_goals()) throw std::invalid_argument("goal out of range");
    const auto cells = family.spec.free_non_goal_cells();
    if (cells.empty()) throw InfeasibleSampling("no free non-goal cell to sample");
    const Policy& policy = policies.get(policy_type, goal);

    Rng rng(rng_seed);
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    Demonstration demo;
    demo.source_policy = policy_type;
    demo.true_goal = goal;
    for (std::size_t i = 0; i < count; ++i) {
        const StateId state = family.spec.state_of(cells[pick(rng)]);
        demo.pairs.emplace_back(state, policy.action(state));
    }
    return demo;
}

}  // namespace legible
