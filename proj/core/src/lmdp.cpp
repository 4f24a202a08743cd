#include "legible/lmdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "legible/errors.hpp"
#include "legible/seeding.hpp"

namespace legible {

BeliefState BeliefState::uniform(std::size_t num_goals) {
    return {std::vector<double>(num_goals, 1.0 / static_cast<double>(num_goals))};
}

BeliefState BeliefState::one_hot(std::size_t num_goals, std::size_t goal) {
    BeliefState b{std::vector<double>(num_goals, 0.0)};
    b.probabilities.at(goal) = 1.0;
    return b;
}

bool BeliefState::is_valid() const {
    if (probabilities.empty()) return false;
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0)) return false;
        total += p;
    }
    return std::abs(total - 1.0) <= kProbabilityTolerance;
}

ObserverModel::ObserverModel(const SolvedFamily& solved, double observer_eta)
    : num_goals_(solved.num_goals()),
      num_states_(solved.family.num_states()),
      num_actions_(solved.family.num_actions()),
      eta_(observer_eta) {
    if (!(observer_eta >= 0.0)) throw std::invalid_argument("observer_eta must be >= 0");
    likelihood_.resize(num_goals_ * num_states_ * num_actions_);
    for (std::size_t g = 0; g < num_goals_; ++g) {
        for (StateId x = 0; x < num_states_; ++x) {
            softmax(solved.optimal[g].q_row(x), eta_,
                    std::span<double>(likelihood_.data() + (g * num_states_ + x) * num_actions_,
                                      num_actions_));
        }
    }
}

namespace {

BeliefUpdate apply_likelihoods(const BeliefState& belief, std::span<const double> likelihoods) {
    BeliefUpdate out{belief, false};
    double total = 0.0;
    for (std::size_t g = 0; g < belief.size(); ++g) {
        out.belief.probabilities[g] = belief[g] * likelihoods[g];
        total += out.belief.probabilities[g];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        out.belief = belief;
        out.degenerate = true;
        return out;
    }
    for (double& p : out.belief.probabilities) p /= total;
    return out;
}

void require_transition(const TransitionKernel& kernel, StateId prev, ActionId action,
                        StateId next) {
    if (prev >= kernel.num_states() || next >= kernel.num_states() ||
        action >= kernel.num_actions() || kernel.probability(prev, action, next) <= 0.0) {
        throw ImpossibleTransition("transition " + std::to_string(prev) + " --" +
                                   std::to_string(action) + "--> " + std::to_string(next) +
                                   " has zero probability");
    }
}

// Fast path used inside the search: no feasibility check, fixed-size scratch.
void update_in_place(const BeliefState& belief, StateId prev, ActionId action,
                     const ObserverModel& observer, BeliefState& out) {
    out.probabilities.resize(belief.size());
    double total = 0.0;
    for (std::size_t g = 0; g < belief.size(); ++g) {
        out.probabilities[g] = belief[g] * observer.likelihood(g, prev, action);
        total += out.probabilities[g];
    }
    if (!(total > 0.0)) {
        out = belief;
        return;
    }
    for (double& p : out.probabilities) p /= total;
}

}  // namespace

BeliefUpdate belief_update(const BeliefState& belief, StateId prev_state, ActionId action,
                           StateId next_state, const TransitionKernel& kernel,
                           const ObserverModel& observer) {
    if (belief.size() != observer.num_goals()) {
        throw std::invalid_argument("belief size does not match the goal count");
    }
    require_transition(kernel, prev_state, action, next_state);
    std::vector<double> likelihoods(belief.size());
    for (std::size_t g = 0; g < belief.size(); ++g) {
        likelihoods[g] = observer.likelihood(g, prev_state, action);
    }
    return apply_likelihoods(belief, likelihoods);
}

BeliefUpdate belief_update(const BeliefState& belief, StateId prev_state, ActionId action,
                           StateId next_state, const SolvedFamily& solved, double observer_eta) {
    if (belief.size() != solved.num_goals()) {
        throw std::invalid_argument("belief size does not match the goal count");
    }
    if (!(observer_eta >= 0.0)) throw std::invalid_argument("observer_eta must be >= 0");
    require_transition(solved.family.kernel(), prev_state, action, next_state);
    const std::size_t A = solved.family.num_actions();
    std::vector<double> likelihoods(belief.size());
    std::vector<double> row(A);
    for (std::size_t g = 0; g < belief.size(); ++g) {
        softmax(solved.optimal[g].q_row(prev_state), observer_eta, row);
        likelihoods[g] = row[action];
    }
    return apply_likelihoods(belief, likelihoods);
}

const char* to_string(DistanceKind kind) {
    switch (kind) {
        case DistanceKind::kl: return "kl";
        case DistanceKind::euclidean: return "euclidean";
        case DistanceKind::tv: return "tv";
    }
    return "unknown";
}

double belief_distance(const BeliefState& belief, const BeliefState& target, DistanceKind kind,
                       double kl_cap) {
    if (belief.size() != target.size()) throw std::invalid_argument("belief sizes differ");
    double d = 0.0;
    switch (kind) {
        case DistanceKind::kl:
            for (std::size_t g = 0; g < belief.size(); ++g) {
                if (target[g] == 0.0) continue;
                if (belief[g] == 0.0) return kl_cap;
                d += target[g] * std::log(target[g] / belief[g]);
            }
            return std::min(std::max(d, 0.0), kl_cap);
        case DistanceKind::euclidean:
            for (std::size_t g = 0; g < belief.size(); ++g) {
                d += (belief[g] - target[g]) * (belief[g] - target[g]);
            }
            return std::sqrt(d);
        case DistanceKind::tv:
            for (std::size_t g = 0; g < belief.size(); ++g) d += std::abs(belief[g] - target[g]);
            return 0.5 * d;
    }
    return d;
}

void UctConfig::validate() const {
    if (iterations_per_step < 1) throw std::invalid_argument("iterations_per_step must be >= 1");
    if (rollout_horizon < 1) throw std::invalid_argument("rollout_horizon must be >= 1");
    if (!(legibility_weight >= 0.0)) throw std::invalid_argument("legibility_weight must be >= 0");
    if (!(exploration_constant >= 0.0)) {
        throw std::invalid_argument("exploration_constant must be >= 0");
    }
    if (!(observer_eta >= 0.0)) throw std::invalid_argument("observer_eta must be >= 0");
    if (episode_time_budget_secs && !(*episode_time_budget_secs > 0.0)) {
        throw std::invalid_argument("episode time budget must be positive");
    }
}

LmdpPlanner::LmdpPlanner(std::shared_ptr<const SolvedFamily> solved, UctConfig config)
    : solved_(std::move(solved)),
      config_(config),
      observer_((config.validate(), *solved_), config.observer_eta) {
    if (config_.rollout_policy == RolloutPolicy::boltzmann) {
        for (const SolveResult& r : solved_->optimal) {
            rollout_policies_.push_back(boltzmann_policy(r, config_.observer_eta));
        }
    }
}

double LmdpPlanner::legibility_penalty(const BeliefState& next_belief,
                                       std::size_t true_goal) const {
    if (config_.legibility_weight == 0.0) return 0.0;
    // The target is one-hot, so the distances reduce to closed forms.
    const double own = next_belief[true_goal];
    double d = 0.0;
    switch (config_.distance_kind) {
        case DistanceKind::kl:
            d = own > 0.0 ? std::min(-std::log(own), config_.kl_cap) : config_.kl_cap;
            break;
        case DistanceKind::euclidean: {
            double sq = (1.0 - own) * (1.0 - own);
            for (std::size_t g = 0; g < next_belief.size(); ++g) {
                if (g != true_goal) sq += next_belief[g] * next_belief[g];
            }
            d = std::sqrt(sq);
            break;
        }
        case DistanceKind::tv:
            d = 1.0 - own;
            break;
    }
    return config_.legibility_weight * d;
}

double LmdpPlanner::step_reward(StateId state, ActionId action, const BeliefState& next_belief,
                                std::size_t true_goal) const {
    return solved_->family.mdps[true_goal].reward(state, action) -
           legibility_penalty(next_belief, true_goal);
}

double LmdpPlanner::return_scale(std::size_t true_goal) const {
    const auto& values = solved_->optimal[true_goal].values;
    const double task = *std::max_element(values.begin(), values.end());
    const std::size_t N = solved_->num_goals();
    const double worst = legibility_penalty(BeliefState::uniform(N), true_goal);
    const double scale = task + worst / (1.0 - solved_->family.discount());
    return scale > 0.0 ? scale : 1.0;
}

double LmdpPlanner::terminal_value(StateId goal_state, const BeliefState& belief,
                                   std::size_t true_goal) const {
    // Every action at a goal cell is equally likely under every goal model,
    // so the observer learns nothing more and the penalty repeats forever.
    const double gamma = solved_->family.discount();
    return solved_->optimal[true_goal].values[goal_state] -
           legibility_penalty(belief, true_goal) / (1.0 - gamma);
}

namespace {

struct Outcome {
    StateId next;
    std::int32_t child;  // -1 for terminal outcomes
    double reward;
    double terminal_value;
};

struct Edge {
    std::size_t visits = 0;
    double value_sum = 0.0;
    std::vector<Outcome> outcomes;
};

struct Node {
    StateId state;
    BeliefState belief;
    std::size_t visits = 0;
    std::vector<Edge> edges;
};

class Search {
public:
    Search(const LmdpPlanner& planner, std::size_t true_goal, std::uint64_t seed)
        : planner_(planner),
          family_(planner.solved().family),
          kernel_(family_.kernel()),
          true_goal_(true_goal),
          gamma_(family_.discount()),
          horizon_(planner.config().rollout_horizon),
          exploration_(planner.config().exploration_constant * planner.return_scale(true_goal)),
          rng_(seed) {}

    UctSearchResult run(StateId root_state, const BeliefState& root_belief,
                        const Deadline& deadline) {
        const auto& config = planner_.config();
        nodes_.reserve(config.iterations_per_step + 1);
        new_node(root_state, root_belief);
        for (std::size_t i = 0; i < config.iterations_per_step; ++i) {
            if (deadline.expired()) throw TimeoutError("UCT search exceeded its deadline");
            simulate(0, 0);
        }

        const std::size_t A = family_.num_actions();
        UctSearchResult result;
        result.visit_counts.resize(A);
        result.mean_returns.resize(A);
        for (ActionId a = 0; a < A; ++a) {
            const Edge& e = nodes_[0].edges[a];
            result.visit_counts[a] = e.visits;
            result.mean_returns[a] = e.visits ? e.value_sum / static_cast<double>(e.visits) : 0.0;
        }
        result.action = static_cast<ActionId>(
            std::max_element(result.visit_counts.begin(), result.visit_counts.end()) -
            result.visit_counts.begin());
        return result;
    }

private:
    std::int32_t new_node(StateId state, BeliefState belief) {
        nodes_.push_back({state, std::move(belief), 0, std::vector<Edge>(family_.num_actions())});
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    ActionId select(const Node& node) const {
        const std::size_t A = node.edges.size();
        for (ActionId a = 0; a < A; ++a) {
            if (node.edges[a].visits == 0) return a;
        }
        const double log_n = std::log(static_cast<double>(node.visits));
        const double c = exploration_;
        ActionId best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (ActionId a = 0; a < A; ++a) {
            const Edge& e = node.edges[a];
            const double n = static_cast<double>(e.visits);
            const double score = e.value_sum / n + c * std::sqrt(log_n / n);
            if (score > best_score) {
                best_score = score;
                best = a;
            }
        }
        return best;
    }

    double simulate(std::int32_t node_index, std::size_t depth) {
        if (depth >= horizon_) return 0.0;
        const ActionId action = select(nodes_[node_index]);
        const StateId state = nodes_[node_index].state;
        const StateId next = kernel_.sample(state, action, rng_);

        std::int32_t child = -1;
        double reward = 0.0;
        double terminal = 0.0;
        bool known = false;
        for (const Outcome& o : nodes_[node_index].edges[action].outcomes) {
            if (o.next == next) {
                child = o.child;
                reward = o.reward;
                terminal = o.terminal_value;
                known = true;
                break;
            }
        }
        double ret;
        if (!known) {
            BeliefState next_belief;
            update_in_place(nodes_[node_index].belief, state, action, planner_.observer(),
                            next_belief);
            reward = planner_.step_reward(state, action, next_belief, true_goal_);
            if (kernel_.is_terminal(next)) {
                terminal = planner_.terminal_value(next, next_belief, true_goal_);
                ret = reward + gamma_ * terminal;
            } else {
                ret = reward + gamma_ * rollout(next, next_belief, depth + 1);
                child = new_node(next, std::move(next_belief));
            }
            nodes_[node_index].edges[action].outcomes.push_back({next, child, reward, terminal});
        } else if (child < 0) {
            ret = reward + gamma_ * terminal;
        } else {
            ret = reward + gamma_ * simulate(child, depth + 1);
        }

        Node& node = nodes_[node_index];
        node.visits += 1;
        node.edges[action].visits += 1;
        node.edges[action].value_sum += ret;
        return ret;
    }

    double rollout(StateId state, BeliefState belief, std::size_t depth) {
        const auto& config = planner_.config();
        std::uniform_int_distribution<ActionId> uniform_action(0, family_.num_actions() - 1);
        BeliefState next_belief;
        double total = 0.0;
        double scale = 1.0;
        for (; depth < horizon_; ++depth) {
            const ActionId action = config.rollout_policy == RolloutPolicy::boltzmann
                                        ? planner_.rollout_policy(true_goal_).sample(state, rng_)
                                        : uniform_action(rng_);
            const StateId next = kernel_.sample(state, action, rng_);
            update_in_place(belief, state, action, planner_.observer(), next_belief);
            total += scale * planner_.step_reward(state, action, next_belief, true_goal_);
            scale *= gamma_;
            if (kernel_.is_terminal(next)) {
                total += scale * planner_.terminal_value(next, next_belief, true_goal_);
                break;
            }
            state = next;
            std::swap(belief, next_belief);
        }
        return total;
    }

    const LmdpPlanner& planner_;
    const GoalMdpFamily& family_;
    const TransitionKernel& kernel_;
    std::size_t true_goal_;
    double gamma_;
    std::size_t horizon_;
    double exploration_;
    Rng rng_;
    std::vector<Node> nodes_;
};

}  // namespace

UctSearchResult LmdpPlanner::search(StateId current, const BeliefState& belief,
                                    std::size_t true_goal, std::uint64_t seed,
                                    const Deadline& deadline) const {
    if (current >= solved_->family.num_states()) throw std::invalid_argument("state out of range");
    if (true_goal >= solved_->num_goals()) throw std::invalid_argument("goal out of range");
    if (belief.size() != solved_->num_goals()) {
        throw std::invalid_argument("belief size does not match the goal count");
    }
    Search search(*this, true_goal, seed);
    return search.run(current, belief, deadline);
}

}  // namespace legible

namespace legible {

const Policy& LmdpPlanner::rollout_policy(std::size_t goal) const {
    if (rollout_policies_.empty()) throw std::logic_error("planner uses random rollouts");
    return rollout_policies_.at(goal);
}

ActionId uct_plan_step(const LmdpPlanner& planner, StateId current, const BeliefState& belief,
                       std::size_t true_goal) {
    return planner.search(current, belief, true_goal, planner.config().rng_seed).action;
}

LmdpEpisode lmdp_rollout(const LmdpPlanner& planner, StateId start, std::size_t true_goal,
                         std::size_t horizon, const Deadline& deadline) {
    if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
    const auto& config = planner.config();
    const TransitionKernel& kernel = planner.solved().family.kernel();
    if (start >= kernel.num_states()) throw std::invalid_argument("start state out of range");

    const Deadline budget = config.episode_time_budget_secs
                                ? Deadline::after_seconds(*config.episode_time_budget_secs)
                                : Deadline{};
    const Deadline limit = Deadline::earliest(deadline, budget);

    LmdpEpisode episode;
    episode.trajectory.true_goal = true_goal;
    episode.trajectory.policy_type = PolicyType::lmdp;
    episode.beliefs.push_back(BeliefState::uniform(planner.solved().num_goals()));

    Rng env_rng(mix_seed(config.rng_seed, 0xE4F1ULL));
    StateId state = start;
    if (kernel.is_terminal(state)) {
        episode.trajectory.final_state = state;
        episode.trajectory.reached_terminal = true;
        return episode;
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        if (limit.expired()) throw TimeoutError("L-MDP episode exceeded its time budget");
        const UctSearchResult step = planner.search(state, episode.beliefs.back(), true_goal,
                                                    mix_seed(config.rng_seed, t + 1), limit);
        const ActionId action = step.action;
        const StateId next = kernel.sample(state, action, env_rng);
        episode.trajectory.steps.push_back({t, state, action});
        episode.beliefs.push_back(
            belief_update(episode.beliefs.back(), state, action, next, kernel, planner.observer())
                .belief);
        state = next;
        if (kernel.is_terminal(state)) {
            episode.trajectory.reached_terminal = true;
            break;
        }
    }
    episode.trajectory.final_state = state;
    return episode;
}

}  // namespace legible
