#include "legible/metrics.hpp"

#include <stdexcept>

#include "legible/errors.hpp"

namespace legible {

double polmdp_legibility(const Trajectory& trajectory, const LegibleProblem& problem) {
    if (trajectory.empty()) throw EmptyTrajectory();
    if (trajectory.true_goal && *trajectory.true_goal != problem.target_goal()) {
        throw std::invalid_argument("trajectory goal differs from the problem's target");
    }
    double total = 0.0;
    for (const Step& step : trajectory.steps) {
        total += legible_reward(problem, step.state, step.action);
    }
    return total / static_cast<double>(trajectory.size());
}

double miura_legibility(const Trajectory& trajectory, const TransitionKernel& kernel,
                        const ObserverModel& observer, std::size_t true_goal, DistanceKind kind,
                        double kl_cap) {
    if (trajectory.empty()) throw EmptyTrajectory();
    if (true_goal >= observer.num_goals()) throw std::invalid_argument("goal out of range");
    const BeliefState target = BeliefState::one_hot(observer.num_goals(), true_goal);
    BeliefState belief = BeliefState::uniform(observer.num_goals());
    double total = 0.0;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const Step& step = trajectory.steps[i];
        belief = belief_update(belief, step.state, step.action, trajectory.next_state(i), kernel,
                               observer)
                     .belief;
        total -= belief_distance(belief, target, kind, kl_cap);
    }
    return total / static_cast<double>(trajectory.size());
}

double miura_legibility(const Trajectory& trajectory, const SolvedFamily& solved,
                        std::size_t true_goal, double observer_eta, DistanceKind kind,
                        double kl_cap) {
    if (trajectory.empty()) throw EmptyTrajectory();
    return miura_legibility(trajectory, solved.family.kernel(), ObserverModel(solved, observer_eta),
                            true_goal, kind, kl_cap);
}

}  // namespace legible
