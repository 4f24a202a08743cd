#pragma once

// Trajectory-level legibility scores. Both are higher-is-better.

#include "legible/legible.hpp"
#include "legible/lmdp.hpp"

namespace legible {

// Mean over steps of the legible reward for the problem's target goal.
// Throws EmptyTrajectory; std::invalid_argument when the trajectory is tagged
// with a different goal than the problem's target.
double polmdp_legibility(const Trajectory& trajectory, const LegibleProblem& problem);

// Replays the observer belief from the uniform prior along the trajectory and
// returns the mean over t >= 1 of -distance(b_t, one_hot(true_goal)).
// Throws EmptyTrajectory and propagates ImpossibleTransition.
double miura_legibility(const Trajectory& trajectory, const SolvedFamily& solved,
                        std::size_t true_goal, double observer_eta, DistanceKind kind,
                        double kl_cap = kDefaultKlCap);

// Same score from an already-built observer model.
double miura_legibility(const Trajectory& trajectory, const TransitionKernel& kernel,
                        const ObserverModel& observer, std::size_t true_goal, DistanceKind kind,
                        double kl_cap = kDefaultKlCap);

}  // namespace legible
