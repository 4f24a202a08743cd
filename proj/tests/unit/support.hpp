#pragma once

// Oracles and fixtures shared by the unit tests. The oracles are written
// against first principles (finite-horizon backups, hand-rolled grid moves)
// and never call the solver they check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "legible/legible.hpp"
#include "legible/maze.hpp"
#include "legible/mdp.hpp"

namespace legible::oracle {

inline std::filesystem::path mazes_dir() { return std::filesystem::path(LEGIBLE_DATA_DIR) / "mazes"; }

inline MazeSpec fixture(const std::string& name) { return load_maze(mazes_dir() / (name + ".maze")); }

inline std::vector<std::string> all_fixture_names() {
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(mazes_dir())) {
        if (entry.path().extension() == ".maze") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

// Q_H by H rounds of backward induction from Q_0 = 0.
inline std::vector<double> backward_induction(const TabularMdp& mdp, std::size_t horizon) {
    const std::size_t S = mdp.num_states();
    const std::size_t A = mdp.num_actions();
    std::vector<double> v(S, 0.0);
    std::vector<double> q(S * A, 0.0);
    for (std::size_t h = 0; h < horizon; ++h) {
        for (StateId x = 0; x < S; ++x) {
            for (ActionId a = 0; a < A; ++a) {
                double expected = 0.0;
                for (const Successor& s : mdp.successors(x, a)) expected += s.probability * v[s.state];
                q[x * A + a] = mdp.reward(x, a) + mdp.discount() * expected;
            }
        }
        for (StateId x = 0; x < S; ++x) {
            v[x] = *std::max_element(q.begin() + static_cast<std::ptrdiff_t>(x * A),
                                     q.begin() + static_cast<std::ptrdiff_t>((x + 1) * A));
        }
    }
    return q;
}

// Expected P(. | cell, action) for the slip dynamics, computed cell by cell.
inline std::map<StateId, double> grid_move(const MazeSpec& spec, Cell cell, ActionId action) {
    const StateId here = spec.state_of(cell);
    if (spec.is_wall(cell) || spec.is_goal(cell) || action == 4) return {{here, 1.0}};
    const int dr[] = {-1, 1, 0, 0};
    const int dc[] = {0, 0, -1, 1};
    const Cell to{cell.row + dr[action], cell.col + dc[action]};
    if (!spec.in_bounds(to) || spec.is_wall(to)) return {{here, 1.0}};
    std::map<StateId, double> row{{spec.state_of(to), 1.0 - spec.failure_probability}};
    if (spec.failure_probability > 0.0) row[here] = spec.failure_probability;
    return row;
}

// Random MDP with 1..3 successors per pair and rewards in [-1, 1].
inline TabularMdp random_mdp(std::size_t states, std::size_t actions, std::uint64_t seed,
                             double discount = 0.9) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_state(0, states - 1);
    std::uniform_int_distribution<int> pick_count(1, 3);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::uniform_real_distribution<double> reward(-1.0, 1.0);
    std::vector<std::vector<Successor>> rows(states * actions);
    for (auto& row : rows) {
        std::map<StateId, double> weights;
        const int n = pick_count(rng);
        for (int i = 0; i < n; ++i) weights[pick_state(rng)] += unit(rng);
        double total = 0.0;
        for (const auto& [s, w] : weights) total += w;
        for (const auto& [s, w] : weights) row.push_back({s, w / total});
    }
    std::vector<double> rewards(states * actions);
    for (double& r : rewards) r = reward(rng);
    return TabularMdp(std::make_shared<const TransitionKernel>(states, actions, rows),
                      std::move(rewards), discount);
}

inline std::shared_ptr<const SolvedFamily> solved(const MazeSpec& spec, double tolerance = 1e-10) {
    return std::make_shared<const SolvedFamily>(
        solve_family(build_family(spec), {tolerance, kDefaultMaxIterations}));
}

inline SolveResult result_from_q(std::vector<double> q, std::size_t actions) {
    SolveResult r;
    r.num_actions = actions;
    r.values.resize(q.size() / actions);
    for (std::size_t x = 0; x < r.values.size(); ++x) {
        r.values[x] = *std::max_element(q.begin() + static_cast<std::ptrdiff_t>(x * actions),
                                        q.begin() + static_cast<std::ptrdiff_t>((x + 1) * actions));
    }
    r.q_table = std::move(q);
    r.converged = true;
    return r;
}

}  // namespace legible::oracle
