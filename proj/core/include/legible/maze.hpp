#pragma once

// Grid maze worlds: the text format, the 5-action slip dynamics, and one
// TabularMdp per labelled goal sharing a single transition kernel.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "legible/mdp.hpp"

namespace legible {

enum class Move : ActionId { up = 0, down = 1, left = 2, right = 3, noop = 4 };
inline constexpr std::size_t kNumMoves = 5;

const char* action_name(ActionId action);
std::optional<ActionId> parse_action_name(std::string_view name);

struct Cell {
    int row = 0;
    int col = 0;

    auto operator<=>(const Cell&) const = default;
};

inline constexpr double kDefaultFailureProbability = 0.15;
inline constexpr std::size_t kMaxGoals = 10;

struct MazeSpec {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::set<Cell> walls;
    std::map<char, Cell> goals;  // 'A'..'J', ordered by label
    double failure_probability = kDefaultFailureProbability;
    std::optional<Cell> default_start;

    std::size_t num_states() const noexcept { return rows * cols; }
    bool in_bounds(Cell c) const noexcept {
        return c.row >= 0 && c.col >= 0 && static_cast<std::size_t>(c.row) < rows &&
               static_cast<std::size_t>(c.col) < cols;
    }
    bool is_wall(Cell c) const { return walls.contains(c); }
    bool is_goal(Cell c) const;
    StateId state_of(Cell c) const noexcept {
        return static_cast<StateId>(c.row) * cols + static_cast<StateId>(c.col);
    }
    Cell cell_of(StateId s) const noexcept {
        return {static_cast<int>(s / cols), static_cast<int>(s % cols)};
    }
    std::vector<char> goal_labels() const;
    // Free cells that are not goals, in row-major order.
    std::vector<Cell> free_non_goal_cells() const;

    // Throws InvalidSpec on any invariant violation.
    void validate() const;
};

// Parses the '#', '.', 'S', 'A'-'J' grid format. Throws ParseError.
MazeSpec parse_maze(std::string_view text,
                    double failure_probability = kDefaultFailureProbability);
std::string format_maze(const MazeSpec& spec);
MazeSpec load_maze(const std::filesystem::path& path);

struct FamilyOptions {
    double discount = 0.9;
    double goal_reward = 1.0;
    double step_reward = 0.0;
};

struct GoalMdpFamily {
    MazeSpec spec;
    std::vector<TabularMdp> mdps;  // one per goal, in label order
    std::vector<char> labels;
    std::vector<StateId> goal_states;

    std::size_t num_goals() const noexcept { return mdps.size(); }
    std::size_t num_states() const noexcept { return mdps.front().num_states(); }
    std::size_t num_actions() const noexcept { return mdps.front().num_actions(); }
    double discount() const noexcept { return mdps.front().discount(); }
    const TransitionKernel& kernel() const noexcept { return mdps.front().kernel(); }
    const std::shared_ptr<const TransitionKernel>& shared_kernel() const noexcept {
        return mdps.front().shared_kernel();
    }
    std::optional<std::size_t> goal_index(char label) const;
};

// Every goal cell is absorbing in the shared kernel. Member n pays
// goal_reward for any action taken at its own goal cell and step_reward
// everywhere else.
GoalMdpFamily build_family(const MazeSpec& spec, const FamilyOptions& options = {});

struct Scenario {
    StateId start;
    std::size_t goal;  // index into the family's label order

    bool operator==(const Scenario&) const = default;
};

// Uniform over free non-goal start cells x goal labels. Throws
// InfeasibleSampling when no such pair exists.
std::vector<Scenario> random_scenarios(const MazeSpec& spec, std::size_t count,
                                       std::uint64_t rng_seed);

// Shortest step counts from `target` over free cells; other goal cells can be
// entered but not crossed. -1 marks unreachable cells.
std::vector<int> bfs_distances(const MazeSpec& spec, Cell target);

// Throws InvalidSpec unless every goal is reachable from every free non-goal cell.
void check_reachability(const MazeSpec& spec);

// Seeded stand-in layouts for the benchmark fixtures: scattered wall segments
// at roughly `wall_density`, the largest connected region kept, goals spread
// apart. The result passes check_reachability.
MazeSpec generate_maze(std::size_t rows, std::size_t cols, std::size_t num_goals,
                       double wall_density, std::uint64_t seed);

// Display colour for a goal label, "#rrggbb".
std::string goal_color(char label);

}  // namespace legible
