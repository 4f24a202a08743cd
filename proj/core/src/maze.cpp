#include "legible/maze.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "legible/errors.hpp"

namespace legible {
namespace {

constexpr std::array<const char*, kNumMoves> kActionNames = {"up", "down", "left", "right",
                                                             "noop"};
constexpr std::array<Cell, kNumMoves> kOffsets = {
    Cell{-1, 0}, Cell{1, 0}, Cell{0, -1}, Cell{0, 1}, Cell{0, 0}};

bool is_goal_char(char c) { return c >= 'A' && c <= 'J'; }

Cell shifted(Cell c, ActionId action) {
    return {c.row + kOffsets[action].row, c.col + kOffsets[action].col};
}

}  // namespace

const char* action_name(ActionId action) {
    return action < kNumMoves ? kActionNames[action] : "invalid";
}

std::optional<ActionId> parse_action_name(std::string_view name) {
    for (ActionId a = 0; a < kNumMoves; ++a) {
        if (name == kActionNames[a]) return a;
    }
    return std::nullopt;
}

bool MazeSpec::is_goal(Cell c) const {
    return std::any_of(goals.begin(), goals.end(), [&](const auto& g) { return g.second == c; });
}

std::vector<char> MazeSpec::goal_labels() const {
    std::vector<char> labels;
    for (const auto& [label, cell] : goals) labels.push_back(label);
    return labels;
}

std::vector<Cell> MazeSpec::free_non_goal_cells() const {
    std::set<Cell> goal_cells;
    for (const auto& [label, cell] : goals) goal_cells.insert(cell);
    std::vector<Cell> cells;
    for (int r = 0; r < static_cast<int>(rows); ++r) {
        for (int c = 0; c < static_cast<int>(cols); ++c) {
            const Cell cell{r, c};
            if (!walls.contains(cell) && !goal_cells.contains(cell)) cells.push_back(cell);
        }
    }
    return cells;
}

void MazeSpec::validate() const {
    if (rows == 0 || cols == 0) throw InvalidSpec("maze has no cells");
    if (!(failure_probability >= 0.0 && failure_probability < 1.0)) {
        throw InvalidSpec("failure probability must lie in [0, 1)");
    }
    if (goals.empty() || goals.size() > kMaxGoals) {
        throw InvalidSpec("maze needs between 1 and 10 goals, has " + std::to_string(goals.size()));
    }
    for (const Cell& w : walls) {
        if (!in_bounds(w)) throw InvalidSpec("wall out of bounds");
    }
    std::set<Cell> seen;
    for (const auto& [label, cell] : goals) {
        if (!is_goal_char(label)) throw InvalidSpec(std::string("bad goal label '") + label + "'");
        if (!in_bounds(cell)) throw InvalidSpec(std::string("goal ") + label + " out of bounds");
        if (walls.contains(cell)) throw InvalidSpec(std::string("goal ") + label + " is a wall");
        if (!seen.insert(cell).second) {
            throw InvalidSpec(std::string("goal ") + label + " shares a cell with another goal");
        }
    }
    if (default_start) {
        if (!in_bounds(*default_start)) throw InvalidSpec("start out of bounds");
        if (walls.contains(*default_start)) throw InvalidSpec("start is a wall");
        if (seen.contains(*default_start)) throw InvalidSpec("start is a goal cell");
    }
}

MazeSpec parse_maze(std::string_view text, double failure_probability) {
    if (text.empty()) throw ParseError("empty maze", 1);
    if (text.back() == '\n') text.remove_suffix(1);

    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = text.find('\n', pos);
        lines.push_back(text.substr(pos, end == std::string_view::npos ? text.npos : end - pos));
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }

    MazeSpec spec;
    spec.failure_probability = failure_probability;
    spec.rows = lines.size();
    spec.cols = lines.front().size();
    if (spec.cols == 0) throw ParseError("empty row", 1);

    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto line = lines[r];
        if (line.size() != spec.cols) {
            throw ParseError("row has " + std::to_string(line.size()) + " cells, expected " +
                                 std::to_string(spec.cols),
                             r + 1);
        }
        for (std::size_t c = 0; c < line.size(); ++c) {
            const char ch = line[c];
            const Cell cell{static_cast<int>(r), static_cast<int>(c)};
            if (ch == '#') {
                spec.walls.insert(cell);
            } else if (ch == '.') {
            } else if (ch == 'S') {
                if (spec.default_start) throw ParseError("duplicate start 'S'", r + 1);
                spec.default_start = cell;
            } else if (is_goal_char(ch)) {
                if (!spec.goals.emplace(ch, cell).second) {
                    throw ParseError(std::string("duplicate goal label '") + ch + "'", r + 1);
                }
            } else {
                throw ParseError("illegal character (code " +
                                     std::to_string(static_cast<unsigned char>(ch)) +
                                     ") at column " + std::to_string(c + 1),
                                 r + 1);
            }
        }
    }
    if (spec.goals.empty()) throw ParseError("maze has no goals", lines.size());
    spec.validate();
    return spec;
}

std::string format_maze(const MazeSpec& spec) {
    std::string out;
    out.reserve(spec.rows * (spec.cols + 1));
    for (int r = 0; r < static_cast<int>(spec.rows); ++r) {
        for (int c = 0; c < static_cast<int>(spec.cols); ++c) {
            const Cell cell{r, c};
            char ch = '.';
            if (spec.walls.contains(cell)) ch = '#';
            if (spec.default_start == cell) ch = 'S';
            for (const auto& [label, goal] : spec.goals) {
                if (goal == cell) ch = label;
            }
            out.push_back(ch);
        }
        out.push_back('\n');
    }
    return out;
}

MazeSpec load_maze(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FixtureMissing("cannot open maze file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_maze(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

std::optional<std::size_t> GoalMdpFamily::goal_index(char label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
}

GoalMdpFamily build_family(const MazeSpec& spec, const FamilyOptions& options) {
    spec.validate();
    if (!(options.discount >= 0.0 && options.discount < 1.0)) {
        throw InvalidSpec("discount must lie in [0, 1)");
    }
    const std::size_t S = spec.num_states();
    const double fail = spec.failure_probability;

    std::vector<bool> terminal(S, false);
    for (const auto& [label, cell] : spec.goals) terminal[spec.state_of(cell)] = true;

    std::vector<std::vector<Successor>> rows(S * kNumMoves);
    for (StateId x = 0; x < S; ++x) {
        const Cell cell = spec.cell_of(x);
        const bool frozen = terminal[x] || spec.is_wall(cell);
        for (ActionId a = 0; a < kNumMoves; ++a) {
            auto& row = rows[x * kNumMoves + a];
            const Cell target = shifted(cell, a);
            const bool moves = !frozen && a != static_cast<ActionId>(Move::noop) &&
                               spec.in_bounds(target) && !spec.is_wall(target);
            if (!moves) {
                row.push_back({x, 1.0});
            } else if (fail == 0.0) {
                row.push_back({spec.state_of(target), 1.0});
            } else {
                row.push_back({spec.state_of(target), 1.0 - fail});
                row.push_back({x, fail});
            }
        }
    }
    auto kernel = std::make_shared<const TransitionKernel>(S, kNumMoves, rows, std::move(terminal));

    GoalMdpFamily family;
    family.spec = spec;
    for (const auto& [label, cell] : spec.goals) {
        const StateId goal_state = spec.state_of(cell);
        std::vector<double> rewards(S * kNumMoves, options.step_reward);
        for (ActionId a = 0; a < kNumMoves; ++a) {
            rewards[goal_state * kNumMoves + a] = options.goal_reward;
        }
        family.mdps.emplace_back(kernel, std::move(rewards), options.discount);
        family.labels.push_back(label);
        family.goal_states.push_back(goal_state);
    }
    return family;
}

std::vector<Scenario> random_scenarios(const MazeSpec& spec, std::size_t count,
                                       std::uint64_t rng_seed) {
    if (count == 0) throw std::invalid_argument("scenario count must be >= 1");
    const auto starts = spec.free_non_goal_cells();
    if (starts.empty() || spec.goals.empty()) {
        throw InfeasibleSampling("no free non-goal cell to start from");
    }
    Rng rng(rng_seed);
    std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_goal(0, spec.goals.size() - 1);
    std::vector<Scenario> scenarios;
    scenarios.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Cell start = starts[pick_start(rng)];
        const std::size_t goal = pick_goal(rng);
        scenarios.push_back({spec.state_of(start), goal});
    }
    return scenarios;
}

std::vector<int> bfs_distances(const MazeSpec& spec, Cell target) {
    std::vector<int> dist(spec.num_states(), -1);
    if (!spec.in_bounds(target) || spec.is_wall(target)) return dist;
    std::deque<Cell> frontier{target};
    dist[spec.state_of(target)] = 0;
    while (!frontier.empty()) {
        const Cell cell = frontier.front();
        frontier.pop_front();
        // Goal cells absorb, so no path continues through one.
        if (cell != target && spec.is_goal(cell)) continue;
        for (ActionId a = 0; a < 4; ++a) {
            const Cell next = shifted(cell, a);
            if (!spec.in_bounds(next) || spec.is_wall(next)) continue;
            int& d = dist[spec.state_of(next)];
            if (d >= 0) continue;
            d = dist[spec.state_of(cell)] + 1;
            frontier.push_back(next);
        }
    }
    return dist;
}

void check_reachability(const MazeSpec& spec) {
    const auto starts = spec.free_non_goal_cells();
    for (const auto& [label, goal] : spec.goals) {
        const auto dist = bfs_distances(spec, goal);
        for (const Cell& c : starts) {
            if (dist[spec.state_of(c)] < 0) {
                throw InvalidSpec(std::string("goal ") + label + " unreachable from (" +
                                  std::to_string(c.row) + "," + std::to_string(c.col) + ")");
            }
        }
    }
}

MazeSpec generate_maze(std::size_t rows, std::size_t cols, std::size_t num_goals,
                       double wall_density, std::uint64_t seed) {
    if (num_goals == 0 || num_goals > kMaxGoals) throw InvalidSpec("goal count must be 1..10");
    if (rows * cols < num_goals + 1) throw InvalidSpec("maze too small for its goals");

    Rng rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        MazeSpec spec;
        spec.rows = rows;
        spec.cols = cols;
        const auto target_walls = static_cast<std::size_t>(wall_density * static_cast<double>(rows * cols));
        std::uniform_int_distribution<int> pick_row(0, static_cast<int>(rows) - 1);
        std::uniform_int_distribution<int> pick_col(0, static_cast<int>(cols) - 1);
        std::uniform_int_distribution<int> pick_len(1, 4);
        std::bernoulli_distribution horizontal(0.5);
        while (spec.walls.size() < target_walls) {
            Cell c{pick_row(rng), pick_col(rng)};
            const int len = pick_len(rng);
            const bool h = horizontal(rng);
            for (int i = 0; i < len && spec.in_bounds(c) && spec.walls.size() < target_walls; ++i) {
                spec.walls.insert(c);
                c = h ? Cell{c.row, c.col + 1} : Cell{c.row + 1, c.col};
            }
        }

        // Keep only the largest 4-connected free region.
        std::vector<int> component(rows * cols, -1);
        std::vector<std::size_t> sizes;
        for (StateId s = 0; s < rows * cols; ++s) {
            if (component[s] >= 0 || spec.is_wall(spec.cell_of(s))) continue;
            const int id = static_cast<int>(sizes.size());
            std::size_t size = 0;
            std::deque<StateId> frontier{s};
            component[s] = id;
            while (!frontier.empty()) {
                const Cell cell = spec.cell_of(frontier.front());
                frontier.pop_front();
                ++size;
                for (ActionId a = 0; a < 4; ++a) {
                    const Cell next = shifted(cell, a);
                    if (!spec.in_bounds(next) || spec.is_wall(next)) continue;
                    const StateId ns = spec.state_of(next);
                    if (component[ns] >= 0) continue;
                    component[ns] = id;
                    frontier.push_back(ns);
                }
            }
            sizes.push_back(size);
        }
        if (sizes.empty()) continue;
        const int largest =
            static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        std::vector<Cell> free_cells;
        for (StateId s = 0; s < rows * cols; ++s) {
            const Cell cell = spec.cell_of(s);
            if (spec.is_wall(cell)) continue;
            if (component[s] != largest) {
                spec.walls.insert(cell);
            } else {
                free_cells.push_back(cell);
            }
        }
        if (free_cells.size() < num_goals + 1) continue;

        // Spread goals: each new goal maximizes its Manhattan distance to the
        // ones already placed (random first goal, random tie-break).
        std::vector<Cell> placed;
        placed.push_back(free_cells[std::uniform_int_distribution<std::size_t>(
            0, free_cells.size() - 1)(rng)]);
        while (placed.size() < num_goals) {
            int best = -1;
            std::vector<Cell> best_cells;
            for (const Cell& c : free_cells) {
                int nearest = std::numeric_limits<int>::max();
                for (const Cell& g : placed) {
                    nearest = std::min(nearest, std::abs(c.row - g.row) + std::abs(c.col - g.col));
                }
                if (nearest > best) {
                    best = nearest;
                    best_cells.assign(1, c);
                } else if (nearest == best) {
                    best_cells.push_back(c);
                }
            }
            placed.push_back(best_cells[std::uniform_int_distribution<std::size_t>(
                0, best_cells.size() - 1)(rng)]);
        }
        for (std::size_t i = 0; i < placed.size(); ++i) {
            spec.goals.emplace(static_cast<char>('A' + i), placed[i]);
        }
        try {
            spec.validate();
            check_reachability(spec);
            return spec;
        } catch (const InvalidSpec&) {
            // A goal sealed off part of the maze; draw again.
        }
    }
    throw InvalidSpec("could not generate a connected maze");
}

std::string goal_color(char label) {
    static constexpr std::array<const char*, kMaxGoals> palette = {
        "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
        "#42d4f4", "#f032e6", "#bfef45", "#9a6324", "#469990"};
    if (label < 'A' || label > 'J') return "#808080";
    return palette[static_cast<std::size_t>(label - 'A')];
}

}  // namespace legible
