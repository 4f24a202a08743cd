#include "legible/episodes.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "legible/errors.hpp"

namespace legible {

using nlohmann::json;

namespace {

json cell_json(Cell c) { return json::array({c.row, c.col}); }

PolicyType parse_policy_type(const std::string& text, const std::string& source) {
    if (text == "legible") return PolicyType::legible;
    if (text == "optimal") return PolicyType::optimal;
    throw SchemaError(source, "policy_type", "must be \"legible\" or \"optimal\"");
}

// Typed accessors that turn nlohmann errors into SchemaErrors naming the field.
const json& field(const json& object, const char* key, const std::string& path,
                  const std::string& source) {
    if (!object.is_object()) throw SchemaError(source, path, "expected an object");
    const auto it = object.find(key);
    if (it == object.end()) {
        throw SchemaError(source, path.empty() ? key : path + "." + key, "missing field");
    }
    return *it;
}

long long as_int(const json& value, const std::string& path, const std::string& source) {
    if (!value.is_number_integer()) throw SchemaError(source, path, "expected an integer");
    return value.get<long long>();
}

double as_real(const json& value, const std::string& path, const std::string& source) {
    if (!value.is_number()) throw SchemaError(source, path, "expected a number");
    return value.get<double>();
}

std::string as_string(const json& value, const std::string& path, const std::string& source) {
    if (!value.is_string()) throw SchemaError(source, path, "expected a string");
    return value.get<std::string>();
}

Cell as_cell(const json& value, const std::string& path, const std::string& source) {
    if (!value.is_array() || value.size() != 2) {
        throw SchemaError(source, path, "expected [row, col]");
    }
    return {static_cast<int>(as_int(value[0], path + "[0]", source)),
            static_cast<int>(as_int(value[1], path + "[1]", source))};
}

}  // namespace

EpisodeRecord make_episode(const GoalMdpFamily& family, const Trajectory& trajectory,
                           std::size_t true_goal, PolicyType policy_type, double beta,
                           std::uint64_t seed) {
    const MazeSpec& spec = family.spec;
    EpisodeRecord episode;
    episode.maze = spec;
    episode.maze.default_start.reset();
    episode.start = spec.cell_of(trajectory.empty() ? trajectory.final_state
                                                    : trajectory.steps.front().state);
    episode.true_goal = family.labels.at(true_goal);
    episode.policy_type = policy_type;
    episode.beta = beta;
    episode.gamma = family.discount();
    episode.seed = seed;
    for (const Step& s : trajectory.steps) {
        episode.steps.push_back({s.t, spec.cell_of(s.state), s.action});
    }
    episode.steps.push_back({trajectory.size(), spec.cell_of(trajectory.final_state),
                             static_cast<ActionId>(Move::noop)});
    return episode;
}

void validate_episode(const EpisodeRecord& episode, const std::string& source) {
    try {
        episode.maze.validate();
    } catch (const InvalidSpec& e) {
        throw SchemaError(source, "maze", e.what());
    }
    if (!episode.maze.goals.contains(episode.true_goal)) {
        throw SchemaError(source, "true_goal", "not one of the maze's goal labels");
    }
    if (!episode.maze.in_bounds(episode.start) || episode.maze.is_wall(episode.start)) {
        throw SchemaError(source, "start", "not a free cell");
    }
    if (episode.steps.empty()) throw SchemaError(source, "steps", "no steps");
    if (episode.steps.front().cell != episode.start) {
        throw SchemaError(source, "steps[0].cell", "does not match start");
    }
    const GoalMdpFamily family = build_family(episode.maze);
    const TransitionKernel& kernel = family.kernel();
    for (std::size_t i = 0; i < episode.steps.size(); ++i) {
        const EpisodeStep& step = episode.steps[i];
        const std::string path = "steps[" + std::to_string(i) + "]";
        if (step.t != i) throw SchemaError(source, path + ".t", "steps must be numbered 0,1,2,...");
        if (!episode.maze.in_bounds(step.cell)) {
            throw SchemaError(source, path + ".cell", "outside the grid");
        }
        if (episode.maze.is_wall(step.cell)) throw SchemaError(source, path + ".cell", "a wall");
        if (step.action >= kNumMoves) throw SchemaError(source, path + ".action", "unknown action");
        if (i + 1 < episode.steps.size()) {
            const Cell next = episode.steps[i + 1].cell;
            if (!episode.maze.in_bounds(next) ||
                kernel.probability(episode.maze.state_of(step.cell), step.action,
                                   episode.maze.state_of(next)) <= 0.0) {
                throw SchemaError(source, "steps[" + std::to_string(i + 1) + "].cell",
                                  "unreachable from the previous step");
            }
        }
    }
}

std::string episode_to_json(const EpisodeRecord& episode) {
    json walls = json::array();
    for (const Cell& w : episode.maze.walls) walls.push_back(cell_json(w));
    json goals = json::object();
    for (const auto& [label, cell] : episode.maze.goals) {
        goals[std::string(1, label)] = {{"cell", cell_json(cell)}, {"color", goal_color(label)}};
    }
    json steps = json::array();
    for (const EpisodeStep& s : episode.steps) {
        steps.push_back({{"t", s.t}, {"cell", cell_json(s.cell)}, {"action", action_name(s.action)}});
    }
    const json doc = {
        {"maze",
         {{"rows", episode.maze.rows},
          {"cols", episode.maze.cols},
          {"walls", walls},
          {"goals", goals}}},
        {"start", cell_json(episode.start)},
        {"true_goal", std::string(1, episode.true_goal)},
        {"policy_type", to_string(episode.policy_type)},
        {"steps", steps},
        {"meta", {{"beta", episode.beta}, {"gamma", episode.gamma}, {"seed", episode.seed}}},
    };
    return doc.dump(2);
}

EpisodeRecord episode_from_json(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(source, "", std::string("invalid JSON: ") + e.what());
    }
    EpisodeRecord episode;
    const json& maze = field(doc, "maze", "", source);
    const long long rows = as_int(field(maze, "rows", "maze", source), "maze.rows", source);
    const long long cols = as_int(field(maze, "cols", "maze", source), "maze.cols", source);
    if (rows <= 0 || cols <= 0) throw SchemaError(source, "maze", "rows and cols must be positive");
    episode.maze.rows = static_cast<std::size_t>(rows);
    episode.maze.cols = static_cast<std::size_t>(cols);

    const json& walls = field(maze, "walls", "maze", source);
    if (!walls.is_array()) throw SchemaError(source, "maze.walls", "expected an array");
    for (std::size_t i = 0; i < walls.size(); ++i) {
        episode.maze.walls.insert(as_cell(walls[i], "maze.walls[" + std::to_string(i) + "]", source));
    }
    const json& goals = field(maze, "goals", "maze", source);
    if (!goals.is_object()) throw SchemaError(source, "maze.goals", "expected an object");
    for (const auto& [label, goal] : goals.items()) {
        const std::string path = "maze.goals." + label;
        if (label.size() != 1 || label[0] < 'A' || label[0] > 'J') {
            throw SchemaError(source, path, "goal labels are single letters A-J");
        }
        episode.maze.goals.emplace(label[0], as_cell(field(goal, "cell", path, source),
                                                     path + ".cell", source));
        as_string(field(goal, "color", path, source), path + ".color", source);
    }

    episode.start = as_cell(field(doc, "start", "", source), "start", source);
    const std::string goal = as_string(field(doc, "true_goal", "", source), "true_goal", source);
    if (goal.size() != 1) throw SchemaError(source, "true_goal", "expected a single label");
    episode.true_goal = goal[0];
    episode.policy_type = parse_policy_type(
        as_string(field(doc, "policy_type", "", source), "policy_type", source), source);

    const json& steps = field(doc, "steps", "", source);
    if (!steps.is_array()) throw SchemaError(source, "steps", "expected an array");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string path = "steps[" + std::to_string(i) + "]";
        EpisodeStep step;
        const long long t = as_int(field(steps[i], "t", path, source), path + ".t", source);
        if (t < 0) throw SchemaError(source, path + ".t", "must be >= 0");
        step.t = static_cast<std::size_t>(t);
        step.cell = as_cell(field(steps[i], "cell", path, source), path + ".cell", source);
        const auto action =
            parse_action_name(as_string(field(steps[i], "action", path, source), path + ".action",
                                        source));
        if (!action) throw SchemaError(source, path + ".action", "unknown action");
        step.action = *action;
        episode.steps.push_back(step);
    }

    const json& meta = field(doc, "meta", "", source);
    episode.beta = as_real(field(meta, "beta", "meta", source), "meta.beta", source);
    episode.gamma = as_real(field(meta, "gamma", "meta", source), "meta.gamma", source);
    const long long seed = as_int(field(meta, "seed", "meta", source), "meta.seed", source);
    episode.seed = static_cast<std::uint64_t>(seed);

    validate_episode(episode, source);
    return episode;
}

void write_episode(const EpisodeRecord& episode, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write episode file " + path.string());
    out << episode_to_json(episode) << '\n';
    if (!out) throw Error("failed writing episode file " + path.string());
}

EpisodeRecord read_episode(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open episode file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return episode_from_json(buffer.str(), path.string());
}

ResponseLog read_response_log(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResponseHeader) throw ParseError("unexpected response-log header", 1);

    ResponseLog log;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 8) throw ParseError("expected 8 columns", number);

        ResponseRow row;
        row.participant_id = f[0];
        row.episode_id = f[1];
        row.policy_type = f[2];
        char* end = nullptr;
        row.stop_time_secs = std::strtod(f[3].c_str(), &end);
        if (f[3].empty() || *end != '\0' || row.stop_time_secs < 0.0) {
            throw ParseError("bad stop_time_secs", number);
        }
        if (f[4].size() != 1 || f[5].size() != 1) throw ParseError("goal labels are single letters", number);
        row.predicted_goal = f[4][0];
        row.true_goal = f[5][0];
        if (f[6] == "true" || f[6] == "1") {
            row.correct = true;
        } else if (f[6] == "false" || f[6] == "0") {
            row.correct = false;
        } else {
            throw ParseError("correct must be true/false", number);
        }
        if (f[7].size() != 1 || f[7][0] < '1' || f[7][0] > '7') {
            throw ParseError("confidence must be an integer in 1..7", number);
        }
        row.confidence = f[7][0] - '0';
        if (row.correct != (row.predicted_goal == row.true_goal)) {
            log.warnings.push_back("line " + std::to_string(number) +
                                   ": correct flag disagrees with the goal labels");
        }
        log.rows.push_back(std::move(row));
    }
    return log;
}

void write_response_log(std::ostream& out, const std::vector<ResponseRow>& rows) {
    out << kResponseHeader << '\n';
    for (const ResponseRow& r : rows) {
        char stop[32];
        std::snprintf(stop, sizeof stop, "%.3f", r.stop_time_secs);
        out << r.participant_id << ',' << r.episode_id << ',' << r.policy_type << ',' << stop << ','
            << r.predicted_goal << ',' << r.true_goal << ',' << (r.correct ? "true" : "false")
            << ',' << r.confidence << '\n';
    }
}

std::map<std::string, ResponseSummary> summarize_responses(const std::vector<ResponseRow>& rows) {
    std::map<std::string, ResponseSummary> out;
    for (const ResponseRow& r : rows) {
        ResponseSummary& s = out[r.policy_type];
        s.responses += 1;
        s.correct += r.correct ? 1 : 0;
        s.mean_stop_time_secs += r.stop_time_secs;
        s.mean_confidence += r.confidence;
    }
    for (auto& [type, s] : out) {
        s.mean_stop_time_secs /= static_cast<double>(s.responses);
        s.mean_confidence /= static_cast<double>(s.responses);
    }
    return out;
}

}  // namespace legible
