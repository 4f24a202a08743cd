#pragma once

// Serialized episodes for the guessing-game front end, and the response log
// it writes back.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "legible/maze.hpp"
#include "legible/mdp.hpp"

namespace legible {

struct EpisodeStep {
    std::size_t t = 0;
    Cell cell;
    ActionId action = 0;

    bool operator==(const EpisodeStep&) const = default;
};

struct EpisodeRecord {
    MazeSpec maze;
    Cell start;
    char true_goal = 'A';
    PolicyType policy_type = PolicyType::legible;
    std::vector<EpisodeStep> steps;
    double beta = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
};

// One step per trajectory record plus a closing noop step at the final cell,
// so the last frame shows where the agent ended up.
EpisodeRecord make_episode(const GoalMdpFamily& family, const Trajectory& trajectory,
                           std::size_t true_goal, PolicyType policy_type, double beta,
                           std::uint64_t seed);

// Throws SchemaError (with `source` as the file name) unless the steps start
// at `start`, are numbered 0,1,2,..., stay on free cells, and each consecutive
// pair is a positive-probability transition of the maze kernel.
void validate_episode(const EpisodeRecord& episode, const std::string& source = "<episode>");

std::string episode_to_json(const EpisodeRecord& episode);
// Throws SchemaError with the offending field path.
EpisodeRecord episode_from_json(const std::string& text, const std::string& source = "<episode>");

void write_episode(const EpisodeRecord& episode, const std::filesystem::path& path);
EpisodeRecord read_episode(const std::filesystem::path& path);

inline constexpr std::string_view kResponseHeader =
    "participant_id,episode_id,policy_type,stop_time_secs,predicted_goal,true_goal,correct,"
    "confidence_1_7";

struct ResponseRow {
    std::string participant_id;
    std::string episode_id;
    std::string policy_type;
    double stop_time_secs = 0.0;
    char predicted_goal = 'A';
    char true_goal = 'A';
    bool correct = false;
    int confidence = 1;

    bool operator==(const ResponseRow&) const = default;
};

struct ResponseLog {
    std::vector<ResponseRow> rows;
    std::vector<std::string> warnings;  // e.g. a `correct` flag disagreeing with the labels
};

// Throws ParseError on a malformed header, row, or out-of-range confidence.
ResponseLog read_response_log(std::istream& in);
void write_response_log(std::ostream& out, const std::vector<ResponseRow>& rows);

struct ResponseSummary {
    std::size_t responses = 0;
    std::size_t correct = 0;
    double mean_stop_time_secs = 0.0;
    double mean_confidence = 0.0;
};

// Keyed by policy_type.
std::map<std::string, ResponseSummary> summarize_responses(const std::vector<ResponseRow>& rows);

}  // namespace legible
