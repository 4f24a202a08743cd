#pragma once

// Experiment drivers behind the CLI: the goal- and state-scaling timing
// comparison between PoL-MDP and the L-MDP baseline, the IRL goal-prediction
// accuracy curves, and the guessing-game episode export.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "legible/legible.hpp"
#include "legible/lmdp.hpp"
#include "legible/maze.hpp"
#include "legible/results.hpp"

namespace legible {

struct BenchConfig {
    std::filesystem::path fixtures_dir;
    std::filesystem::path out_dir = "results";
    std::size_t samples = 10;
    double timeout_secs = 300.0;
    std::uint64_t seed = 0;
    double beta = kDefaultBeta;
    double gamma = 0.9;
    double eta = 1.0;
    SolveSettings solve{1e-10, kDefaultMaxIterations};
    UctConfig uct;
    std::size_t workers = 1;
    std::size_t episode_pool = 37;
    std::size_t irl_scenarios = 50;
    std::size_t irl_max_pairs = 20;
    std::size_t irl_trajectories = 10;
    std::size_t irl_horizon = 20;
    // Only these fixtures (by name) when non-empty.
    std::vector<std::string> only;

    // 250 samples per configuration, a 2-hour timeout, 250 IRL scenarios.
    void apply_full_scale();
    // Throws std::invalid_argument.
    void validate() const;
};

inline const std::vector<std::string> kStateScalingFixtures = {
    "states_05x08", "states_10x10", "states_25x25", "states_40x40",
    "states_50x50", "states_60x60", "states_75x75"};
inline const std::vector<std::string> kIrlFixtures = {"irl_10x10_1", "irl_10x10_2", "irl_10x10_3",
                                                      "irl_10x10_4"};
inline constexpr const char* kEpisodeFixture = "episodes_6goals";

std::vector<std::string> goal_scaling_fixtures();

// <fixtures_dir>/<name>.maze; throws FixtureMissing.
MazeSpec load_fixture(const std::filesystem::path& fixtures_dir, const std::string& name);

// Steps allowed per episode: three times the shortest path plus 20.
std::size_t episode_horizon(const MazeSpec& spec, StateId start, std::size_t goal);

struct SampleSpec {
    std::string experiment;
    std::string maze_name;
    std::size_t sample_id = 0;
    Scenario scenario;
};

// One row per framework, failed or not. Model construction is untimed.
ResultRow run_polmdp_sample(const MazeSpec& spec, const SampleSpec& sample,
                            const BenchConfig& config);
ResultRow run_lmdp_sample(const MazeSpec& spec, const SampleSpec& sample,
                          const BenchConfig& config);

using ProgressFn = std::function<void(const ResultRow&)>;

// Both write <out_dir>/<experiment>.csv row by row and return the rows in
// file order.
std::vector<ResultRow> run_goal_scaling(const BenchConfig& config, const ProgressFn& progress = {});
std::vector<ResultRow> run_state_scaling(const BenchConfig& config,
                                         const ProgressFn& progress = {});

enum class IrlCondition { trajectory, samples };
const char* to_string(IrlCondition condition);

struct AccuracyCurve {
    IrlCondition condition = IrlCondition::samples;
    PolicyType teacher = PolicyType::optimal;
    std::vector<double> mean;    // index k-1 for k revealed pairs
    std::vector<double> stderr_;
    std::size_t runs = 0;
};

// Both teachers for one condition; writes <out_dir>/irl_<condition>.csv.
std::vector<AccuracyCurve> run_irl_experiment(const BenchConfig& config, IrlCondition condition);

struct EpisodeExport {
    std::vector<std::filesystem::path> legible;
    std::vector<std::filesystem::path> optimal;
};

// <out_dir>/episodes/<condition>/episode_NN.json plus a manifest.json per
// condition listing the files. Both pools share the same start/goal draws.
EpisodeExport export_episodes(const BenchConfig& config);

}  // namespace legible
