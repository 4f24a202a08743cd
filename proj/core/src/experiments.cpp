#include "legible/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "legible/episodes.hpp"
#include "legible/errors.hpp"
#include "legible/irl.hpp"
#include "legible/metrics.hpp"
#include "legible/seeding.hpp"

namespace legible {
namespace {

// Stream tags for mix_seed so unrelated draws never share a seed.
constexpr std::uint64_t kScenarioStream = 0x5CE7A210;
constexpr std::uint64_t kSampleStream = 0x5A3F1E00;
constexpr std::uint64_t kIrlStream = 0x1A1;
constexpr std::uint64_t kEpisodeStream = 0xE915;

std::string cell_text(Cell c) { return std::to_string(c.row) + ":" + std::to_string(c.col); }

std::string format_g(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.6g", v);
    return buffer;
}

std::uint64_t name_hash(const std::string& name) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ResultRow base_row(const MazeSpec& spec, const SampleSpec& sample, const BenchConfig& config,
                   const char* framework, std::size_t horizon) {
    ResultRow row;
    row.experiment = sample.experiment;
    row.framework = framework;
    row.maze = sample.maze_name;
    row.goals = spec.goals.size();
    row.states = spec.num_states();
    row.sample_id = sample.sample_id;
    row.start = cell_text(spec.cell_of(sample.scenario.start));
    row.goal = std::string(1, spec.goal_labels().at(sample.scenario.goal));
    row.seed = config.seed;
    row.beta = config.beta;
    row.gamma = config.gamma;
    row.eta = config.eta;
    const UctConfig& u = config.uct;
    row.notes = "tol=" + format_g(config.solve.tolerance) + ";horizon=" + std::to_string(horizon) +
                ";timeout=" + format_g(config.timeout_secs) +
                ";uct_iters=" + std::to_string(u.iterations_per_step) +
                ";uct_c=" + format_g(u.exploration_constant) +
                ";uct_depth=" + std::to_string(u.rollout_horizon) +
                ";uct_rollout=" + (u.rollout_policy == RolloutPolicy::random ? "random" : "boltzmann") +
                ";uct_dist=" + to_string(u.distance_kind) + ";uct_w=" + format_g(u.legibility_weight);
    return row;
}

std::uint64_t sample_seed(const BenchConfig& config, const SampleSpec& sample) {
    return mix_seed(mix_seed(config.seed, name_hash(sample.maze_name)),
                    kSampleStream + sample.sample_id);
}

void fill_legibility(ResultRow& row, const Trajectory& trajectory, const LegibleProblem& problem,
                     const ObserverModel& observer, const BenchConfig& config) {
    const TransitionKernel& kernel = problem.family().kernel();
    const std::size_t goal = problem.target_goal();
    row.leg_polmdp = polmdp_legibility(trajectory, problem);
    row.leg_miura_kl =
        miura_legibility(trajectory, kernel, observer, goal, DistanceKind::kl, config.uct.kl_cap);
    row.leg_miura_euclid =
        miura_legibility(trajectory, kernel, observer, goal, DistanceKind::euclidean);
}

// A sample succeeds when the framework produces its episode within the
// timeout; whether that episode ends on the target goal is recorded apart.
void note_arrival(ResultRow& row, const Trajectory& trajectory, const GoalMdpFamily& family,
                  std::size_t goal) {
    const bool reached =
        trajectory.reached_terminal && trajectory.final_state == family.goal_states[goal];
    row.notes += std::string(";reached=") + (reached ? "true" : "false") +
                 ";steps=" + std::to_string(trajectory.size());
}

std::vector<ResultRow> run_samples(const BenchConfig& config, const std::string& experiment,
                                   const std::vector<std::string>& fixtures,
                                   const ProgressFn& progress) {
    config.validate();
    std::vector<MazeSpec> specs;
    std::vector<SampleSpec> samples;
    std::vector<std::size_t> spec_of;
    for (const std::string& name : fixtures) {
        if (!config.only.empty() &&
            std::find(config.only.begin(), config.only.end(), name) == config.only.end()) {
            continue;
        }
        specs.push_back(load_fixture(config.fixtures_dir, name));
        const auto scenarios = random_scenarios(
            specs.back(), config.samples, mix_seed(mix_seed(config.seed, name_hash(name)), kScenarioStream));
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            samples.push_back({experiment, name, i, scenarios[i]});
            spec_of.push_back(specs.size() - 1);
        }
    }

    std::filesystem::create_directories(config.out_dir);
    ResultSink sink(config.out_dir / (experiment + ".csv"));
    std::vector<ResultRow> rows(2 * samples.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    std::exception_ptr failure;

    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) return;
            try {
                const MazeSpec& spec = specs[spec_of[i]];
                ResultRow rows_for[2] = {run_polmdp_sample(spec, samples[i], config),
                                         run_lmdp_sample(spec, samples[i], config)};
                for (std::size_t f = 0; f < 2; ++f) {
                    rows[2 * i + f] = rows_for[f];
                    sink.submit(2 * i + f, rows_for[f]);
                    if (progress) {
                        std::lock_guard lock(progress_mutex);
                        progress(rows_for[f]);
                    }
                }
            } catch (...) {
                std::lock_guard lock(progress_mutex);
                if (!failure) failure = std::current_exception();
                next = samples.size();
                return;
            }
        }
    };
    const std::size_t workers = std::min(config.workers, std::max<std::size_t>(samples.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(worker);
    worker();
    for (std::thread& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

}  // namespace

void BenchConfig::apply_full_scale() {
    samples = 250;
    timeout_secs = 7200.0;
    irl_scenarios = 250;
}

void BenchConfig::validate() const {
    if (samples == 0) throw std::invalid_argument("samples must be >= 1");
    if (!(timeout_secs > 0.0)) throw std::invalid_argument("timeout must be > 0");
    if (workers == 0) throw std::invalid_argument("workers must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0, 1)");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    uct.validate();
}

std::vector<std::string> goal_scaling_fixtures() {
    std::vector<std::string> names;
    for (int goals = 3; goals <= 10; ++goals) {
        char name[32];
        std::snprintf(name, sizeof name, "goals_25x25_%02d", goals);
        names.emplace_back(name);
    }
    return names;
}

MazeSpec load_fixture(const std::filesystem::path& fixtures_dir, const std::string& name) {
    const std::filesystem::path path = fixtures_dir / (name + ".maze");
    if (!std::filesystem::exists(path)) throw FixtureMissing("missing maze fixture " + path.string());
    return load_maze(path);
}

std::size_t episode_horizon(const MazeSpec& spec, StateId start, std::size_t goal) {
    const Cell target = spec.goals.at(spec.goal_labels().at(goal));
    const int d = bfs_distances(spec, target).at(start);
    if (d < 0) throw InvalidSpec("goal unreachable from start " + cell_text(spec.cell_of(start)));
    return 3 * static_cast<std::size_t>(d) + 20;
}

ResultRow run_polmdp_sample(const MazeSpec& spec, const SampleSpec& sample,
                            const BenchConfig& config) {
    const auto [start, goal] = sample.scenario;
    const std::size_t horizon = episode_horizon(spec, start, goal);
    ResultRow row = base_row(spec, sample, config, "polmdp", horizon);
    GoalMdpFamily family = build_family(spec, {.discount = config.gamma});

    const Deadline deadline = Deadline::after_seconds(config.timeout_secs);
    const Stopwatch clock;
    try {
        auto solved = std::make_shared<const SolvedFamily>(
            solve_family(std::move(family), config.solve, deadline));
        const LegibleProblem problem(solved, goal, config.beta);
        const LegibleSolution legible = solve_legible(problem, config.solve, deadline);
        Trajectory trajectory = rollout(solved->family.mdps[goal], legible.policy, start, horizon,
                                        sample_seed(config, sample));
        row.seconds = clock.seconds();
        trajectory.true_goal = goal;
        trajectory.policy_type = PolicyType::legible;
        row.success = row.seconds <= config.timeout_secs;
        note_arrival(row, trajectory, solved->family, goal);
        if (row.success) {
            fill_legibility(row, trajectory, problem, ObserverModel(*solved, config.eta), config);
        }
    } catch (const TimeoutError&) {
        row.seconds = clock.seconds();
        row.success = false;
    }
    return row;
}

ResultRow run_lmdp_sample(const MazeSpec& spec, const SampleSpec& sample,
                          const BenchConfig& config) {
    const auto [start, goal] = sample.scenario;
    const std::size_t horizon = episode_horizon(spec, start, goal);
    ResultRow row = base_row(spec, sample, config, "lmdp", horizon);
    GoalMdpFamily family = build_family(spec, {.discount = config.gamma});
    UctConfig uct = config.uct;
    uct.observer_eta = config.eta;
    uct.rng_seed = sample_seed(config, sample);

    const Deadline deadline = Deadline::after_seconds(config.timeout_secs);
    const Stopwatch clock;
    try {
        auto solved = std::make_shared<const SolvedFamily>(
            solve_family(std::move(family), config.solve, deadline));
        const LmdpPlanner planner(solved, uct);
        LmdpEpisode episode = lmdp_rollout(planner, start, goal, horizon, deadline);
        row.seconds = clock.seconds();
        row.success = row.seconds <= config.timeout_secs;
        note_arrival(row, episode.trajectory, solved->family, goal);
        if (row.success) {
            const LegibleProblem problem(solved, goal, config.beta);
            fill_legibility(row, episode.trajectory, problem, planner.observer(), config);
        }
    } catch (const TimeoutError&) {
        row.seconds = clock.seconds();
        row.success = false;
    }
    return row;
}

std::vector<ResultRow> run_goal_scaling(const BenchConfig& config, const ProgressFn& progress) {
    return run_samples(config, "goal_scaling", goal_scaling_fixtures(), progress);
}

std::vector<ResultRow> run_state_scaling(const BenchConfig& config, const ProgressFn& progress) {
    return run_samples(config, "state_scaling", kStateScalingFixtures, progress);
}

const char* to_string(IrlCondition condition) {
    return condition == IrlCondition::trajectory ? "trajectory" : "samples";
}

std::vector<AccuracyCurve> run_irl_experiment(const BenchConfig& config, IrlCondition condition) {
    config.validate();
    const std::size_t K = config.irl_max_pairs;
    const PolicyType teachers[2] = {PolicyType::legible, PolicyType::optimal};
    // Per teacher, per k: one 0/1 outcome per demonstration.
    std::vector<std::vector<double>> sums(2, std::vector<double>(K, 0.0));
    std::size_t runs = 0;

    for (std::size_t m = 0; m < kIrlFixtures.size(); ++m) {
        const MazeSpec spec = load_fixture(config.fixtures_dir, kIrlFixtures[m]);
        auto solved = std::make_shared<const SolvedFamily>(
            solve_family(build_family(spec, {.discount = config.gamma}), config.solve));
        const GoalPolicies policies = make_goal_policies(solved, config.beta, config.solve);
        const GoalMdpFamily& family = solved->family;
        const std::uint64_t maze_seed = mix_seed(mix_seed(config.seed, kIrlStream), m);
        const auto starts = family.spec.free_non_goal_cells();
        Rng start_rng(mix_seed(maze_seed, 0));
        std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);

        for (std::size_t s = 0; s < config.irl_scenarios; ++s) {
            const StateId start = family.spec.state_of(starts[pick(start_rng)]);
            for (std::size_t goal = 0; goal < family.num_goals(); ++goal) {
                const std::uint64_t demo_seed =
                    mix_seed(maze_seed, 1 + s * family.num_goals() + goal);
                for (std::size_t t = 0; t < 2; ++t) {
                    std::vector<Demonstration> demos;
                    if (condition == IrlCondition::samples) {
                        demos.push_back(sample_demo_states(family, policies, teachers[t], goal, K,
                                                           demo_seed));
                    } else {
                        demos = sample_demo_trajectories(family, policies, teachers[t], start, goal,
                                                         config.irl_trajectories,
                                                         config.irl_horizon, demo_seed);
                    }
                    for (const Demonstration& demo : demos) {
                        const auto correct = incremental_correctness(demo, *solved, K, config.eta);
                        for (std::size_t k = 0; k < K; ++k) {
                            sums[t][k] += correct[k] ? 1.0 : 0.0;
                        }
                        if (t == 0) ++runs;
                    }
                }
            }
        }
    }

    std::vector<AccuracyCurve> curves;
    for (std::size_t t = 0; t < 2; ++t) {
        AccuracyCurve curve;
        curve.condition = condition;
        curve.teacher = teachers[t];
        curve.runs = runs;
        const double n = static_cast<double>(runs);
        for (std::size_t k = 0; k < K; ++k) {
            const double mean = sums[t][k] / n;
            // Outcomes are 0/1, so the sample variance is n p (1 - p) / (n - 1).
            const double variance = runs > 1 ? n * mean * (1.0 - mean) / (n - 1.0) : 0.0;
            curve.mean.push_back(mean);
            curve.stderr_.push_back(std::sqrt(std::max(variance, 0.0) / n));
        }
        curves.push_back(std::move(curve));
    }

    std::filesystem::create_directories(config.out_dir);
    const auto path = config.out_dir / (std::string("irl_") + to_string(condition) + ".csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "condition,teacher,k,mean,stderr,n,seed,beta,gamma,eta\n";
    for (const AccuracyCurve& c : curves) {
        for (std::size_t k = 0; k < K; ++k) {
            char line[256];
            std::snprintf(line, sizeof line, "%s,%s,%zu,%.10g,%.10g,%zu,%llu,%.17g,%.17g,%.17g\n",
                          to_string(condition), to_string(c.teacher), k + 1, c.mean[k],
                          c.stderr_[k], c.runs, static_cast<unsigned long long>(config.seed),
                          config.beta, config.gamma, config.eta);
            out << line;
        }
    }
    if (!out) throw Error("failed writing " + path.string());
    return curves;
}

EpisodeExport export_episodes(const BenchConfig& config) {
    config.validate();
    if (config.episode_pool == 0) throw std::invalid_argument("episode pool must be >= 1");
    const MazeSpec spec = load_fixture(config.fixtures_dir, kEpisodeFixture);
    auto solved = std::make_shared<const SolvedFamily>(
        solve_family(build_family(spec, {.discount = config.gamma}), config.solve));
    const GoalPolicies policies = make_goal_policies(solved, config.beta, config.solve);
    const GoalMdpFamily& family = solved->family;
    const std::uint64_t pool_seed = mix_seed(config.seed, kEpisodeStream);
    const auto scenarios = random_scenarios(spec, config.episode_pool, pool_seed);

    EpisodeExport result;
    for (PolicyType type : {PolicyType::legible, PolicyType::optimal}) {
        const auto dir = config.out_dir / "episodes" / to_string(type);
        std::filesystem::create_directories(dir);
        auto& files = type == PolicyType::legible ? result.legible : result.optimal;
        nlohmann::json manifest = {{"condition", to_string(type)},
                                   {"episodes", nlohmann::json::array()}};
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            const auto [start, goal] = scenarios[i];
            const std::uint64_t seed = mix_seed(pool_seed, i + 1);
            Trajectory trajectory =
                rollout(family.mdps[goal], policies.get(type, goal), start,
                        episode_horizon(spec, start, goal), seed);
            const EpisodeRecord episode =
                make_episode(family, trajectory, goal, type, config.beta, seed);
            char name[32];
            std::snprintf(name, sizeof name, "episode_%02zu.json", i);
            validate_episode(episode, (dir / name).string());
            write_episode(episode, dir / name);
            files.push_back(dir / name);
            manifest["episodes"].push_back(name);
        }
        std::ofstream out(dir / "manifest.json", std::ios::trunc);
        if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
        out << manifest.dump(2) << '\n';
    }
    return result;
}

}  // namespace legible
