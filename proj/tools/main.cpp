// legible: command-line front end for solving mazes, running the benchmark
// and IRL experiments, and exporting guessing-game episodes.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "legible/episodes.hpp"
#include "legible/errors.hpp"
#include "legible/experiments.hpp"
#include "legible/irl.hpp"
#include "legible/legible.hpp"
#include "legible/lmdp.hpp"
#include "legible/maze.hpp"
#include "legible/metrics.hpp"
#include "legible/results.hpp"

#ifndef LEGIBLE_DEFAULT_FIXTURES
#define LEGIBLE_DEFAULT_FIXTURES "data/mazes"
#endif

namespace {

using namespace legible;

Cell parse_cell(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("cell", "expected row:col");
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

void print_row(const ResultRow& row) {
    std::fprintf(stderr, "%-14s %-6s sample %3zu %-5s %9.3fs\n", row.maze.c_str(),
                 row.framework.c_str(), row.sample_id, row.success ? "ok" : "FAIL", row.seconds);
}

struct SolveArgs {
    std::string maze;
    std::string goal = "A";
    std::string start;
    std::string policy = "legible";
    std::size_t horizon = 0;
    std::string episode_out;
};

int run_solve(const SolveArgs& args, const BenchConfig& config) {
    const MazeSpec spec = load_maze(args.maze);
    auto solved = std::make_shared<const SolvedFamily>(
        solve_family(build_family(spec, {.discount = config.gamma}), config.solve));
    const GoalMdpFamily& family = solved->family;
    if (args.goal.size() != 1 || !family.goal_index(args.goal[0])) {
        throw InvalidSpec("unknown goal label '" + args.goal + "'");
    }
    const std::size_t goal = *family.goal_index(args.goal[0]);
    Cell start_cell;
    if (!args.start.empty()) {
        start_cell = parse_cell(args.start);
    } else if (spec.default_start) {
        start_cell = *spec.default_start;
    } else {
        throw InvalidSpec("maze has no S cell; pass --start row:col");
    }
    const StateId start = spec.state_of(start_cell);
    const std::size_t horizon = args.horizon ? args.horizon : episode_horizon(spec, start, goal);
    const LegibleProblem problem(solved, goal, config.beta);

    Trajectory trajectory;
    PolicyType type = PolicyType::legible;
    if (args.policy == "lmdp") {
        UctConfig uct = config.uct;
        uct.observer_eta = config.eta;
        uct.rng_seed = config.seed;
        const LmdpPlanner planner(solved, uct);
        trajectory = lmdp_rollout(planner, start, goal, horizon).trajectory;
        type = PolicyType::lmdp;
    } else {
        type = args.policy == "optimal" ? PolicyType::optimal : PolicyType::legible;
        const GoalPolicies policies = make_goal_policies(solved, config.beta, config.solve);
        trajectory = rollout(family.mdps[goal], policies.get(type, goal), start, horizon, config.seed);
        trajectory.true_goal = goal;
        trajectory.policy_type = type;
    }

    std::cout << format_maze(spec) << '\n';
    for (const Step& s : trajectory.steps) {
        const Cell c = spec.cell_of(s.state);
        std::cout << s.t << ' ' << c.row << ':' << c.col << ' ' << action_name(s.action) << '\n';
    }
    const Cell end = spec.cell_of(trajectory.final_state);
    std::cout << "final " << end.row << ':' << end.col
              << (trajectory.reached_terminal ? " (goal)" : "") << '\n';
    if (!trajectory.empty()) {
        const ObserverModel observer(*solved, config.eta);
        std::cout << "polmdp_legibility " << polmdp_legibility(trajectory, problem) << '\n'
                  << "miura_kl " << miura_legibility(trajectory, family.kernel(), observer, goal,
                                                     DistanceKind::kl)
                  << '\n'
                  << "miura_euclid "
                  << miura_legibility(trajectory, family.kernel(), observer, goal,
                                      DistanceKind::euclidean)
                  << '\n';
    }
    if (!args.episode_out.empty()) {
        if (type == PolicyType::lmdp) throw InvalidSpec("episodes are exported for legible/optimal only");
        write_episode(make_episode(family, trajectory, goal, type, config.beta, config.seed),
                      args.episode_out);
    }
    return 0;
}

void write_fixture(const std::filesystem::path& dir, const std::string& name, const MazeSpec& spec) {
    std::ofstream out(dir / (name + ".maze"), std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / (name + ".maze")).string());
    out << format_maze(spec);
}

// Regenerates the shipped maze fixtures.
void generate_fixtures(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_fixture(dir, "states_05x08", parse_maze("A..#...B\n"
                                                  "...#....\n"
                                                  "........\n"
                                                  ".##..##.\n"
                                                  "S......C\n"));
    const std::size_t sizes[] = {10, 25, 40, 50, 60, 75};
    for (std::size_t n : sizes) {
        char name[32];
        std::snprintf(name, sizeof name, "states_%02zux%02zu", n, n);
        write_fixture(dir, name, generate_maze(n, n, 6, 0.15, 1000 + n));
    }
    for (std::size_t goals = 3; goals <= 10; ++goals) {
        write_fixture(dir, goal_scaling_fixtures()[goals - 3], generate_maze(25, 25, goals, 0.15, 2525));
    }
    for (std::size_t m = 0; m < kIrlFixtures.size(); ++m) {
        write_fixture(dir, kIrlFixtures[m], generate_maze(10, 10, 6, 0.15, 100 + m));
    }
    write_fixture(dir, kEpisodeFixture, generate_maze(10, 10, 6, 0.15, 200));
    write_fixture(dir, "fig1", parse_maze("...A..B\n"
                                          ".......\n"
                                          ".......\n"
                                          ".......\n"
                                          "S......\n"));
    write_fixture(dir, "corridor", parse_maze("A..S..B\n"));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Policy-legible MDP planning, baselines and experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    BenchConfig config;
    config.fixtures_dir = LEGIBLE_DEFAULT_FIXTURES;
    bool full_scale = false;
    std::string fixtures = config.fixtures_dir.string();
    std::string out_dir = config.out_dir.string();
    app.add_option("--seed", config.seed, "Master seed")->capture_default_str();
    app.add_option("--beta", config.beta, "Legibility temperature")->capture_default_str();
    app.add_option("--gamma", config.gamma, "Discount factor")->capture_default_str();
    app.add_option("--eta", config.eta, "Observer and learner rationality")->capture_default_str();
    app.add_option("--timeout-secs", config.timeout_secs, "Per-sample timeout")->capture_default_str();
    app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    app.add_flag("--full-scale", full_scale, "250 samples per configuration and a 2 h timeout");
    app.add_option("--fixtures", fixtures, "Maze fixture directory")->capture_default_str();
    app.add_option("--samples", config.samples, "Samples per configuration")->capture_default_str();
    app.add_option("--workers", config.workers, "Parallel samples")->capture_default_str();
    app.add_option("--tolerance", config.solve.tolerance, "Value iteration tolerance")
        ->capture_default_str();
    app.add_option("--uct-iterations", config.uct.iterations_per_step, "UCT iterations per step")
        ->capture_default_str();
    app.add_option("--uct-depth", config.uct.rollout_horizon, "UCT simulation depth")
        ->capture_default_str();

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Solve one maze and print a rollout");
    solve->add_option("maze", solve_args.maze, "Maze file")->required()->check(CLI::ExistingFile);
    solve->add_option("--goal", solve_args.goal, "Target goal label")->capture_default_str();
    solve->add_option("--start", solve_args.start, "Start cell row:col (default: the S cell)");
    solve->add_option("--policy", solve_args.policy, "legible, optimal or lmdp")
        ->check(CLI::IsMember({"legible", "optimal", "lmdp"}))
        ->capture_default_str();
    solve->add_option("--horizon", solve_args.horizon, "Steps (default: 3 x distance + 20)");
    solve->add_option("--episode-out", solve_args.episode_out, "Also write the episode JSON here");

    auto* bench = app.add_subcommand("bench", "Scalability benchmark");
    bench->require_subcommand(1);
    auto* goals = bench->add_subcommand("goals", "25x25 maze with 3..10 goals");
    auto* states = bench->add_subcommand("states", "Seven maze sizes from 5x8 to 75x75");
    for (auto* sub : {goals, states}) {
        sub->add_option("--only", config.only, "Restrict to these fixture names");
    }
    auto* balance = bench->add_subcommand("balance", "Keep paired successes up to a quota");
    std::string balance_in;
    std::string balance_out;
    std::size_t quota = 100;
    balance->add_option("input", balance_in, "Raw results CSV")->required()->check(CLI::ExistingFile);
    balance->add_option("--quota", quota, "Samples kept per configuration")->capture_default_str();
    balance->add_option("-o,--output", balance_out, "Balanced CSV (default: stdout)");

    auto* irl = app.add_subcommand("irl", "Goal-prediction accuracy curves");
    irl->require_subcommand(1);
    auto* irl_trajectory = irl->add_subcommand("trajectory", "Pairs revealed along trajectories");
    auto* irl_samples = irl->add_subcommand("samples", "Unlinked random-state pairs");
    for (auto* sub : {irl_trajectory, irl_samples}) {
        sub->add_option("--scenarios", config.irl_scenarios, "Start draws per maze")
            ->capture_default_str();
    }

    auto* export_cmd = app.add_subcommand("export-episodes", "Episode pools for the guessing game");
    export_cmd->add_option("--pool", config.episode_pool, "Episodes per condition")
        ->capture_default_str();

    auto* aggregate = app.add_subcommand("aggregate-responses", "Summarize a guessing-game response log");
    std::string responses;
    aggregate->add_option("input", responses, "Response CSV")->required()->check(CLI::ExistingFile);

    auto* gen = app.add_subcommand("gen-fixtures", "Regenerate the maze fixtures");
    std::string gen_dir;
    gen->add_option("dir", gen_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        // Explicit flags win over --full-scale.
        if (full_scale) {
            const std::size_t samples = config.samples;
            const double timeout = config.timeout_secs;
            const std::size_t scenarios = config.irl_scenarios;
            config.apply_full_scale();
            if (app.count("--samples")) config.samples = samples;
            if (app.count("--timeout-secs")) config.timeout_secs = timeout;
            if (irl->got_subcommand(irl_trajectory) ? irl_trajectory->count("--scenarios")
                                                    : irl_samples->count("--scenarios")) {
                config.irl_scenarios = scenarios;
            }
        }
        config.fixtures_dir = fixtures;
        config.out_dir = out_dir;
        config.validate();

        if (*solve) return run_solve(solve_args, config);
        if (*goals || *states) {
            const auto rows = *goals ? run_goal_scaling(config, print_row)
                                     : run_state_scaling(config, print_row);
            std::size_t failures = 0;
            for (const ResultRow& r : rows) failures += r.success ? 0 : 1;
            std::fprintf(stderr, "%zu rows, %zu failed, written to %s\n", rows.size(), failures,
                         config.out_dir.string().c_str());
            return 0;
        }
        if (*balance) {
            const auto balanced = balance_results(read_results(balance_in), quota);
            if (balance_out.empty()) {
                write_results(std::cout, balanced);
            } else {
                std::ofstream out(balance_out, std::ios::trunc);
                if (!out) throw Error("cannot write " + balance_out);
                write_results(out, balanced);
            }
            return 0;
        }
        if (*irl_trajectory || *irl_samples) {
            const auto condition = *irl_trajectory ? IrlCondition::trajectory : IrlCondition::samples;
            for (const AccuracyCurve& c : run_irl_experiment(config, condition)) {
                std::printf("%s teacher (%zu runs):", to_string(c.teacher), c.runs);
                for (std::size_t k = 0; k < c.mean.size(); ++k) std::printf(" %.3f", c.mean[k]);
                std::printf("\n");
            }
            return 0;
        }
        if (*export_cmd) {
            const EpisodeExport result = export_episodes(config);
            std::printf("%zu legible and %zu optimal episodes under %s\n", result.legible.size(),
                        result.optimal.size(), (config.out_dir / "episodes").string().c_str());
            return 0;
        }
        if (*aggregate) {
            std::ifstream in(responses);
            const ResponseLog log = read_response_log(in);
            for (const std::string& w : log.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            std::printf("policy_type,responses,correct,accuracy,mean_stop_time_secs,mean_confidence\n");
            for (const auto& [type, s] : summarize_responses(log.rows)) {
                std::printf("%s,%zu,%zu,%.4f,%.4f,%.4f\n", type.c_str(), s.responses, s.correct,
                            static_cast<double>(s.correct) / static_cast<double>(s.responses),
                            s.mean_stop_time_secs, s.mean_confidence);
            }
            return 0;
        }
        if (*gen) {
            generate_fixtures(gen_dir);
            return 0;
        }
    } catch (const InsufficientSamples& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
