#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "legible/episodes.hpp"
#include "legible/errors.hpp"
#include "legible/experiments.hpp"
#include "support.hpp"

namespace legible {
namespace {

namespace fs = std::filesystem;

class Experiments : public ::testing::Test {
protected:
    void SetUp() override {
        out_ = fs::temp_directory_path() /
               ("legible_experiments_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(out_);
        config_.fixtures_dir = oracle::mazes_dir();
        config_.out_dir = out_;
        config_.samples = 2;
        config_.timeout_secs = 60.0;
        config_.uct.iterations_per_step = 100;
    }
    void TearDown() override { fs::remove_all(out_); }

    fs::path out_;
    BenchConfig config_;
};

TEST_F(Experiments, RowsPairFrameworksAndMatchCsv) {
    config_.only = {"goals_25x25_03", "goals_25x25_04"};
    std::size_t seen = 0;
    const auto rows = run_goal_scaling(config_, [&](const ResultRow&) { ++seen; });
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_EQ(seen, 8u);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        EXPECT_EQ(rows[i].framework, "polmdp");
        EXPECT_EQ(rows[i + 1].framework, "lmdp");
        EXPECT_EQ(rows[i].start, rows[i + 1].start);
        EXPECT_EQ(rows[i].goal, rows[i + 1].goal);
        EXPECT_EQ(rows[i].experiment, "goal_scaling");
        EXPECT_EQ(rows[i].states, 625u);
        EXPECT_TRUE(rows[i].success);
        EXPECT_TRUE(rows[i].leg_polmdp.has_value());
        EXPECT_NE(rows[i].notes.find("reached="), std::string::npos);
    }
    EXPECT_EQ(rows[0].goals, 3u);
    EXPECT_EQ(rows[4].goals, 4u);
    const auto written = read_results(out_ / "goal_scaling.csv");
    ASSERT_EQ(written.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(to_csv_line(written[i]), to_csv_line(rows[i]));
}

TEST_F(Experiments, TinyTimeoutFailsEverySample) {
    config_.only = {"states_25x25"};
    config_.timeout_secs = 1e-6;
    const auto rows = run_state_scaling(config_);
    ASSERT_EQ(rows.size(), 4u);
    for (const ResultRow& r : rows) {
        EXPECT_FALSE(r.success) << r.framework;
        EXPECT_FALSE(r.leg_polmdp.has_value());
        EXPECT_FALSE(r.leg_miura_kl.has_value());
    }
}

TEST_F(Experiments, RerunReproducesRowsExceptTiming) {
    config_.only = {"states_10x10"};
    config_.workers = 2;
    auto first = run_state_scaling(config_);
    config_.workers = 1;
    auto second = run_state_scaling(config_);
    ASSERT_EQ(first.size(), second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        first[i].seconds = 0.0;
        second[i].seconds = 0.0;
        EXPECT_EQ(first[i], second[i]) << "row " << i;
    }
    config_.seed = 1;
    const auto other = run_state_scaling(config_);
    EXPECT_NE(other[0].start + other[0].goal + other[2].start, first[0].start + first[0].goal + first[2].start);
}

TEST_F(Experiments, MissingFixtureIsReported) {
    config_.fixtures_dir = out_ / "nowhere";
    EXPECT_THROW(run_state_scaling(config_), FixtureMissing);
    EXPECT_THROW(load_fixture(config_.fixtures_dir, "states_10x10"), FixtureMissing);
}

TEST_F(Experiments, EpisodeHorizonIsThreePathsPlusTwenty) {
    const MazeSpec spec = parse_maze("A....\n.....\n");
    EXPECT_EQ(episode_horizon(spec, spec.state_of({1, 4}), 0), 3u * 5u + 20u);
}

TEST_F(Experiments, ExportWritesValidPools) {
    config_.episode_pool = 1;
    const EpisodeExport one = export_episodes(config_);
    ASSERT_EQ(one.legible.size(), 1u);
    ASSERT_EQ(one.optimal.size(), 1u);

    config_.episode_pool = 37;
    const EpisodeExport pool = export_episodes(config_);
    ASSERT_EQ(pool.legible.size(), 37u);
    ASSERT_EQ(pool.optimal.size(), 37u);
    for (std::size_t i = 0; i < 37; ++i) {
        const EpisodeRecord legible = read_episode(pool.legible[i]);
        const EpisodeRecord optimal = read_episode(pool.optimal[i]);
        EXPECT_EQ(legible.policy_type, PolicyType::legible);
        EXPECT_EQ(optimal.policy_type, PolicyType::optimal);
        EXPECT_EQ(legible.start, optimal.start);
        EXPECT_EQ(legible.true_goal, optimal.true_goal);
        EXPECT_EQ(legible.maze.goals.size(), 6u);
    }
    for (const char* condition : {"legible", "optimal"}) {
        std::ifstream in(out_ / "episodes" / condition / "manifest.json");
        ASSERT_TRUE(in);
        const auto manifest = nlohmann::json::parse(in);
        EXPECT_EQ(manifest["condition"], condition);
        EXPECT_EQ(manifest["episodes"].size(), 37u);
    }
}

TEST_F(Experiments, SmallIrlRunWritesCurves) {
    config_.irl_scenarios = 2;
    config_.irl_max_pairs = 5;
    const auto curves = run_irl_experiment(config_, IrlCondition::samples);
    ASSERT_EQ(curves.size(), 2u);
    EXPECT_EQ(curves[0].teacher, PolicyType::legible);
    EXPECT_EQ(curves[1].teacher, PolicyType::optimal);
    for (const AccuracyCurve& c : curves) {
        ASSERT_EQ(c.mean.size(), 5u);
        EXPECT_EQ(c.runs, 4u * 2u * 6u);
        for (std::size_t k = 0; k < 5; ++k) {
            EXPECT_GE(c.mean[k], 0.0);
            EXPECT_LE(c.mean[k], 1.0);
            EXPECT_GE(c.stderr_[k], 0.0);
        }
    }
    std::ifstream in(out_ / "irl_samples.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "condition,teacher,k,mean,stderr,n,seed,beta,gamma,eta");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    EXPECT_EQ(lines, 10u);
}

TEST(BenchConfig, FullScaleAndValidation) {
    BenchConfig config;
    EXPECT_NO_THROW(config.validate());
    config.apply_full_scale();
    EXPECT_EQ(config.samples, 250u);
    EXPECT_EQ(config.timeout_secs, 7200.0);
    EXPECT_EQ(config.irl_scenarios, 250u);
    config = {};
    config.samples = 0;
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config = {};
    config.gamma = 1.0;
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config = {};
    config.workers = 0;
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config = {};
    config.uct.iterations_per_step = 0;
    EXPECT_THROW(config.validate(), std::invalid_argument);
}

TEST(BenchConfig, FixtureLists) {
    EXPECT_EQ(goal_scaling_fixtures().size(), 8u);
    EXPECT_EQ(goal_scaling_fixtures().front(), "goals_25x25_03");
    EXPECT_EQ(goal_scaling_fixtures().back(), "goals_25x25_10");
    for (const std::string& name : goal_scaling_fixtures()) {
        EXPECT_NO_THROW(load_fixture(oracle::mazes_dir(), name));
    }
    for (const std::string& name : kStateScalingFixtures) EXPECT_NO_THROW(load_fixture(oracle::mazes_dir(), name));
    for (const std::string& name : kIrlFixtures) EXPECT_NO_THROW(load_fixture(oracle::mazes_dir(), name));
}

}  // namespace
}  // namespace legible
