#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "legible/episodes.hpp"
#include "legible/errors.hpp"
#include "support.hpp"

namespace legible {
namespace {

using nlohmann::json;

EpisodeRecord sample_episode() {
    const MazeSpec spec = parse_maze("A...\n.#..\n...B\n");
    const GoalMdpFamily family = build_family(spec);
    Trajectory t;
    t.steps = {{0, spec.state_of({2, 0}), 0}, {1, spec.state_of({1, 0}), 3}, {2, spec.state_of({1, 0}), 0}};
    t.final_state = spec.state_of({0, 0});
    t.reached_terminal = true;
    return make_episode(family, t, 0, PolicyType::legible, 1.0, 0xFEDCBA9876543210ULL);
}

std::string field_path_of(const std::string& text) {
    try {
        episode_from_json(text, "test.json");
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.file(), "test.json");
        return e.field_path();
    }
    return "<no error>";
}

TEST(Episode, MakeAppendsClosingFrame) {
    const EpisodeRecord ep = sample_episode();
    ASSERT_EQ(ep.steps.size(), 4u);
    EXPECT_EQ(ep.start, (Cell{2, 0}));
    EXPECT_EQ(ep.steps.back(), (EpisodeStep{3, {0, 0}, static_cast<ActionId>(Move::noop)}));
    EXPECT_EQ(ep.true_goal, 'A');
    EXPECT_DOUBLE_EQ(ep.gamma, 0.9);
    EXPECT_FALSE(ep.maze.default_start);
    EXPECT_NO_THROW(validate_episode(ep));
}

TEST(Episode, JsonRoundTrip) {
    const EpisodeRecord ep = sample_episode();
    const std::string text = episode_to_json(ep);
    const EpisodeRecord back = episode_from_json(text);
    EXPECT_EQ(back.maze.walls, ep.maze.walls);
    EXPECT_EQ(back.maze.goals, ep.maze.goals);
    EXPECT_EQ(back.start, ep.start);
    EXPECT_EQ(back.true_goal, ep.true_goal);
    EXPECT_EQ(back.policy_type, ep.policy_type);
    EXPECT_EQ(back.steps, ep.steps);
    EXPECT_EQ(back.beta, ep.beta);
    EXPECT_EQ(back.gamma, ep.gamma);
    EXPECT_EQ(back.seed, ep.seed);
    EXPECT_EQ(episode_to_json(back), text);

    const json doc = json::parse(text);
    EXPECT_EQ(doc["maze"]["goals"]["B"]["color"], goal_color('B'));
    EXPECT_EQ(doc["steps"][1]["action"], "right");
    EXPECT_EQ(doc["policy_type"], "legible");
}

TEST(Episode, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "legible_episode_test.json";
    write_episode(sample_episode(), path);
    EXPECT_EQ(read_episode(path).steps, sample_episode().steps);
    std::filesystem::remove(path);
    EXPECT_THROW(read_episode(path), Error);
}

TEST(EpisodeSchema, ErrorsNameTheField) {
    const json good = json::parse(episode_to_json(sample_episode()));
    auto with = [&](auto edit) {
        json doc = good;
        edit(doc);
        return field_path_of(doc.dump());
    };
    EXPECT_EQ(field_path_of("{not json"), "");
    EXPECT_EQ(with([](json& d) { d.erase("maze"); }), "maze");
    EXPECT_EQ(with([](json& d) { d["maze"]["rows"] = "three"; }), "maze.rows");
    EXPECT_EQ(with([](json& d) { d["maze"]["goals"]["A"]["cell"] = json::array({0}); }), "maze.goals.A.cell");
    EXPECT_EQ(with([](json& d) { d["maze"]["goals"]["Z"] = d["maze"]["goals"]["A"]; }), "maze.goals.Z");
    EXPECT_EQ(with([](json& d) { d["maze"]["walls"][0] = "x"; }), "maze.walls[0]");
    EXPECT_EQ(with([](json& d) { d["true_goal"] = "C"; }), "true_goal");
    EXPECT_EQ(with([](json& d) { d["policy_type"] = "lmdp"; }), "policy_type");
    EXPECT_EQ(with([](json& d) { d["start"] = json::array({1, 1}); }), "start");
    EXPECT_EQ(with([](json& d) { d["start"] = json::array({0, 3}); }), "steps[0].cell");
    EXPECT_EQ(with([](json& d) { d["steps"][3]["t"] = 7; }), "steps[3].t");
    EXPECT_EQ(with([](json& d) { d["steps"][2]["action"] = "jump"; }), "steps[2].action");
    EXPECT_EQ(with([](json& d) { d["steps"][1].erase("cell"); }), "steps[1].cell");
    EXPECT_EQ(with([](json& d) { d["steps"] = json::array(); }), "steps");
    EXPECT_EQ(with([](json& d) { d["meta"].erase("seed"); }), "meta.seed");
}

TEST(EpisodeSchema, RejectsImpossibleMoves) {
    const json good = json::parse(episode_to_json(sample_episode()));
    json jump = good;
    jump["steps"][1]["cell"] = json::array({1, 2});
    EXPECT_EQ(field_path_of(jump.dump()), "steps[1].cell");

    json off_grid = good;
    off_grid["steps"][0]["action"] = "left";
    off_grid["steps"][1]["cell"] = json::array({2, -1});
    EXPECT_EQ(field_path_of(off_grid.dump()), "steps[1].cell");

    json into_wall = good;
    into_wall["steps"][2]["cell"] = json::array({1, 1});
    EXPECT_EQ(field_path_of(into_wall.dump()), "steps[2].cell");

    json wrong_action = good;
    wrong_action["steps"][2]["action"] = "right";
    EXPECT_EQ(field_path_of(wrong_action.dump()), "steps[3].cell");
}

std::string golden_path() { return std::string(LEGIBLE_TEST_DATA_DIR) + "/responses_golden.csv"; }

TEST(ResponseLog, GoldenSessionSummary) {
    std::ifstream in(golden_path());
    ASSERT_TRUE(in) << golden_path();
    const ResponseLog log = read_response_log(in);
    ASSERT_EQ(log.rows.size(), 6u);
    EXPECT_TRUE(log.warnings.empty());
    EXPECT_EQ(log.rows[1], (ResponseRow{"p01", "episode_01", "legible", 2.25, 'C', 'B', false, 3}));
    const auto summary = summarize_responses(log.rows);
    ASSERT_EQ(summary.size(), 2u);
    const ResponseSummary& legible = summary.at("legible");
    EXPECT_EQ(legible.responses, 3u);
    EXPECT_EQ(legible.correct, 2u);
    EXPECT_NEAR(legible.mean_stop_time_secs, 1.5, 1e-12);
    EXPECT_NEAR(legible.mean_confidence, 16.0 / 3.0, 1e-12);
    const ResponseSummary& optimal = summary.at("optimal");
    EXPECT_EQ(optimal.responses, 3u);
    EXPECT_EQ(optimal.correct, 2u);
    EXPECT_NEAR(optimal.mean_stop_time_secs, 9.625 / 3.0, 1e-12);
    EXPECT_NEAR(optimal.mean_confidence, 11.0 / 3.0, 1e-12);
}

TEST(ResponseLog, WriteThenRead) {
    const std::vector<ResponseRow> rows{{"p9", "episode_03", "optimal", 12.5, 'B', 'B', true, 7},
                                        {"p9", "episode_04", "legible", 0.0, 'A', 'C', false, 1}};
    std::stringstream io;
    write_response_log(io, rows);
    EXPECT_EQ(read_response_log(io).rows, rows);
}

TEST(ResponseLog, WarnsOnInconsistentFlag) {
    std::istringstream in(std::string(kResponseHeader) + "\np,e,legible,1.0,A,B,true,4\n");
    const ResponseLog log = read_response_log(in);
    ASSERT_EQ(log.warnings.size(), 1u);
    EXPECT_TRUE(log.rows[0].correct);
}

TEST(ResponseLog, RejectsMalformedRows) {
    const std::string header = std::string(kResponseHeader) + "\n";
    for (const char* bad : {"p,e,legible,1.0,A,A,true,8", "p,e,legible,1.0,A,A,true,0",
                            "p,e,legible,-1,A,A,true,4", "p,e,legible,abc,A,A,true,4",
                            "p,e,legible,1.0,A,A,maybe,4", "p,e,legible,1.0,AB,A,true,4",
                            "p,e,legible,1.0,A,A,true", "p,e,legible,1.0,A,A,true,4,extra"}) {
        std::istringstream in(header + bad + "\n");
        EXPECT_THROW(read_response_log(in), ParseError) << bad;
    }
    std::istringstream no_header("p,e,legible,1.0,A,A,true,4\n");
    EXPECT_THROW(read_response_log(no_header), ParseError);
}

}  // namespace
}  // namespace legible
