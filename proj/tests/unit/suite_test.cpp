// SPDX-License-Identifier: Apache-2.0
#include "support/fixtures.hpp"

#include <harness/errors.hpp>
#include <harness/runner.hpp>
#include <harness/suite.hpp>

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>

using namespace harness;

namespace
{

std::filesystem::path scratch_dir()
{
    auto dir = std::filesystem::temp_directory_path() / "harness_suite_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string config_yaml(const std::string& suite, const std::string& extra = "")
{
    auto data = harness::testkit::data_dir();
    auto env = suite.rfind("gridhouse", 0) == 0 ? "gridhouse" : "minidb";
    auto split = suite.find("_test") != std::string::npos ? "test" : "train";
    return std::string("environment_id: ") + env + "\nmanifest: " + (data / "suites" / (suite + ".json")).string() +
           "\nsplit: " + split + "\nworlds: " + data.string() + "\n" + extra;
}

} // namespace

TEST(Suite, DefaultBudgets)
{
    EXPECT_EQ(default_budget("gridhouse"), 50);
    EXPECT_EQ(default_budget("minidb"), 15);
    EXPECT_THROW(default_budget("moon"), ConfigError);
}

TEST(Suite, ParsesConfig)
{
    auto c = parse_suite_config(config_yaml("gridhouse_loop_train", "policy: Loop\nruns: 2\nseed: 9\nlog: out.jsonl\n"
                                                                    "layers:\n  regulation: false\n"),
                                "/base");
    EXPECT_EQ(c.environment_id, "gridhouse");
    EXPECT_EQ(c.split, Split::Train);
    EXPECT_EQ(c.runs, 2);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.log, std::filesystem::path("/base/out.jsonl"));
    EXPECT_FALSE(c.toggles.regulation);
    EXPECT_TRUE(c.toggles.action);
    EXPECT_EQ(c.effective_budget(), 50);
    EXPECT_EQ(nlohmann::json::parse(c.policy)["behavior"], "Loop");
    disable_layer(c, "action");
    EXPECT_FALSE(c.toggles.action);
    EXPECT_THROW(disable_layer(c, "telepathy"), ConfigError);
}

TEST(Suite, RejectsBadConfigs)
{
    EXPECT_THROW(parse_suite_config("environment_id: gridhouse\n", "."), ConfigError);
    EXPECT_THROW(parse_suite_config(config_yaml("gridhouse_loop_train", "colour: blue\n"), "."), ConfigError);
    EXPECT_THROW(parse_suite_config(config_yaml("gridhouse_loop_train", "runs: 0\n"), "."), ConfigError);
    EXPECT_THROW(parse_suite_config(config_yaml("gridhouse_loop_train", "budget: -3\n"), "."), ConfigError);
    EXPECT_THROW(parse_suite_config(config_yaml("gridhouse_loop_train", "layers:\n  magic: true\n"), "."), ConfigError);
    EXPECT_THROW(parse_suite_config("[1, 2", "."), ConfigError);
}

TEST(Suite, ResolveChecksSplitAndFreezing)
{
    auto c = parse_suite_config(config_yaml("gridhouse_loop_test"), ".");
    EXPECT_NO_THROW(resolve(c));
    c.split = Split::Train;
    EXPECT_THROW(resolve(c), ConfigError);
    c.split = Split::Test;
    c.environment_id = "minidb";
    EXPECT_THROW(resolve(c), EnvironmentMismatch);
    c.environment_id = "gridhouse";

    auto dir = scratch_dir();
    InterventionSet open("open", 1, harness::testkit::registry());
    save_set(open, dir / "open.json");
    save_set(open.freeze(), dir / "frozen.json");
    c.intervention_set = dir / "open.json";
    EXPECT_THROW(resolve(c), SplitViolation);
    c.intervention_set = dir / "frozen.json";
    EXPECT_TRUE(resolve(c).set.frozen());
}

TEST(Suite, ManifestValidation)
{
    auto ok = R"({"suite_id":"s","environment_id":"minidb","split":"train","tasks":[
        {"task_id":"a","instruction":"x","world_id":"shop","success_spec":{"task_kind":"count","answer":"1"}}]})";
    auto m = parse_manifest(ok);
    ASSERT_EQ(m.tasks.size(), 1u);
    EXPECT_EQ(m.tasks[0].environment_id, "minidb");
    auto dup = R"({"suite_id":"s","environment_id":"minidb","split":"train","tasks":[
        {"task_id":"a","instruction":"x","world_id":"shop","success_spec":{}},
        {"task_id":"a","instruction":"y","world_id":"shop","success_spec":{}}]})";
    EXPECT_THROW(parse_manifest(dup), ConfigError);
    auto empty = R"({"suite_id":"s","environment_id":"minidb","split":"train","tasks":[
        {"task_id":"a","instruction":"","world_id":"shop","success_spec":{}}]})";
    EXPECT_THROW(parse_manifest(empty), ConfigError);
    EXPECT_THROW(parse_manifest("{}"), ConfigError);
    EXPECT_EQ(parse_split(to_string(Split::Test)), Split::Test);
}

TEST(Suite, WorkerCountDoesNotChangeResults)
{
    auto tasks = harness::testkit::load_suites({ "minidb_freetext_test", "gridhouse_wrongtool_test" });
    auto policy = harness::testkit::scripted(Behavior::FollowHint);
    SuiteRun run;
    run.policy = policy.get();
    run.worlds = &harness::testkit::worlds();
    run.set = InterventionSet("full", 1, harness::testkit::registry());
    run.runs = 2;
    run.seed = 5;
    auto serial = run_suite(tasks, run);
    run.workers = 3;
    auto parallel = run_suite(tasks, run);
    ASSERT_EQ(serial.size(), tasks.size() * 2);
    EXPECT_EQ(serial, parallel);
    for (std::size_t i = 0; i < serial.size(); ++i)
    {
        EXPECT_EQ(serial[i].task_id, tasks[i / 2].task_id);
        EXPECT_EQ(serial[i].run_index, static_cast<int>(i % 2));
        EXPECT_EQ(serial[i].seed, episode_seed(5, static_cast<int>(i % 2)));
    }
    EXPECT_NE(episode_seed(5, 0), episode_seed(5, 1));
}

TEST(Suite, RunDiagnoseReportPipeline)
{
    auto dir = scratch_dir();
    auto c = parse_suite_config(config_yaml("minidb_freetext_test", "policy: FreeText\nruns: 2\nworkers: 2\n"), dir);
    c.log = dir / "pipeline.jsonl";
    auto log = cmd_run(c);
    auto first = sorted_log(log);
    cmd_run(c);
    EXPECT_EQ(sorted_log(log), first);
    auto records = read_log(log);
    auto tasks = harness::testkit::load_suites({ "minidb_freetext_test" });
    EXPECT_EQ(records.size(), tasks.size() * 2);

    auto diag = cmd_diagnose(log);
    EXPECT_EQ(diag.reports.size(), records.size());
    EXPECT_EQ(nlohmann::json::parse(diag.json)["failures"], records.size());
    auto report = cmd_report(log);
    ASSERT_FALSE(report.rows.empty());
    for (const auto& row: report.rows)
        EXPECT_DOUBLE_EQ(row.pass_at_1, 0.0);
    EXPECT_NE(report.text.find("Pass@1"), std::string::npos);
}

TEST(Suite, BundledConfigsParse)
{
    int n = 0;
    for (const auto& entry: std::filesystem::directory_iterator(harness::testkit::data_dir() / "configs"))
    {
        if (entry.path().extension() != ".yaml")
            continue;
        auto c = load_suite_config(entry.path());
        EXPECT_TRUE(std::filesystem::exists(c.manifest)) << entry.path();
        EXPECT_EQ(std::filesystem::weakly_canonical(c.worlds), std::filesystem::weakly_canonical(harness::testkit::data_dir()));
        EXPECT_EQ(load_manifest(c.manifest).split, c.split) << entry.path();
        ++n;
    }
    EXPECT_GE(n, 5);
}
