// SPDX-License-Identifier: Apache-2.0
#include "support/fixtures.hpp"

#include <fstream>
#include <sstream>

namespace harness::testkit
{

std::filesystem::path data_dir()
{
    return HARNESS_DATA_DIR;
}

std::filesystem::path golden_dir()
{
    return HARNESS_GOLDEN_DIR;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const WorldCatalog& worlds()
{
    static const WorldCatalog catalog = WorldCatalog::load(data_dir());
    return catalog;
}

std::vector<Intervention> registry()
{
    return load_registry(data_dir() / "registry");
}

std::vector<TaskSpec> load_suites(const std::vector<std::string>& suite_ids)
{
    std::vector<TaskSpec> tasks;
    for (const auto& id: suite_ids)
    {
        auto m = load_manifest(data_dir() / "suites" / (id + ".json"));
        tasks.insert(tasks.end(), m.tasks.begin(), m.tasks.end());
    }
    return tasks;
}

const std::vector<Family>& families()
{
    static const std::vector<Family> list {
        { "FreeText", Behavior::FreeText, { "gridhouse_freetext_train", "minidb_freetext_train" },
          { "gridhouse_freetext_test", "minidb_freetext_test" }, "action" },
        { "Loop", Behavior::Loop, { "gridhouse_loop_train", "minidb_loop_train" },
          { "gridhouse_loop_test", "minidb_loop_test" }, "regulation" },
        { "WrongTool", Behavior::WrongTool, { "gridhouse_wrongtool_train", "minidb_wrongtool_train" },
          { "gridhouse_wrongtool_test", "minidb_wrongtool_test" }, "contract" },
        { "PrematureCommit", Behavior::PrematureCommit, { "minidb_prematurecommit_train" },
          { "minidb_prematurecommit_test" }, "action" },
    };
    return list;
}

std::vector<TaskSpec> all_train_tasks()
{
    std::vector<TaskSpec> out;
    for (const auto& f: families())
    {
        auto t = load_suites(f.train_suites);
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

std::vector<TaskSpec> all_test_tasks()
{
    std::vector<TaskSpec> out;
    for (const auto& f: families())
    {
        auto t = load_suites(f.test_suites);
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

std::unique_ptr<Policy> scripted(Behavior behavior, bool commit_observed)
{
    ScriptedConfig c;
    c.behavior = behavior;
    c.commit_observed = commit_observed;
    return std::make_unique<ScriptedPolicy>(c);
}

EpisodeRecord run_one(const TaskSpec& task, const Policy& policy, const InterventionSet& set, std::uint64_t seed,
                      int budget, LayerToggles toggles)
{
    auto env = make_environment(task, seed, worlds());
    auto harness = compile_harness(set, task.environment_id, toggles);
    EpisodeOptions o;
    o.seed = seed;
    o.worlds = &worlds();
    o.set_id = set.set_id();
    o.set_version = set.version();
    return run_episode(task, *env, env->base_contract(), budget > 0 ? budget : default_budget(task.environment_id),
                       harness, policy, o);
}

} // namespace harness::testkit
