// SPDX-License-Identifier: Apache-2.0
#include <harness/runtime.hpp>
#include <harness/suite.hpp>

#include <benchmark/benchmark.h>

using namespace harness;

namespace
{

const WorldCatalog& worlds()
{
    static const WorldCatalog catalog = WorldCatalog::load(HARNESS_DATA_DIR);
    return catalog;
}

void run(benchmark::State& state, const std::string& suite, Behavior behavior, bool harnessed)
{
    auto task = load_manifest(std::string(HARNESS_DATA_DIR) + "/suites/" + suite + ".json").tasks.front();
    InterventionSet set;
    if (harnessed)
        set = InterventionSet("full", 1, load_registry(std::string(HARNESS_DATA_DIR) + "/registry"));
    auto h = compile_harness(set, task.environment_id);
    ScriptedPolicy policy(ScriptedConfig { behavior });
    EpisodeOptions o;
    o.worlds = &worlds();
    for (auto _: state)
    {
        auto env = make_environment(task, 0, worlds());
        benchmark::DoNotOptimize(
            run_episode(task, *env, env->base_contract(), default_budget(task.environment_id), h, policy, o));
    }
}

void BM_GridHouseOracle(benchmark::State& state)
{
    run(state, "gridhouse_freetext_test", Behavior::Oracle, state.range(0) != 0);
}
BENCHMARK(BM_GridHouseOracle)->Arg(0)->Arg(1);

void BM_GridHouseFollowHint(benchmark::State& state)
{
    run(state, "gridhouse_loop_test", Behavior::FollowHint, true);
}
BENCHMARK(BM_GridHouseFollowHint);

void BM_MiniDBFollowHint(benchmark::State& state)
{
    run(state, "minidb_prematurecommit_test", Behavior::FollowHint, true);
}
BENCHMARK(BM_MiniDBFollowHint);

} // namespace
