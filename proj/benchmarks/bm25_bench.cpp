// SPDX-License-Identifier: Apache-2.0
#include <harness/skills.hpp>
#include <harness/task.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace harness;

namespace
{

const std::vector<std::string> kVocab { "mug", "apple", "cabinet", "fridge", "sink", "clean", "heat", "cool",
                                        "shelf", "drawer", "take", "put", "open", "countertop", "microwave", "book" };

std::string random_doc(std::mt19937_64& rng, std::size_t len)
{
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
        s += (i ? " " : "") + kVocab[rng() % kVocab.size()];
    return s;
}

void BM_Retrieve(benchmark::State& state)
{
    std::mt19937_64 rng(1);
    std::vector<Skill> skills;
    for (int i = 0; i < state.range(0); ++i)
        skills.push_back(Skill { "s" + std::to_string(i), "gridhouse", {}, "", random_doc(rng, 40) });
    SkillLibrary lib(skills);
    TaskSpec task;
    task.task_id = "t";
    task.environment_id = "gridhouse";
    task.instruction = "put a clean mug in cabinet";
    for (auto _: state)
        benchmark::DoNotOptimize(retrieve(task, lib, 3));
}
BENCHMARK(BM_Retrieve)->Arg(10)->Arg(100)->Arg(1000);

} // namespace
