// SPDX-License-Identifier: Apache-2.0
#include "support/oracles.hpp"

#include <harness/errors.hpp>
#include <harness/gridhouse.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace harness;
using harness::testkit::Rng;

namespace
{

std::unique_ptr<gridhouse::GridHouse> make(const TaskSpec& task, std::uint64_t seed = 0)
{
    auto env = make_environment(task, seed, harness::testkit::worlds());
    return std::unique_ptr<gridhouse::GridHouse>(static_cast<gridhouse::GridHouse*>(env.release()));
}

std::vector<TaskSpec> gridhouse_tasks()
{
    return harness::testkit::load_suites({ "gridhouse_freetext_test", "gridhouse_loop_test", "gridhouse_wrongtool_test" });
}

/// Every instantiation of every command template over the world's names.
std::vector<std::string> all_commands(const gridhouse::State& s)
{
    std::vector<std::string> out { "look", "inventory" };
    std::vector<std::string> places = s.rooms;
    for (const auto& r: s.receptacles)
        places.push_back(r.name);
    for (const auto& p: places)
        out.push_back("go to " + p);
    for (const auto& r: s.receptacles)
    {
        out.push_back("open " + r.name);
        out.push_back("close " + r.name);
        out.push_back("examine " + r.name);
        for (const auto& o: s.objects)
        {
            out.push_back("take " + o.name + " from " + r.name);
            out.push_back("put " + o.name + " in " + r.name);
            for (const auto* verb: { "clean", "heat", "cool" })
                out.push_back(std::string(verb) + " " + o.name + " with " + r.name);
        }
    }
    return out;
}

void check_state_invariants(const gridhouse::State& s, std::size_t objects)
{
    ASSERT_EQ(s.objects.size(), objects);
    int held = 0;
    for (const auto& o: s.objects)
    {
        if (o.location == gridhouse::kInventory)
            ++held;
        else
            EXPECT_NE(s.receptacle(o.location), nullptr) << o.name << " at " << o.location;
    }
    EXPECT_LE(held, 1);
}

} // namespace

TEST(GridHouse, InitialObservationIsDeterministicAndHidesObjects)
{
    for (const auto& task: gridhouse_tasks())
    {
        auto a = make(task, 7);
        auto b = make(task, 7);
        EXPECT_EQ(a->initial_observation(), b->initial_observation());
        auto o0 = a->initial_observation();
        EXPECT_NE(o0.find(a->state().agent_room), std::string::npos);
        for (const auto& o: a->state().objects)
            EXPECT_EQ(o0.find(o.name), std::string::npos) << task.task_id << " reveals " << o.name;
        EXPECT_FALSE(a->is_end());
        EXPECT_EQ(a->evaluate(), 0.0);
    }
}

TEST(GridHouse, EvidenceFaithfulnessOnRandomWalks)
{
    Rng rng(31);
    for (const auto& task: gridhouse_tasks())
    {
        auto env = make(task, task.variant_seed);
        for (int step = 0; step < 6 && !env->is_end(); ++step)
        {
            auto ev = env->evidence();
            std::set<std::string> admissible(ev.admissible_actions.begin(), ev.admissible_actions.end());
            for (const auto& cmd: all_commands(env->state()))
            {
                auto probe = env->clone();
                auto before = probe->state_fingerprint();
                auto obs = probe->step(Action { cmd, std::nullopt });
                if (admissible.contains(cmd))
                    EXPECT_NE(obs, kNothingHappens) << cmd;
                else
                {
                    EXPECT_EQ(obs, kNothingHappens) << cmd;
                    EXPECT_EQ(probe->state_fingerprint(), before) << cmd;
                }
            }
            env->step(Action { rng.pick(ev.admissible_actions), std::nullopt });
        }
    }
}

TEST(GridHouse, ConservationAndPurityUnderRandomActions)
{
    Rng rng(99);
    auto tasks = gridhouse_tasks();
    for (int walk = 0; walk < 60; ++walk)
    {
        const auto& task = rng.pick(tasks);
        auto env = make(task, rng.below(1000));
        const auto n = env->state().objects.size();
        for (int step = 0; step < 40 && !env->is_end(); ++step)
        {
            auto ev = env->evidence();
            std::string cmd = rng.chance(0.8) ? rng.pick(ev.admissible_actions) : rng.pick(all_commands(env->state()));
            auto twin = env->clone();
            auto obs = env->step(Action { cmd, std::nullopt });
            auto twin_obs = twin->step(Action { cmd, std::nullopt });
            EXPECT_EQ(obs, twin_obs);
            EXPECT_EQ(env->state_fingerprint(), twin->state_fingerprint());
            check_state_invariants(env->state(), n);
        }
    }
}

TEST(GridHouse, TakeMovesObjectIntoInventory)
{
    auto task = gridhouse_tasks().front();
    auto env = make(task);
    // Walk to an open receptacle holding an object.
    for (const auto& o: env->state().objects)
    {
        const auto* r = env->state().receptacle(o.location);
        if (!r || r->room != env->state().agent_room || r->openable)
            continue;
        env->step(Action { "go to " + r->name, std::nullopt });
        auto obs = env->step(Action { "take " + o.name + " from " + r->name, std::nullopt });
        EXPECT_NE(obs, kNothingHappens);
        ASSERT_NE(env->state().held(), nullptr);
        EXPECT_EQ(env->state().held()->name, o.name);
        auto inv = env->step(Action { "inventory", std::nullopt });
        EXPECT_NE(inv.find(o.name), std::string::npos);
        return;
    }
    FAIL() << "no visible object in the starting room";
}

TEST(GridHouse, InadmissibleActionIsNoop)
{
    auto env = make(gridhouse_tasks().front());
    auto before = env->state();
    EXPECT_EQ(env->step(Action { "fly to the moon", std::nullopt }), kNothingHappens);
    EXPECT_EQ(env->state(), before);
    EXPECT_TRUE(env->is_error_or_noop(kNothingHappens));
}

TEST(GridHouse, OraclePlanIsMinimalAndCompletesTask)
{
    for (const auto& task: gridhouse_tasks())
    {
        if (task.world_id != "kitchen_a" && task.world_id != "studio")
            continue;
        auto env = make(task, task.variant_seed);
        auto plan = gridhouse::oracle_plan(env->state());
        auto minimal = harness::testkit::bfs_plan_length(env->state(), plan.size());
        ASSERT_TRUE(minimal) << task.task_id;
        EXPECT_EQ(plan.size(), *minimal) << task.task_id;
        for (const auto& cmd: plan)
            EXPECT_NE(env->step(Action { cmd, std::nullopt }), kNothingHappens) << cmd;
        EXPECT_TRUE(env->is_end()) << task.task_id;
        EXPECT_EQ(env->evaluate(), 1.0);
    }
}

TEST(GridHouse, ShuffledVariantsPreserveGoalReachability)
{
    auto tasks = gridhouse_tasks();
    auto task = *std::find_if(tasks.begin(), tasks.end(), [](const TaskSpec& t) { return t.variant_seed != 0; });
    std::set<std::string> layouts;
    for (std::uint64_t seed = 1; seed < 20; ++seed)
    {
        auto env = make(task, seed);
        layouts.insert(env->initial_observation());
        auto plan = gridhouse::oracle_plan(env->state());
        ASSERT_FALSE(plan.empty());
        for (const auto& cmd: plan)
            env->step(Action { cmd, std::nullopt });
        EXPECT_EQ(env->evaluate(), 1.0) << "seed " << seed;
    }
    EXPECT_GT(layouts.size(), 1u);
}

TEST(GridHouse, UnknownWorldThrows)
{
    TaskSpec t;
    t.task_id = "x";
    t.environment_id = "gridhouse";
    t.world_id = "atlantis";
    EXPECT_THROW(make_environment(t, 0, harness::testkit::worlds()), UnknownTask);
    t.environment_id = "mars";
    EXPECT_THROW(make_environment(t, 0, harness::testkit::worlds()), UnknownTask);
}
