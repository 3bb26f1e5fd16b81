// SPDX-License-Identifier: Apache-2.0
#include "support/fixtures.hpp"
#include "support/recording.hpp"

#include <harness/errors.hpp>
#include <harness/runtime.hpp>

#include <gtest/gtest.h>

using namespace harness;
using harness::testkit::RecordingEnvironment;
using harness::testkit::RecordingPolicy;

namespace
{

InterventionSet full_set()
{
    return InterventionSet("full", 1, harness::testkit::registry());
}

EpisodeOptions options(std::uint64_t seed = 0)
{
    EpisodeOptions o;
    o.seed = seed;
    o.worlds = &harness::testkit::worlds();
    o.retry_backoff = std::chrono::milliseconds(0);
    return o;
}

class FlakyPolicy final: public Policy
{
  public:
    FlakyPolicy(const Policy& inner, int failures): _inner(inner), _failures(failures) { }
    [[nodiscard]] const std::string& policy_id() const override { return _inner.policy_id(); }
    [[nodiscard]] RawModelOutput next_action(const std::string& rendered, const PolicyContext& context) const override
    {
        if (_failures != 0)
        {
            if (_failures > 0)
                --_failures;
            throw PolicyFault("endpoint unavailable");
        }
        return _inner.next_action(rendered, context);
    }

  private:
    const Policy& _inner;
    mutable int _failures;
};

} // namespace

TEST(Runtime, ZeroBudgetTakesNoSteps)
{
    auto task = harness::testkit::load_suites({ "gridhouse_freetext_test" }).front();
    RecordingEnvironment env(make_environment(task, 0, harness::testkit::worlds()));
    auto policy = harness::testkit::scripted(Behavior::Oracle);
    RecordingPolicy rec(*policy);
    auto r = run_episode(task, env, env.base_contract(), 0, {}, rec, options());
    EXPECT_TRUE(r.trajectory.steps.empty());
    EXPECT_EQ(r.outcome(), Outcome::BudgetExhausted);
    EXPECT_TRUE(env.calls.empty());
    EXPECT_TRUE(rec.seen.empty());
    EXPECT_EQ(r.reward, 0.0);
}

TEST(Runtime, RejectsMismatchedEnvironment)
{
    auto gh = harness::testkit::load_suites({ "gridhouse_freetext_test" }).front();
    auto db = harness::testkit::load_suites({ "minidb_freetext_test" }).front();
    auto env = make_environment(db, 0, harness::testkit::worlds());
    auto policy = harness::testkit::scripted(Behavior::Oracle);
    EXPECT_THROW(run_episode(gh, *env, env->base_contract(), 5, {}, *policy, options()), EnvironmentMismatch);
    auto gh_env = make_environment(gh, 0, harness::testkit::worlds());
    EXPECT_THROW(run_episode(db, *env, gh_env->base_contract(), 5, {}, *policy, options()), EnvironmentMismatch);
    EXPECT_THROW(run_episode(db, *env, env->base_contract(), -1, {}, *policy, options()), ConfigError);
}

TEST(Runtime, StepOrderingAndBudgetOnRandomEpisodes)
{
    auto tasks = harness::testkit::all_test_tasks();
    auto set = full_set();
    harness::testkit::Rng rng(2024);
    for (int e = 0; e < 40; ++e)
    {
        const auto& task = rng.pick(tasks);
        auto seed = rng.below(1000);
        RecordingEnvironment env(make_environment(task, seed, harness::testkit::worlds()));
        harness::testkit::RandomPolicy inner(env, seed);
        RecordingPolicy policy(inner);
        int budget = static_cast<int>(rng.below(12));
        auto h = compile_harness(set, task.environment_id);
        auto r = run_episode(task, env, env.base_contract(), budget, h, policy, options(seed));
        const auto& steps = r.trajectory.steps;
        ASSERT_LE(static_cast<int>(steps.size()), budget);
        ASSERT_EQ(policy.seen.size(), steps.size());
        std::size_t call = 0;
        for (std::size_t i = 0; i < steps.size(); ++i)
        {
            EXPECT_EQ(steps[i].index, static_cast<int>(i));
            EXPECT_EQ(steps[i].remaining_budget, budget - static_cast<int>(i) - 1);
            if (steps[i].decision.kind == DecisionKind::Exec)
            {
                ASSERT_LT(call, env.calls.size());
                EXPECT_EQ(env.calls[call].action, *steps[i].decision.action);
                EXPECT_EQ(env.calls[call].observation, steps[i].observation);
                ++call;
            }
            else
            {
                EXPECT_EQ(steps[i].observation, *steps[i].decision.block_message);
            }
            if (i + 1 < steps.size())
            {
                auto t = parse_transcript(policy.seen[i + 1]);
                ASSERT_EQ(t.steps.size(), i + 1);
                EXPECT_EQ(t.steps[i].observation, steps[i].observation);
                EXPECT_EQ(t.steps[i].regulation, steps[i].regulation.message);
                EXPECT_EQ(t.steps[i].blocked, steps[i].decision.kind == DecisionKind::Block);
            }
        }
        EXPECT_EQ(call, env.calls.size());
        if (r.outcome() == Outcome::BudgetExhausted)
            EXPECT_EQ(static_cast<int>(steps.size()), budget);
    }
}

TEST(Runtime, BlockedStepLeavesEnvironmentUntouched)
{
    auto task = harness::testkit::load_suites({ "gridhouse_freetext_test" }).front();
    RecordingEnvironment env(make_environment(task, 0, harness::testkit::worlds()));
    auto h = compile_harness(full_set(), "gridhouse");
    EpisodeState state;
    state.trajectory.contract = env.base_contract();
    state.trajectory.task = task;
    state.budget.total_steps = 10;
    auto before = env.state_fingerprint();
    auto step = step_once(state, { "I am not sure what to do here.", std::nullopt }, h, env);
    EXPECT_EQ(step.decision.kind, DecisionKind::Block);
    EXPECT_EQ(env.state_fingerprint(), before);
    EXPECT_TRUE(env.calls.empty());
    EXPECT_EQ(state.budget.consumed, 1);
    EXPECT_EQ(step.remaining_budget, 9);
}

TEST(Runtime, EpisodesAreDeterministic)
{
    auto set = full_set();
    for (const auto& f: harness::testkit::families())
    {
        auto task = harness::testkit::load_suites(f.test_suites).front();
        auto policy = harness::testkit::scripted(f.behavior);
        auto a = harness::testkit::run_one(task, *policy, set, 3);
        auto b = harness::testkit::run_one(task, *policy, set, 3);
        EXPECT_EQ(a, b) << f.name;
    }
}

TEST(Runtime, OracleUnaffectedByFullHarness)
{
    auto set = full_set();
    auto oracle = harness::testkit::scripted(Behavior::Oracle);
    for (const auto& task: harness::testkit::all_test_tasks())
    {
        auto off = harness::testkit::run_one(task, *oracle);
        auto on = harness::testkit::run_one(task, *oracle, set);
        EXPECT_EQ(off.outcome(), Outcome::Success) << task.task_id;
        EXPECT_EQ(on.outcome(), off.outcome()) << task.task_id;
        EXPECT_EQ(on.reward, off.reward);
        ASSERT_EQ(on.trajectory.steps.size(), off.trajectory.steps.size());
        for (const auto& s: on.trajectory.steps)
        {
            EXPECT_EQ(s.decision.kind, DecisionKind::Exec) << task.task_id;
            EXPECT_EQ(s.regulation.level, RegulationLevel::Empty) << task.task_id;
        }
    }
}

TEST(Runtime, PolicyFaultsAreRetriedThenRecorded)
{
    auto task = harness::testkit::load_suites({ "minidb_freetext_test" }).front();
    auto oracle = harness::testkit::scripted(Behavior::Oracle);
    {
        auto env = make_environment(task, 0, harness::testkit::worlds());
        FlakyPolicy flaky(*oracle, 2);
        auto r = run_episode(task, *env, env->base_contract(), 10, {}, flaky, options());
        EXPECT_EQ(r.outcome(), Outcome::Success);
        EXPECT_TRUE(r.fault.empty());
    }
    {
        auto env = make_environment(task, 0, harness::testkit::worlds());
        FlakyPolicy broken(*oracle, -1);
        auto r = run_episode(task, *env, env->base_contract(), 10, {}, broken, options());
        EXPECT_EQ(r.outcome(), Outcome::Failure);
        EXPECT_EQ(r.fault, "endpoint unavailable");
        EXPECT_TRUE(r.trajectory.steps.empty());
    }
}

TEST(Runtime, EpisodeIdIsStable)
{
    EXPECT_EQ(episode_id("t", 0, 1), episode_id("t", 0, 1));
    EXPECT_NE(episode_id("t", 0, 1), episode_id("t", 1, 1));
    EXPECT_NE(episode_id("t", 0, 1), episode_id("t", 0, 2));
}
