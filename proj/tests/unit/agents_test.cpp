// SPDX-License-Identifier: Apache-2.0
#include "support/fixtures.hpp"

#include <harness/agents.hpp>
#include <harness/errors.hpp>

#include <gtest/gtest.h>
#include <json.hpp>

using namespace harness;
using nlohmann::json;

namespace
{

std::string random_line(harness::testkit::Rng& rng)
{
    static const std::vector<std::string> words { "look", "go", "to", "shelf", "1", "Nothing", "happens.", "SELECT",
                                                  "*", "FROM", "t", "{\"a\": 1}", "[x]", "ok" };
    std::string s;
    for (auto n = rng.below(6) + 1; n > 0; --n)
        s += (s.empty() ? "" : " ") + rng.pick(words);
    return s;
}

std::string random_text(harness::testkit::Rng& rng)
{
    std::string s = random_line(rng);
    for (auto n = rng.below(3); n > 0; --n)
        s += "\n" + random_line(rng);
    return s;
}

} // namespace

TEST(Render, TranscriptRoundTripsOnRandomTrajectories)
{
    harness::testkit::Rng rng(12);
    for (int i = 0; i < 200; ++i)
    {
        Trajectory t;
        t.contract = base_contract_for(rng.chance(0.5) ? "gridhouse" : "minidb");
        t.task.instruction = random_text(rng);
        t.initial_observation = random_text(rng);
        for (auto n = rng.below(6); n > 0; --n)
        {
            StepRecord s;
            s.raw_model_output = random_text(rng);
            if (rng.chance(0.3))
            {
                s.decision.kind = DecisionKind::Block;
                s.decision.block_message = random_text(rng);
                s.observation = *s.decision.block_message;
            }
            else
            {
                s.decision.action = Action { random_line(rng), std::nullopt };
                s.observation = random_text(rng);
            }
            if (rng.chance(0.4))
                s.regulation = { RegulationLevel::Warning, random_text(rng), std::nullopt, "repetition" };
            t.steps.push_back(s);
        }
        auto parsed = parse_transcript(render_for_model(t));
        EXPECT_EQ(parsed.contract, render_contract(t.contract));
        EXPECT_EQ(parsed.instruction, t.task.instruction);
        EXPECT_EQ(parsed.initial_observation, t.initial_observation);
        ASSERT_EQ(parsed.steps.size(), t.steps.size());
        for (std::size_t k = 0; k < t.steps.size(); ++k)
        {
            const auto& s = t.steps[k];
            EXPECT_EQ(parsed.steps[k].raw, s.raw_model_output);
            EXPECT_EQ(parsed.steps[k].blocked, s.decision.kind == DecisionKind::Block);
            if (s.decision.action)
                EXPECT_EQ(parsed.steps[k].executed, s.decision.action->text);
            EXPECT_EQ(parsed.steps[k].observation, s.observation);
            EXPECT_EQ(parsed.steps[k].regulation, s.regulation.message);
        }
    }
}

TEST(Render, RegulationFollowsObservation)
{
    Trajectory t;
    t.contract = base_contract_for("gridhouse");
    StepRecord s;
    s.raw_model_output = "look";
    s.decision.action = Action { "look", std::nullopt };
    s.observation = "You are in the middle of a room.";
    s.regulation.level = RegulationLevel::Warning;
    s.regulation.message = "Only 1 steps remain.";
    t.steps.push_back(s);
    auto r = render_for_model(t);
    auto obs = r.find(s.observation);
    auto reg = r.find(render_tags::kRegulation);
    ASSERT_NE(obs, std::string::npos);
    ASSERT_NE(reg, std::string::npos);
    EXPECT_LT(obs, reg);
}

TEST(RemotePolicy, RequestBodyMapsSectionsToRoles)
{
    RemoteConfig c;
    c.model = "m";
    RemotePolicy p(c);
    Trajectory t;
    t.contract = base_contract_for("minidb");
    t.task.instruction = "How many?";
    t.initial_observation = "o0";
    StepRecord s;
    s.raw_model_output = "prose";
    s.decision.kind = DecisionKind::Block;
    s.decision.block_message = "Blocked.";
    s.observation = "Blocked.";
    s.regulation.level = RegulationLevel::SoftRecovery;
    s.regulation.message = "Try again.";
    t.steps.push_back(s);
    auto body = json::parse(p.request_body(render_for_model(t), "minidb"));
    EXPECT_EQ(body["model"], "m");
    const auto& m = body["messages"];
    ASSERT_EQ(m.size(), 4u);
    EXPECT_EQ(m[0]["role"], "system");
    EXPECT_EQ(m[1]["role"], "user");
    EXPECT_EQ(m[1]["content"], "How many?\n\no0");
    EXPECT_EQ(m[2]["role"], "assistant");
    EXPECT_EQ(m[2]["content"], "prose");
    EXPECT_EQ(m[3]["role"], "user");
    EXPECT_EQ(m[3]["content"], "Blocked.\n\nTry again.");
    ASSERT_EQ(body["tools"].size(), 2u);
    EXPECT_FALSE(json::parse(p.request_body(render_for_model(t), "gridhouse")).contains("tools"));
}

TEST(RemotePolicy, ParsesResponses)
{
    auto contract = base_contract_for("minidb");
    auto out = RemotePolicy::parse_response(
        R"({"choices":[{"message":{"content":null,"tool_calls":[{"function":{"name":"execute_query","arguments":"{\"query\":\"SELECT 1\"}"}}]}}]})",
        contract);
    ASSERT_TRUE(out.tool_call);
    EXPECT_EQ(out.tool_call->name, "execute_query");
    EXPECT_EQ(*out.tool_call->argument("query"), "SELECT 1");
    auto text = RemotePolicy::parse_response(R"({"choices":[{"message":{"content":"look"}}]})", contract);
    EXPECT_EQ(text.text, "look");
    EXPECT_FALSE(text.tool_call);
    EXPECT_THROW(RemotePolicy::parse_response("not json", contract), RemoteUnavailable);
    EXPECT_THROW(RemotePolicy::parse_response(R"({"choices":[]})", contract), RemoteUnavailable);
}

TEST(RemotePolicy, UnreachableEndpointIsAPolicyFault)
{
    RemoteConfig c;
    c.model = "m";
    c.api_base = "http://127.0.0.1:1/v1";
    c.timeout_seconds = 2;
    RemotePolicy p(c);
    PolicyContext ctx;
    ctx.task.environment_id = "gridhouse";
    Trajectory t;
    t.contract = base_contract_for("gridhouse");
    EXPECT_THROW((void)p.next_action(render_for_model(t), ctx), PolicyFault);
    RemoteConfig nameless;
    EXPECT_THROW(RemotePolicy { nameless }, ConfigError);
}

TEST(Policies, FactoryAndBehaviorNames)
{
    for (auto b: { Behavior::Oracle, Behavior::FreeText, Behavior::Loop, Behavior::WrongTool, Behavior::PrematureCommit,
                   Behavior::FollowHint })
    {
        EXPECT_EQ(parse_behavior(to_string(b)), b);
        auto p = make_policy(json { { "kind", "scripted" }, { "behavior", to_string(b) } }.dump());
        auto* s = dynamic_cast<ScriptedPolicy*>(p.get());
        ASSERT_NE(s, nullptr);
        EXPECT_EQ(s->config().behavior, b);
    }
    EXPECT_THROW(make_policy("[]"), ConfigError);
    EXPECT_THROW(make_policy(R"({"kind": "telepathy"})"), ConfigError);
}

TEST(Policies, OracleSolvesEveryDesignedTask)
{
    auto oracle = harness::testkit::scripted(Behavior::Oracle);
    auto tasks = harness::testkit::all_train_tasks();
    auto test = harness::testkit::all_test_tasks();
    tasks.insert(tasks.end(), test.begin(), test.end());
    for (const auto& task: tasks)
        EXPECT_EQ(harness::testkit::run_one(task, *oracle).outcome(), Outcome::Success) << task.task_id;
}

TEST(Policies, FaultyBehaviorsFailUnharnessed)
{
    for (const auto& f: harness::testkit::families())
        for (const auto& task: harness::testkit::load_suites(f.test_suites))
        {
            auto p = harness::testkit::scripted(f.behavior);
            EXPECT_NE(harness::testkit::run_one(task, *p).outcome(), Outcome::Success) << f.name << " " << task.task_id;
        }
}

TEST(Policies, ScriptedPolicyIsDeterministic)
{
    auto task = harness::testkit::load_suites({ "gridhouse_loop_test" }).front();
    auto p = harness::testkit::scripted(Behavior::Loop);
    PolicyContext ctx { task, 4, &harness::testkit::worlds() };
    auto env = make_environment(task, 4, harness::testkit::worlds());
    Trajectory t;
    t.contract = env->base_contract();
    t.task = task;
    t.initial_observation = env->initial_observation();
    auto r = render_for_model(t);
    EXPECT_EQ(p->next_action(r, ctx), p->next_action(r, ctx));
}
