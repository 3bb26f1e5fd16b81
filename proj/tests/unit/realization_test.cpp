// SPDX-License-Identifier: Apache-2.0
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <harness/gridhouse.hpp>
#include <harness/intervention.hpp>
#include <harness/minidb.hpp>
#include <harness/realization.hpp>
#include <harness/runtime.hpp>
#include <harness/sql.hpp>
#include <harness/text.hpp>

#include <gtest/gtest.h>

using namespace harness;

namespace
{

std::vector<GateRule> rules(std::initializer_list<std::string> ids)
{
    std::vector<GateRule> out;
    for (const auto& i: harness::testkit::registry())
        if (std::find(ids.begin(), ids.end(), i.intervention_id) != ids.end())
            out.push_back(std::get<GateRule>(i.payload));
    return out;
}

std::unique_ptr<Environment> env_for(const std::string& suite, std::size_t index = 0)
{
    auto task = harness::testkit::load_suites({ suite }).at(index);
    return make_environment(task, 0, harness::testkit::worlds());
}

Trajectory trajectory_for(const Environment& env)
{
    Trajectory t;
    t.contract = env.base_contract();
    return t;
}

RawModelOutput prose(std::string s)
{
    return RawModelOutput { std::move(s), std::nullopt };
}

RawModelOutput call(const std::string& tool, const std::string& arg, const std::string& value)
{
    return RawModelOutput { {}, ToolCall { tool, { { arg, value } } } };
}

} // namespace

TEST(Rescue, ParsesEachFormInOrder)
{
    auto env = env_for("minidb_freetext_test");
    const auto& c = env->base_contract();
    auto kw = rescue_tool_call("Let me run execute_query(\"SELECT * FROM t\") now", c);
    ASSERT_TRUE(kw);
    EXPECT_EQ(kw->first.name, "execute_query");
    EXPECT_EQ(*kw->first.argument("query"), "SELECT * FROM t");
    EXPECT_EQ(kw->second, RescuePath::Keyword);

    auto json = rescue_tool_call(R"(I will call {"name": "commit_final_answer", "arguments": {"answer": "7"}})", c);
    ASSERT_TRUE(json);
    EXPECT_EQ(json->first.name, "commit_final_answer");
    EXPECT_EQ(*json->first.argument("answer"), "7");
    EXPECT_EQ(json->second, RescuePath::Json);

    auto fenced = rescue_tool_call("Here:\n```sql\nSELECT COUNT(*) FROM t\n```", c);
    ASSERT_TRUE(fenced);
    EXPECT_EQ(fenced->first.name, "execute_query");
    EXPECT_EQ(*fenced->first.argument("query"), "SELECT COUNT(*) FROM t");
    EXPECT_EQ(fenced->second, RescuePath::Fenced);

    auto xml = rescue_tool_call("<commit_final_answer>42</commit_final_answer>", c);
    ASSERT_TRUE(xml);
    EXPECT_EQ(*xml->first.argument("answer"), "42");
    EXPECT_EQ(xml->second, RescuePath::XmlLike);
}

TEST(Rescue, NeverInventsArguments)
{
    auto env = env_for("minidb_freetext_test");
    const auto& c = env->base_contract();
    EXPECT_FALSE(rescue_tool_call("I will take the mug", env_for("gridhouse_freetext_test")->base_contract()));
    EXPECT_FALSE(rescue_tool_call("commit_final_answer()", c));
    EXPECT_FALSE(rescue_tool_call(R"({"name": "commit_final_answer", "arguments": {}})", c));
    EXPECT_FALSE(rescue_tool_call(R"({"name": "drop_table", "arguments": {"t": "x"}})", c));
}

TEST(Canonicalize, VerbAliasAndUniqueness)
{
    std::vector<std::string> admissible { "go to shelf 1", "go to shelf 2", "take mug 1 from shelf 1",
                                          "take mug 2 from shelf 1", "look" };
    EXPECT_EQ(canonicalize("look", admissible), "look");
    EXPECT_EQ(canonicalize("goto shelf 1", { "go to shelf 1", "look" }), "go to shelf 1");
    EXPECT_FALSE(canonicalize("take mug", admissible));
    EXPECT_FALSE(canonicalize("put mug 1 from shelf 1", admissible));
    EXPECT_FALSE(canonicalize("grab mug 1 from shelf 1", admissible));
    EXPECT_FALSE(canonicalize("grab mug 1 from shelf 1", { "take mug 1 from shelf 1", "look" }));
    EXPECT_EQ(canonicalize("grab mug 1 from countertop 1", { "take mug 1 from countertop 1", "look" }),
              "take mug 1 from countertop 1");
}

TEST(Canonicalize, ResultMeetsThresholdByIndependentDistance)
{
    harness::testkit::Rng rng(21);
    std::vector<std::string> admissible { "go to countertop 1", "go to cabinet 2", "open cabinet 2",
                                          "take apple 1 from countertop 1", "examine countertop 1", "look" };
    for (int i = 0; i < 400; ++i)
    {
        auto s = rng.pick(admissible);
        for (auto n = rng.below(3); n > 0; --n)
        {
            auto pos = rng.below(s.size());
            if (rng.chance(0.5))
                s.erase(pos, 1);
            else
                s.insert(pos, 1, 'x');
        }
        auto out = canonicalize(s, admissible);
        if (!out)
            continue;
        EXPECT_NE(std::find(admissible.begin(), admissible.end(), *out), admissible.end());
        auto dist = static_cast<double>(text::levenshtein(s, *out));
        EXPECT_GE(1.0 - dist / static_cast<double>(std::max(s.size(), out->size())), 0.85) << s;
    }
}

TEST(BacktickRepair, WrapsFlaggedIdentifiersOutsideLiterals)
{
    SchemaMap schema;
    schema.tables.push_back({ "t", "t", { { "order id", "`order id`" }, { "name", "name" } } });
    EXPECT_EQ(backtick_repair("SELECT name FROM t", schema), "SELECT name FROM t");
    auto fixed = backtick_repair("SELECT order id FROM t", schema);
    EXPECT_EQ(fixed, "SELECT `order id` FROM t");
    EXPECT_TRUE(sql::parses(fixed));
    EXPECT_EQ(backtick_repair("SELECT name FROM t WHERE name = 'order id'", schema),
              "SELECT name FROM t WHERE name = 'order id'");
}

TEST(BacktickRepair, FixtureSchemaQueriesBecomeParseable)
{
    auto env = env_for("minidb_wrongtool_test");
    auto schema = env->evidence().schema;
    for (const auto* q: { "SELECT MAX(order date) FROM orders", "SELECT name FROM customers WHERE group = 'gold'" })
    {
        EXPECT_FALSE(sql::parses(q));
        EXPECT_TRUE(sql::parses(backtick_repair(q, schema))) << backtick_repair(q, schema);
    }
}

TEST(Realize, AdmissibleGridHouseActionExecutesUnchanged)
{
    auto env = env_for("gridhouse_freetext_test");
    auto ev = env->evidence();
    auto all = rules({ "g05-rescue", "g08-fuzzy", "g09-empty", "g10-admissible" });
    for (const auto& a: ev.admissible_actions)
    {
        auto d = realize(prose(a), trajectory_for(*env), env->base_contract(), ev, all);
        ASSERT_EQ(d.kind, DecisionKind::Exec);
        EXPECT_EQ(d.action->text, a);
        EXPECT_FALSE(d.canonicalized);
        EXPECT_EQ(d.rule_id, "");
    }
}

TEST(Realize, ProseIsBlockedWithSuggestion)
{
    auto env = env_for("gridhouse_freetext_test");
    auto ev = env->evidence();
    const auto& target = ev.admissible_actions.front();
    auto d = realize(prose("I think the best next step is to " + target + " now."), trajectory_for(*env),
                     env->base_contract(), ev, rules({ "g10-admissible" }));
    ASSERT_EQ(d.kind, DecisionKind::Block);
    EXPECT_FALSE(d.action);
    EXPECT_NE(d.block_message->find("not an admissible command"), std::string::npos);
    EXPECT_NE(d.block_message->find(std::string(kSuggestedActionPrefix) + target), std::string::npos);
    EXPECT_EQ(d.rule_id, "g10-admissible");
}

TEST(Realize, CanonicalizedDecisionKeepsCanonicalForm)
{
    auto env = env_for("gridhouse_freetext_test");
    auto ev = env->evidence();
    std::string target;
    for (const auto& a: ev.admissible_actions)
        if (a.rfind("go to ", 0) == 0)
            target = a;
    ASSERT_FALSE(target.empty());
    auto typo = "goto " + target.substr(6);
    auto d = realize(prose(typo), trajectory_for(*env), env->base_contract(), ev, rules({ "g08-fuzzy", "g10-admissible" }));
    ASSERT_EQ(d.kind, DecisionKind::Exec);
    EXPECT_TRUE(d.canonicalized);
    EXPECT_EQ(d.action->text, target);
}

TEST(Realize, MiniDBProseBlockNamesTools)
{
    auto env = env_for("minidb_freetext_test");
    auto d = realize(prose("I would run the following SQL to look this up: SELECT COUNT(*) FROM orders"),
                     trajectory_for(*env), env->base_contract(), env->evidence(), rules({ "d10-tool-call" }));
    ASSERT_EQ(d.kind, DecisionKind::Block);
    EXPECT_NE(d.block_message->find("execute_query(\"{query}\")"), std::string::npos);
    EXPECT_NE(d.block_message->find("commit_final_answer(\"{answer}\")"), std::string::npos);
    EXPECT_NE(d.block_message->find("Suggested action: execute_query(\"SELECT COUNT(*) FROM orders\")"), std::string::npos)
        << *d.block_message;
}

TEST(Realize, MutationCommitGate)
{
    auto task = harness::testkit::load_suites({ "minidb_prematurecommit_test" }).front();
    auto env = make_environment(task, 0, harness::testkit::worlds());
    auto gate = rules({ "d40-mutation-commit" });
    auto d = realize(call("commit_final_answer", "answer", "done"), trajectory_for(*env), env->base_contract(),
                     env->evidence(), gate);
    ASSERT_EQ(d.kind, DecisionKind::Block);
    EXPECT_NE(d.block_message->find("mutation required before commit"), std::string::npos);

    ToolCall q { "execute_query", { { "query", task.reference_solution.front() } } };
    env->step(Action { format_call(q), q });
    auto after = realize(call("commit_final_answer", "answer", "done"), trajectory_for(*env), env->base_contract(),
                         env->evidence(), gate);
    EXPECT_EQ(after.kind, DecisionKind::Exec);
}

TEST(Realize, StructuredCallPassesThroughWithoutRescue)
{
    auto env = env_for("minidb_freetext_test");
    auto raw = call("execute_query", "query", "SELECT COUNT(*) FROM orders");
    auto d = realize(raw, trajectory_for(*env), env->base_contract(), env->evidence(),
                     rules({ "d05-rescue", "d10-tool-call" }));
    ASSERT_EQ(d.kind, DecisionKind::Exec);
    EXPECT_EQ(d.rescue_path, RescuePath::None);
    EXPECT_EQ(d.action->call, raw.tool_call);
}

TEST(Realize, NullToZeroOnlyWhereTriggered)
{
    auto tasks = harness::testkit::load_suites({ "minidb_nullzero_train" });
    auto env = make_environment(tasks.at(0), 0, harness::testkit::worlds());
    auto d = realize(call("commit_final_answer", "answer", "NULL"), trajectory_for(*env), env->base_contract(),
                     env->evidence(), rules({ "d70-null-zero-aggregate" }));
    ASSERT_EQ(d.kind, DecisionKind::Exec);
    EXPECT_EQ(*d.action->call->argument("answer"), "0");
    EXPECT_TRUE(d.canonicalized);
    auto none = realize(call("commit_final_answer", "answer", "NULL"), trajectory_for(*env), env->base_contract(),
                        env->evidence(), {});
    EXPECT_EQ(*none.action->call->argument("answer"), "NULL");
}

TEST(Realize, EscalatesAfterRepeatedIdenticalBlocks)
{
    auto env = env_for("gridhouse_freetext_test");
    auto ev = env->evidence();
    auto gate = rules({ "g10-admissible" });
    auto traj = trajectory_for(*env);
    int previous = 0;
    for (int i = 0; i < 4; ++i)
    {
        auto d = realize(prose("fly away"), traj, env->base_contract(), ev, gate);
        ASSERT_EQ(d.kind, DecisionKind::Block);
        int count = prior_block_count(traj, d.attempted);
        EXPECT_GE(count, previous);
        previous = count;
        bool escalated = d.block_message->find("This action has been blocked") != std::string::npos;
        EXPECT_EQ(escalated, i + 1 >= 2) << i;
        if (escalated)
        {
            EXPECT_NE(d.block_message->find("blocked " + std::to_string(i + 1) + " times"), std::string::npos);
            EXPECT_NE(d.block_message->find("Admissible actions: " + ev.admissible_actions.front()), std::string::npos);
        }
        StepRecord s;
        s.index = i;
        s.decision = d;
        s.observation = *d.block_message;
        traj.steps.push_back(s);
    }
}

TEST(Realize, IsPureOverRepeatedCalls)
{
    harness::testkit::Rng rng(6);
    auto env = env_for("gridhouse_loop_test");
    auto ev = env->evidence();
    auto gate = rules({ "g05-rescue", "g08-fuzzy", "g09-empty", "g10-admissible" });
    for (int i = 0; i < 100; ++i)
    {
        std::string raw = rng.pick(ev.admissible_actions);
        if (rng.chance(0.5))
            raw = "Maybe " + raw;
        auto a = realize(prose(raw), trajectory_for(*env), env->base_contract(), ev, gate);
        auto b = realize(prose(raw), trajectory_for(*env), env->base_contract(), ev, gate);
        EXPECT_EQ(a, b);
        EXPECT_NE(a.action.has_value(), a.block_message.has_value());
        if (a.canonicalized)
            EXPECT_EQ(a.kind, DecisionKind::Exec);
    }
}

TEST(Realize, RewriteNamesRoundTrip)
{
    for (auto r: { Rewrite::ToolCallRescue, Rewrite::FuzzyAdmissible, Rewrite::BacktickRepair, Rewrite::NullToZero })
        EXPECT_EQ(parse_rewrite(to_string(r)), r);
}
