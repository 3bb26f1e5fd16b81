// SPDX-License-Identifier: Apache-2.0
#include "support/fixtures.hpp"

#include <harness/condition.hpp>
#include <harness/errors.hpp>
#include <harness/text.hpp>

#include <gtest/gtest.h>

#include <functional>

using namespace harness;
using harness::testkit::Rng;

namespace
{

Bindings sample()
{
    Bindings b;
    b.scalars = { { "tool", "execute_query" }, { "action", "go to shelf 1" }, { "parsed", "true" },
                  { "known_tool", "false" }, { "fact.task_kind", "count" }, { "raw", "SELECT Count(*) FROM t" } };
    b.sets = { { "admissible", { "go to shelf 1", "look" } }, { "tools", { "execute_query", "commit_final_answer" } } };
    return b;
}

bool eval(const std::string& src, const Bindings& b = sample())
{
    return Condition::parse(src).evaluate(b);
}

/// A random expression rendered as source, paired with its meaning computed directly.
struct Expr
{
    std::string source;
    std::function<bool(const Bindings&)> truth;
};

Expr random_expr(Rng& rng, int depth)
{
    static const std::vector<std::string> fields { "tool", "action", "parsed", "known_tool", "fact.task_kind", "raw" };
    static const std::vector<std::string> values { "execute_query", "count", "true", "false", "look", "go to shelf 1", "" };
    auto roll = rng.below(depth > 0 ? 9 : 5);
    auto field = rng.pick(fields);
    auto value = rng.pick(values);
    switch (roll)
    {
    case 0:
        return { field + " == '" + value + "'", [=](const Bindings& b) { return b.scalar(field) == value; } };
    case 1:
        return { field + " != \"" + value + "\"", [=](const Bindings& b) { return b.scalar(field) != value; } };
    case 2:
        return { field, [=](const Bindings& b) { return b.scalar(field) == "true"; } };
    case 3:
        return { field + " in admissible",
                 [=](const Bindings& b) {
                     const auto& s = b.sets.at("admissible");
                     return std::find(s.begin(), s.end(), b.scalar(field)) != s.end();
                 } };
    case 4:
        return { field + " not in ['count', 'look']",
                 [=](const Bindings& b) { return b.scalar(field) != "count" && b.scalar(field) != "look"; } };
    case 5:
    {
        auto inner = random_expr(rng, depth - 1);
        return { "not (" + inner.source + ")", [=](const Bindings& b) { return !inner.truth(b); } };
    }
    case 6:
    {
        auto l = random_expr(rng, depth - 1), r = random_expr(rng, depth - 1);
        return { "(" + l.source + ") and (" + r.source + ")", [=](const Bindings& b) { return l.truth(b) && r.truth(b); } };
    }
    case 7:
    {
        auto l = random_expr(rng, depth - 1), r = random_expr(rng, depth - 1);
        return { "(" + l.source + ") or (" + r.source + ")", [=](const Bindings& b) { return l.truth(b) || r.truth(b); } };
    }
    default:
        return { field + " contains 'QUERY'",
                 [=](const Bindings& b) { return text::contains_icase(b.scalar(field), "query"); } };
    }
}

} // namespace

TEST(Condition, Operators)
{
    EXPECT_TRUE(eval("tool == 'execute_query'"));
    EXPECT_TRUE(eval("tool != \"commit_final_answer\""));
    EXPECT_TRUE(eval("parsed"));
    EXPECT_FALSE(eval("known_tool"));
    EXPECT_TRUE(eval("action in admissible"));
    EXPECT_TRUE(eval("tool not in ['a', 'b']"));
    EXPECT_TRUE(eval("fact.task_kind in ['count', 'aggregate']"));
    EXPECT_TRUE(eval("raw matches '^select\\s+count'"));
    EXPECT_TRUE(eval("raw contains 'count(*)'"));
    EXPECT_TRUE(eval("arg.query == ''"));
    EXPECT_TRUE(eval("true"));
}

TEST(Condition, PrecedenceAndBeforeOr)
{
    EXPECT_TRUE(eval("parsed or known_tool and known_tool"));
    EXPECT_FALSE(eval("(parsed or known_tool) and known_tool"));
    EXPECT_TRUE(eval("not known_tool and parsed"));
}

TEST(Condition, SyntaxErrors)
{
    for (const auto* bad: { "tool ==", "tool == 'x", "(parsed", "unknown_field", "tool ~ 'x'", "raw matches '('",
                            "tool not 'x'", "" })
        EXPECT_THROW(Condition::parse(bad), ConditionSyntaxError) << bad;
}

TEST(Condition, RandomExpressionsMatchDirectEvaluation)
{
    Rng rng(1234);
    for (int i = 0; i < 1000; ++i)
    {
        auto e = random_expr(rng, 3);
        Bindings b = sample();
        if (rng.chance(0.5))
            b.scalars["parsed"] = "false";
        if (rng.chance(0.5))
            b.scalars["action"] = "look";
        auto c = Condition::parse(e.source);
        EXPECT_EQ(c.evaluate(b), e.truth(b)) << e.source;
        EXPECT_EQ(c.source(), e.source);
    }
}

TEST(Condition, MissingFieldsAreEmptyAndTotal)
{
    Bindings empty;
    EXPECT_FALSE(Condition::parse("parsed").evaluate(empty));
    EXPECT_TRUE(Condition::parse("tool == ''").evaluate(empty));
    EXPECT_FALSE(Condition::parse("action in admissible").evaluate(empty));
}

TEST(Condition, BackslashEscapesOnlyQuotesAndItself)
{
    Bindings b;
    b.scalars["arg.answer"] = "  ";
    b.scalars["raw"] = "it's a\\b";
    auto blank = Condition::parse("arg.answer matches '^\\s*$'");
    EXPECT_TRUE(blank.evaluate(b));
    b.scalars["arg.answer"] = "s";
    EXPECT_FALSE(blank.evaluate(b));
    EXPECT_TRUE(Condition::parse("raw == 'it\\'s a\\\\b'").evaluate(b));
}
