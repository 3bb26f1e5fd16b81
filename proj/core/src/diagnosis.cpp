// SPDX-License-Identifier: Apache-2.0
#include <harness/diagnosis.hpp>
#include <harness/errors.hpp>
#include <harness/minidb.hpp>
#include <harness/realization.hpp>
#include <harness/skills.hpp>
#include <harness/text.hpp>

#include <regex>

namespace harness
{

namespace
{

constexpr std::array<FailureCategory, 4> kCategories { FailureCategory::ActionRealization,
                                                       FailureCategory::ContractMismatch,
                                                       FailureCategory::TrajectoryDegeneration,
                                                       FailureCategory::ResidualReasoning };

struct Finding
{
    std::string rule;
    std::vector<int> steps;
    std::string notes;
};

/// The call a step carried, whether executed or blocked.
std::optional<ToolCall> attempted_call(const StepRecord& s, const Contract& contract)
{
    if (s.decision.action && s.decision.action->call)
        return s.decision.action->call;
    auto raw = deserialize_raw_output(s.raw_model_output);
    if (raw.tool_call)
        return raw.tool_call;
    if (auto rescued = rescue_tool_call(raw.text, contract))
        return rescued->first;
    return std::nullopt;
}

std::optional<Finding> action_realization(const EpisodeRecord& r, const Contract& contract)
{
    Finding f;
    for (const auto& s: r.trajectory.steps)
    {
        if (s.decision.forced)
            continue;
        auto raw = deserialize_raw_output(s.raw_model_output);
        if (contract.plain_text_commands)
        {
            auto text = text::collapse_whitespace(raw.text);
            bool executable = (raw.tool_call && contract.find_tool(raw.tool_call->name)) || parse_command(contract, text) ||
                              rescue_tool_call(raw.text, contract);
            if (!executable)
            {
                f.rule = f.rule.empty() ? "ar-no-command" : f.rule;
                f.steps.push_back(s.index);
            }
            continue;
        }
        auto call = attempted_call(s, contract);
        if (!call)
        {
            f.rule = f.rule.empty() ? "ar-no-call" : f.rule;
            f.steps.push_back(s.index);
            continue;
        }
        auto tool = contract.find_tool(call->name);
        bool missing = false;
        if (tool)
            for (const auto& p: tool->parameters)
                if (p.required && !call->argument(p.name))
                    missing = true;
        if (!tool || missing)
        {
            f.rule = f.rule.empty() ? (tool ? "ar-missing-argument" : "ar-unknown-tool") : f.rule;
            f.steps.push_back(s.index);
            continue;
        }
        if (s.decision.kind == DecisionKind::Exec && text::starts_with_icase(s.observation, "Error: You have an error in your SQL syntax"))
        {
            f.rule = f.rule.empty() ? "ar-dialect" : f.rule;
            f.steps.push_back(s.index);
        }
    }
    if (f.steps.empty())
        return std::nullopt;
    f.notes = "steps without an executable action";
    return f;
}

bool looks_like_prose_answer(const std::string& answer)
{
    static const std::regex re(R"(^\s*(the\s+)?(final\s+)?answer\b|\bis\s+\S)", std::regex::icase);
    return std::regex_search(answer, re);
}

std::optional<Finding> contract_mismatch(const EpisodeRecord& r, const Contract& contract)
{
    if (contract.plain_text_commands)
    {
        for (const auto& s: r.trajectory.steps)
        {
            if (s.decision.kind != DecisionKind::Exec || !s.decision.action)
                continue;
            auto verb = text::to_lower(s.decision.action->text.substr(0, s.decision.action->text.find(' ')));
            bool precondition_verb = verb == "clean" || verb == "heat" || verb == "cool" || verb == "put";
            if (precondition_verb && s.observation == kNothingHappens)
                return Finding { "cm-precondition", { s.index }, verb + " issued without its precondition" };
        }
        return std::nullopt;
    }
    const bool mutation_task = classify_task_type(r.environment_id, r.instruction) == "mutation";
    bool mutated = false;
    for (const auto& s: r.trajectory.steps)
    {
        if (s.decision.kind != DecisionKind::Exec || !s.decision.action || !s.decision.action->call)
            continue;
        const auto& call = *s.decision.action->call;
        if (call.name == "execute_query" && text::starts_with_icase(s.observation, "Query OK"))
            mutated = true;
        if (call.name != "commit_final_answer")
            continue;
        if (mutation_task && !mutated)
            return Finding { "cm-commit-order", { s.index }, "committed before any mutation succeeded" };
        if (auto a = call.argument("answer"); a && looks_like_prose_answer(*a))
            return Finding { "cm-answer-format", { s.index }, "answer submitted as prose instead of a bare value" };
    }
    return std::nullopt;
}

std::optional<Finding> degeneration(const EpisodeRecord& r, const DiagnosisConfig& c)
{
    const auto& steps = r.trajectory.steps;
    if (r.trajectory.outcome == Outcome::BudgetExhausted)
    {
        for (std::size_t i = 0; i + c.repeat_k <= steps.size(); ++i)
        {
            bool same = true;
            for (int k = 1; k < c.repeat_k; ++k)
                same = same && steps[i + k].decision.attempted == steps[i].decision.attempted;
            if (same)
            {
                std::vector<int> ev;
                for (int k = 0; k < c.repeat_k; ++k)
                    ev.push_back(steps[i + k].index);
                return Finding { "td-repetition", ev, "identical consecutive actions until the budget ran out" };
            }
        }
        for (std::size_t i = 0; c.oscillation_window >= 4 && i + c.oscillation_window <= steps.size(); ++i)
        {
            bool alt = steps[i].decision.attempted != steps[i + 1].decision.attempted;
            for (int k = 2; k < c.oscillation_window; ++k)
                alt = alt && steps[i + k].decision.attempted == steps[i + k - 2].decision.attempted;
            if (alt)
            {
                std::vector<int> ev;
                for (int k = 0; k < c.oscillation_window; ++k)
                    ev.push_back(steps[i + k].index);
                return Finding { "td-oscillation", ev, "alternating between two actions until the budget ran out" };
            }
        }
    }
    int streak = 0;
    for (std::size_t i = 0; i < steps.size(); ++i)
    {
        bool stalled = steps[i].decision.kind == DecisionKind::Block || steps[i].observation == kNothingHappens ||
                       text::starts_with_icase(steps[i].observation, "Error:") ||
                       (i > 0 && steps[i].observation == steps[i - 1].observation);
        streak = stalled ? streak + 1 : 0;
        if (streak >= c.stall_k)
        {
            std::vector<int> ev;
            for (std::size_t k = i + 1 - static_cast<std::size_t>(streak); k <= i; ++k)
                ev.push_back(steps[k].index);
            return Finding { "td-stall", ev, "consecutive steps without progress" };
        }
    }
    if (r.trajectory.outcome == Outcome::Failure && r.environment_id == "minidb")
    {
        std::vector<int> queries;
        std::string first;
        bool same = true;
        for (const auto& s: steps)
            if (s.decision.action && s.decision.action->call && s.decision.action->call->name == "execute_query")
            {
                if (queries.empty())
                    first = s.decision.action->text;
                same = same && s.decision.action->text == first;
                queries.push_back(s.index);
            }
        if (queries.size() >= 2 && same)
            return Finding { "td-entrenched", queries, "one query strategy repeated before a wrong commit" };
    }
    return std::nullopt;
}

} // namespace

DiagnosisReport classify(const EpisodeRecord& record, const DiagnosisConfig& config)
{
    if (record.trajectory.outcome == Outcome::Success)
        throw NotAFailure("episode " + record.episode_id + " succeeded");
    auto contract = base_contract_for(record.environment_id);
    DiagnosisReport rep;
    rep.episode_id = record.episode_id;
    rep.environment_id = record.environment_id;
    auto fill = [&](FailureCategory c, const Finding& f) {
        rep.category = c;
        rep.triggering_rule_id = f.rule;
        rep.evidence_steps = f.steps;
        rep.notes = f.notes;
        return rep;
    };
    if (auto f = action_realization(record, contract))
        return fill(FailureCategory::ActionRealization, *f);
    if (auto f = contract_mismatch(record, contract))
        return fill(FailureCategory::ContractMismatch, *f);
    if (auto f = degeneration(record, config))
        return fill(FailureCategory::TrajectoryDegeneration, *f);
    rep.category = FailureCategory::ResidualReasoning;
    rep.triggering_rule_id = "residual";
    rep.notes = record.fault.empty() ? "no interface or degeneration symptom" : "policy fault: " + record.fault;
    return rep;
}

Histogram histogram(const std::vector<DiagnosisReport>& reports)
{
    Histogram h;
    for (const auto& r: reports)
    {
        auto& row = h[r.environment_id];
        for (auto c: kCategories)
            row.try_emplace(c, 0);
        ++row[r.category];
    }
    return h;
}

std::string to_string(FailureCategory c)
{
    switch (c)
    {
    case FailureCategory::ActionRealization:
        return "ActionRealization";
    case FailureCategory::ContractMismatch:
        return "ContractMismatch";
    case FailureCategory::TrajectoryDegeneration:
        return "TrajectoryDegeneration";
    case FailureCategory::ResidualReasoning:
        return "ResidualReasoning";
    }
    return {};
}

FailureCategory parse_failure_category(std::string_view s)
{
    for (auto c: kCategories)
        if (to_string(c) == s)
            return c;
    throw ConfigError("unknown failure category '" + std::string(s) + "'");
}

Layer layer_for(FailureCategory c)
{
    switch (c)
    {
    case FailureCategory::ActionRealization:
        return Layer::ActionGate;
    case FailureCategory::ContractMismatch:
        return Layer::Contract;
    case FailureCategory::TrajectoryDegeneration:
        return Layer::Regulation;
    case FailureCategory::ResidualReasoning:
        return Layer::Skill;
    }
    return Layer::Skill;
}

std::string render_histogram(const Histogram& h)
{
    std::string out = "environment  ActionRealization  ContractMismatch  TrajectoryDegeneration  ResidualReasoning\n";
    for (const auto& [env, row]: h)
    {
        std::string line = env;
        line.resize(std::max<std::size_t>(line.size(), 12), ' ');
        for (auto c: kCategories)
        {
            auto it = row.find(c);
            auto n = std::to_string(it == row.end() ? 0 : it->second);
            auto width = to_string(c).size();
            line += "  " + std::string(width > n.size() ? width - n.size() : 0, ' ') + n;
        }
        out += line + "\n";
    }
    return out;
}

} // namespace harness
