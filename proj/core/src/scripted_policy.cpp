// SPDX-License-Identifier: Apache-2.0
#include <harness/agents.hpp>
#include <harness/errors.hpp>
#include <harness/gridhouse.hpp>
#include <harness/minidb.hpp>
#include <harness/realization.hpp>
#include <harness/regulation.hpp>
#include <harness/text.hpp>

#include <array>

namespace harness
{

namespace
{

const std::array<std::pair<Behavior, std::string_view>, 6> kBehaviorNames { {
    { Behavior::Oracle, "Oracle" },
    { Behavior::FreeText, "FreeText" },
    { Behavior::Loop, "Loop" },
    { Behavior::WrongTool, "WrongTool" },
    { Behavior::PrematureCommit, "PrematureCommit" },
    { Behavior::FollowHint, "FollowHint" },
} };

Action replay_action(const std::string& executed, const Contract& contract)
{
    Action a;
    a.text = executed;
    if (contract.plain_text_commands)
    {
        a.call = parse_command(contract, executed);
        return a;
    }
    if (auto parsed = parse_call_syntax(executed))
    {
        ToolCall call { parsed->first, {} };
        auto tool = contract.find_tool(parsed->first);
        for (std::size_t i = 0; i < parsed->second.size(); ++i)
            call.arguments.emplace_back(tool && i < tool->parameters.size() ? tool->parameters[i].name : "",
                                        parsed->second[i]);
        a.call = call;
    }
    return a;
}

std::optional<std::string> suggested_in(const std::string& message)
{
    for (const auto& line: text::split_lines(message))
        if (line.rfind(kSuggestedActionPrefix, 0) == 0)
            return text::trim(std::string_view(line).substr(kSuggestedActionPrefix.size()));
    return std::nullopt;
}

bool any_feedback_contains(const Transcript& t, std::string_view marker)
{
    for (const auto& s: t.steps)
        if (s.observation.find(marker) != std::string::npos || s.regulation.find(marker) != std::string::npos)
            return true;
    return false;
}

/// The intended next move, as an environment action plus its rendering for prose.
struct Intent
{
    RawModelOutput output;
    std::string words; // action as it would be described in prose
    bool is_commit = false;
    std::string answer;
    std::string query;
};

RawModelOutput tool_output(const std::string& tool, const std::string& param, const std::string& value)
{
    RawModelOutput out;
    out.tool_call = ToolCall { tool, { { param, value } } };
    return out;
}

Intent minidb_commit(const std::string& answer)
{
    Intent i;
    i.output = tool_output("commit_final_answer", "answer", answer);
    i.is_commit = true;
    i.answer = answer;
    i.words = "The final answer is " + answer;
    return i;
}

Intent minidb_query(const std::string& q)
{
    Intent i;
    i.output = tool_output("execute_query", "query", q);
    i.query = q;
    i.words = "I would run the following SQL to look this up: " + q;
    return i;
}

} // namespace

std::string to_string(Behavior b)
{
    for (const auto& [v, name]: kBehaviorNames)
        if (v == b)
            return std::string(name);
    return {};
}

Behavior parse_behavior(std::string_view s)
{
    for (const auto& [v, name]: kBehaviorNames)
        if (name == s)
            return v;
    throw ConfigError("unknown behavior '" + std::string(s) + "'");
}

ScriptedPolicy::ScriptedPolicy(ScriptedConfig config): _config(config), _id("scripted:" + to_string(config.behavior))
{
    if (config.fault_rate < 0.0 || config.fault_rate > 1.0)
        throw ConfigError("fault_rate must lie in [0, 1]");
}

RawModelOutput ScriptedPolicy::next_action(const std::string& rendered, const PolicyContext& context) const
{
    if (!context.worlds)
        throw PolicyFault("scripted policy needs the world catalog");
    const auto& task = context.task;
    auto transcript = parse_transcript(rendered);
    auto contract = base_contract_for(task.environment_id);

    auto env = make_environment(task, context.seed, *context.worlds);
    std::vector<std::string> executed_ok;
    std::size_t executed_count = 0;
    for (const auto& s: transcript.steps)
    {
        if (s.blocked || s.executed.empty())
            continue;
        auto obs = env->step(replay_action(s.executed, contract));
        ++executed_count;
        if (!env->is_error_or_noop(obs))
            executed_ok.push_back(s.executed);
    }

    Behavior family = _config.behavior;
    if (family == Behavior::FollowHint)
        family = task.fault_family.empty() ? Behavior::Oracle : parse_behavior(task.fault_family);

    const std::size_t turn = transcript.steps.size();
    if (_config.behavior != Behavior::Oracle && _config.hint_compliance && !transcript.steps.empty())
    {
        const auto& last = transcript.steps.back();
        auto hint = last.regulation.empty() ? std::nullopt : suggested_in(last.regulation);
        if (!hint)
            hint = suggested_in(last.observation);
        if (hint)
        {
            if (!contract.plain_text_commands)
                if (auto a = replay_action(*hint, contract); a.call)
                    return RawModelOutput { {}, a.call };
            return RawModelOutput { *hint, std::nullopt };
        }
    }
    const bool fault = text::unit_interval(text::mix_seed(text::fnv1a(task.task_id) ^ context.seed, turn)) < _config.fault_rate;

    if (task.environment_id == "gridhouse")
    {
        const auto& state = static_cast<const gridhouse::GridHouse&>(*env).state();
        auto plan = gridhouse::oracle_plan(state);
        std::string action = plan.empty() ? "look" : plan.front();
        if (family == Behavior::Loop && fault && executed_count >= 1 &&
            !any_feedback_contains(transcript, kRepetitionMarker))
            action = "look";
        else if (family == Behavior::WrongTool && fault && !state.goal.transform.empty() &&
                 action.rfind("take ", 0) == 0 &&
                 transcript.contract.find(markers::kTakeBeforeTransform) == std::string::npos)
        {
            auto from = action.find(" from ");
            action = state.goal.transform + " " + action.substr(5, from - 5) + " with " + action.substr(from + 6);
        }
        if (family == Behavior::FreeText && fault)
            return RawModelOutput { "I think the best next step is to " + action + " now.", std::nullopt };
        return RawModelOutput { action, std::nullopt };
    }

    const auto& db = static_cast<const minidb::MiniDB&>(*env).state();
    const bool mutation = db.task_kind == "mutation";
    Intent intent;
    bool have = false;
    for (const auto& q: task.reference_solution)
    {
        auto rendered_call = format_call(ToolCall { "execute_query", { { "query", q } } });
        if (std::find(executed_ok.begin(), executed_ok.end(), rendered_call) == executed_ok.end())
        {
            intent = minidb_query(q);
            have = true;
            break;
        }
    }
    if (!have)
    {
        std::string answer;
        if (mutation)
            answer = "done";
        else if (_config.commit_observed)
            answer = db.last_result;
        else
            answer = task.success_spec.count("answer") ? task.success_spec.at("answer") : "";
        intent = minidb_commit(answer);
    }

    if (family == Behavior::Loop && fault && !executed_ok.empty() && !any_feedback_contains(transcript, kRepetitionMarker))
    {
        auto first = replay_action(executed_ok.front(), contract);
        if (first.call && first.call->argument("query"))
            intent = minidb_query(*first.call->argument("query"));
    }
    else if (family == Behavior::PrematureCommit && fault && mutation && !db.mutation_succeeded &&
             !any_feedback_contains(transcript, markers::kMutationFirst))
        intent = minidb_commit("done");
    else if (family == Behavior::WrongTool && fault && intent.is_commit && !mutation &&
             transcript.contract.find(markers::kBareValue) == std::string::npos)
        intent = minidb_commit("The answer is " + intent.answer);

    if (family == Behavior::FreeText && fault)
        return RawModelOutput { intent.words, std::nullopt };
    return intent.output;
}

} // namespace harness
