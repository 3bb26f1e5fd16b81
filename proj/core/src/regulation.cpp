// SPDX-License-Identifier: Apache-2.0
#include <harness/regulation.hpp>
#include <harness/sql.hpp>
#include <harness/text.hpp>

#include <regex>

namespace harness
{

std::uint64_t observation_hash(std::string_view observation)
{
    return text::fnv1a(text::collapse_whitespace(observation));
}

bool is_noop_observation(std::string_view observation, const EnvironmentEvidence& evidence)
{
    for (const auto& p: evidence.no_op_phrases)
        if (!p.empty() && observation.substr(0, p.size()) == p)
            return true;
    return false;
}

void update_tracker(ProgressTracker& tracker, const std::string& action, const std::string& observation,
                    const EnvironmentEvidence& evidence, bool blocked)
{
    auto h = observation_hash(observation);
    if (!tracker.history.empty() && tracker.history.back().second == h)
        tracker.no_progress_streak = tracker.no_progress_streak == 0 ? 2 : tracker.no_progress_streak + 1;
    else
        tracker.no_progress_streak = 0;
    tracker.history.emplace_back(action, h);
    while (tracker.history.size() > ProgressTracker::kHistory)
        tracker.history.pop_front();
    if (blocked || is_noop_observation(observation, evidence))
        ++tracker.noop_streak;
    else
        tracker.noop_streak = 0;
    tracker.facts = evidence.progress_facts;
    std::string state_key;
    for (const auto& [k, v]: evidence.progress_facts)
        state_key += k + "=" + v + ";";
    tracker.visited_state_hashes.insert(text::fnv1a(state_key));
    if (auto it = evidence.progress_facts.find("location"); it != evidence.progress_facts.end())
        tracker.visited_locations.insert(it->second);
}

std::optional<InstructionGoal> parse_instruction_goal(std::string_view instruction)
{
    static const std::regex re(
        R"(put (?:a|an|some|the) (?:(clean|hot|heated|cool|cold|cooled) )?([a-z]+) (?:in|into|on|in the|on the) ?(?:a |an |the |some )?([a-z]+))");
    auto first_line = text::to_lower(text::split_lines(instruction).empty() ? std::string {}
                                                                            : text::split_lines(instruction).front());
    std::smatch m;
    if (!std::regex_search(first_line, m, re))
        return std::nullopt;
    InstructionGoal g;
    auto t = m[1].str();
    if (t == "clean")
        g.transform = "clean";
    else if (t == "hot" || t == "heated")
        g.transform = "heat";
    else if (t == "cool" || t == "cold" || t == "cooled")
        g.transform = "cool";
    g.object_type = m[2].str();
    g.destination_kind = m[3].str();
    return g;
}

bool is_task_critical(const Action& action, const std::string& environment_id)
{
    if (environment_id == "minidb")
    {
        if (!action.call)
            return false;
        if (action.call->name == "commit_final_answer")
            return true;
        if (action.call->name == "execute_query")
        {
            auto q = action.call->argument("query");
            if (!q)
                return false;
            auto verb = text::to_lower(text::trim(*q).substr(0, 6));
            return verb == "insert" || verb == "update" || verb == "delete";
        }
        return false;
    }
    auto verb = text::to_lower(text::trim(action.text));
    verb = verb.substr(0, verb.find(' '));
    return verb == "put" || verb == "take" || verb == "clean" || verb == "heat" || verb == "cool";
}

namespace
{

std::map<std::string, std::string> receptacle_kinds(const EnvironmentEvidence& evidence)
{
    std::map<std::string, std::string> out;
    auto s = evidence.fact("receptacle_kinds");
    std::size_t start = 0;
    while (start < s.size())
    {
        auto end = s.find(';', start);
        if (end == std::string::npos)
            end = s.size();
        auto entry = s.substr(start, end - start);
        auto eq = entry.find('=');
        if (eq != std::string::npos)
            out[entry.substr(0, eq)] = entry.substr(eq + 1);
        start = end + 1;
    }
    return out;
}

/// A goal-completing action that is deterministic given the evidence, if any.
std::optional<std::string> completing_action(const Trajectory& trajectory, const EnvironmentEvidence& evidence)
{
    if (trajectory.task.environment_id == "minidb")
    {
        if (evidence.fact("task_kind") == "mutation" && evidence.fact("mutation_succeeded") == "true" &&
            evidence.fact("committed") != "true")
            return format_call(ToolCall { "commit_final_answer", { { "answer", "done" } } });
        return std::nullopt;
    }
    auto goal = parse_instruction_goal(trajectory.task.instruction);
    auto held = evidence.fact("holding");
    if (!goal || held.empty() || evidence.fact("holding_type") != goal->object_type)
        return std::nullopt;
    if (!goal->transform.empty())
    {
        auto state = evidence.fact("holding_state");
        auto attr = goal->transform == "heat" ? "hot" : goal->transform == "cool" ? "cold" : "clean";
        if (state.find(attr) == std::string::npos)
            return std::nullopt;
    }
    auto kinds = receptacle_kinds(evidence);
    for (const auto& a: evidence.admissible_actions)
    {
        auto prefix = "put " + held + " in ";
        if (a.rfind(prefix, 0) != 0)
            continue;
        auto it = kinds.find(a.substr(prefix.size()));
        if (it != kinds.end() && it->second == goal->destination_kind)
            return a;
    }
    return std::nullopt;
}

std::optional<std::string> unvisited_move(const ProgressTracker& tracker, const EnvironmentEvidence& evidence)
{
    for (const auto& a: evidence.admissible_actions)
        if (a.rfind("go to ", 0) == 0 && !tracker.visited_locations.count(a.substr(6)))
            return a;
    return std::nullopt;
}

std::string with_suggestion(std::string message, const std::optional<std::string>& suggestion)
{
    if (suggestion)
        message += "\nSuggested action: " + *suggestion;
    return message;
}

struct Fired
{
    RegulationSignal signal;
    int priority;
};

std::vector<Fired> fire_all(const Trajectory& trajectory, const std::string& action, int remaining_budget,
                            const ProgressTracker& tracker, const EnvironmentEvidence& evidence,
                            const RegulationConfig& config)
{
    std::vector<Fired> out;
    if (config.budget && remaining_budget <= config.budget_warn)
    {
        RegulationSignal s;
        s.detector_id = "budget";
        if (auto a = completing_action(trajectory, evidence))
        {
            s.level = RegulationLevel::Directive;
            s.suggested_action = *a;
            s.message = with_suggestion("Only " + std::to_string(remaining_budget) +
                                            " steps remain. Completing the task now is possible with the suggested action.",
                                        a);
        }
        else
        {
            s.level = RegulationLevel::Warning;
            s.message = "Only " + std::to_string(remaining_budget) +
                        " steps remain. Finish the task or submit your answer now.";
        }
        out.push_back({ s, 0 });
    }
    if (config.repetition && static_cast<int>(tracker.history.size()) >= config.repeat_k)
    {
        bool same = true;
        auto it = tracker.history.rbegin();
        for (int i = 0; i < config.repeat_k; ++i, ++it)
            same = same && it->first == action;
        if (same)
        {
            RegulationSignal s;
            s.detector_id = "repetition";
            s.level = RegulationLevel::Warning;
            auto alt = unvisited_move(tracker, evidence);
            if (alt)
                s.suggested_action = alt;
            s.message = with_suggestion(std::string(kRepetitionMarker) + " '" + action + "' " +
                                            std::to_string(config.repeat_k) +
                                            " times in a row. It is not making progress; choose a different action.",
                                        alt);
            out.push_back({ s, 1 });
        }
    }
    if (config.stall && (tracker.no_progress_streak >= config.stall_k || tracker.noop_streak >= config.stall_k))
    {
        RegulationSignal s;
        s.detector_id = "stall";
        s.level = RegulationLevel::SoftRecovery;
        auto alt = unvisited_move(tracker, evidence);
        if (alt)
            s.suggested_action = alt;
        s.message = with_suggestion("The last " + std::to_string(std::max(tracker.no_progress_streak, tracker.noop_streak)) +
                                        " steps made no progress. Consider a different approach.",
                                    alt);
        out.push_back({ s, 2 });
    }
    if (config.oscillation && config.oscillation_window >= 4 &&
        static_cast<int>(tracker.history.size()) >= config.oscillation_window)
    {
        std::vector<std::string> last;
        for (auto it = tracker.history.end() - config.oscillation_window; it != tracker.history.end(); ++it)
            last.push_back(it->first);
        bool alternating = last[0] != last[1];
        for (std::size_t i = 2; i < last.size(); ++i)
            alternating = alternating && last[i] == last[i - 2];
        if (alternating)
        {
            RegulationSignal s;
            s.detector_id = "oscillation";
            s.level = RegulationLevel::Warning;
            s.message = "You are alternating between '" + last[last.size() - 2] + "' and '" + last.back() +
                        "' without progress. Break the cycle with a different action.";
            out.push_back({ s, 3 });
        }
    }
    return out;
}

} // namespace

RegulationSignal regulate(const Trajectory& trajectory, const std::string& action, const std::string& /*observation*/,
                          int remaining_budget, const ProgressTracker& tracker, const EnvironmentEvidence& evidence,
                          const RegulationConfig& config)
{
    auto fired = fire_all(trajectory, action, remaining_budget, tracker, evidence, config);
    if (fired.empty())
        return {};
    auto chosen = fired.front().signal;
    if (trajectory.steps.size() >= 2)
    {
        const auto& prev = trajectory.steps[trajectory.steps.size() - 2].regulation;
        for (const auto& f: fired)
            if (f.signal.detector_id == prev.detector_id && f.signal.level > chosen.level)
                chosen = f.signal;
    }
    return chosen;
}

} // namespace harness
