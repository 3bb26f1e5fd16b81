// SPDX-License-Identifier: Apache-2.0
#include <harness/agents.hpp>
#include <harness/text.hpp>

namespace harness
{

namespace
{
void section(std::string& out, std::string_view tag, std::string_view content)
{
    out += tag;
    out += '\n';
    out += content;
    out += '\n';
}
} // namespace

std::string render_for_model(const Trajectory& trajectory)
{
    std::string out;
    section(out, render_tags::kSystem, render_contract(trajectory.contract));
    section(out, render_tags::kUser, trajectory.task.instruction);
    section(out, render_tags::kEnvironment, trajectory.initial_observation);
    for (const auto& s: trajectory.steps)
    {
        section(out, render_tags::kAssistant, s.raw_model_output);
        if (s.decision.kind == DecisionKind::Exec && s.decision.action)
            section(out, render_tags::kExecuted, s.decision.action->text);
        else
            section(out, render_tags::kBlocked, "");
        section(out, render_tags::kEnvironment, s.observation);
        if (s.regulation.level != RegulationLevel::Empty)
            section(out, render_tags::kRegulation, s.regulation.message);
    }
    return out;
}

Transcript parse_transcript(std::string_view rendered)
{
    Transcript t;
    std::string current_tag;
    std::vector<std::string> buffer;
    int environment_seen = 0;
    auto flush = [&] {
        if (current_tag.empty())
            return;
        std::string content;
        for (std::size_t i = 0; i < buffer.size(); ++i)
        {
            if (i > 0)
                content += '\n';
            content += buffer[i];
        }
        if (current_tag == render_tags::kSystem)
            t.contract = content;
        else if (current_tag == render_tags::kUser)
            t.instruction = content;
        else if (current_tag == render_tags::kAssistant)
            t.steps.push_back({ content, false, {}, {}, {} });
        else if (current_tag == render_tags::kExecuted && !t.steps.empty())
            t.steps.back().executed = content;
        else if (current_tag == render_tags::kBlocked && !t.steps.empty())
            t.steps.back().blocked = true;
        else if (current_tag == render_tags::kEnvironment)
        {
            if (environment_seen++ == 0)
                t.initial_observation = content;
            else if (!t.steps.empty())
                t.steps.back().observation = content;
        }
        else if (current_tag == render_tags::kRegulation && !t.steps.empty())
            t.steps.back().regulation = content;
        buffer.clear();
    };
    static const std::string_view tags[] = { render_tags::kSystem,   render_tags::kUser,     render_tags::kEnvironment,
                                             render_tags::kAssistant, render_tags::kExecuted, render_tags::kBlocked,
                                             render_tags::kRegulation };
    std::size_t pos = 0;
    while (pos <= rendered.size())
    {
        auto end = rendered.find('\n', pos);
        if (end == std::string_view::npos)
            end = rendered.size();
        auto line = rendered.substr(pos, end - pos);
        bool is_tag = false;
        for (auto tag: tags)
            if (line == tag)
                is_tag = true;
        if (is_tag)
        {
            flush();
            current_tag = std::string(line);
        }
        else
            buffer.emplace_back(line);
        if (end == rendered.size())
            break;
        pos = end + 1;
    }
    // Every section is newline-terminated, so the final line read is an empty remainder.
    if (!buffer.empty() && buffer.back().empty())
        buffer.pop_back();
    flush();
    return t;
}

} // namespace harness
