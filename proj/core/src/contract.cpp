// SPDX-License-Identifier: Apache-2.0
#include <harness/contract.hpp>
#include <harness/errors.hpp>
#include <harness/text.hpp>

#include <algorithm>
#include <regex>
#include <set>

namespace harness
{

const ToolSpec* Contract::find_tool(std::string_view name) const
{
    for (const auto& tool: tools)
        if (tool.name == name)
            return &tool;
    return nullptr;
}

void Contract::validate() const
{
    std::set<std::string> names;
    for (const auto& tool: tools)
    {
        if (!names.insert(tool.name).second)
            throw ConfigError("duplicate tool name '" + tool.name + "' in contract " + environment_id);
        std::set<std::string> params;
        bool seen_optional = false;
        for (const auto& p: tool.parameters)
        {
            if (!params.insert(p.name).second)
                throw ConfigError("duplicate parameter '" + p.name + "' on tool " + tool.name);
            if (p.required && seen_optional)
                throw ConfigError("required parameter after optional on tool " + tool.name);
            seen_optional |= !p.required;
        }
    }
}

namespace
{
template <typename T>
void append_unique(std::vector<T>& into, const std::vector<T>& items)
{
    for (const auto& item: items)
        if (std::find(into.begin(), into.end(), item) == into.end())
            into.push_back(item);
}
} // namespace

Contract apply_delta(const Contract& contract, const ContractDelta& delta)
{
    for (const auto& [tool, _]: delta.tool_amendments)
        if (!contract.find_tool(tool))
            throw UnknownTool("contract delta '" + delta.delta_id + "' amends unknown tool '" + tool + "'");

    Contract out = contract;
    for (auto& tool: out.tools)
    {
        auto it = delta.tool_amendments.find(tool.name);
        if (it == delta.tool_amendments.end())
            continue;
        auto segment = std::string(kAmendmentSeparator) + it->second;
        if (tool.description.find(segment) == std::string::npos)
            tool.description += segment;
    }
    append_unique(out.policy_notes, delta.added_policy_notes);
    append_unique(out.pitfalls, delta.pitfalls);
    return out;
}

Contract apply_deltas(const Contract& contract, const std::vector<ContractDelta>& deltas)
{
    Contract out = contract;
    for (const auto& delta: deltas)
        out = apply_delta(out, delta);
    return out;
}

std::string render_contract(const Contract& contract)
{
    std::string out = "# Environment contract: " + contract.environment_id + "\n";
    if (!contract.tools.empty())
    {
        out += "\n## Tools\n";
        for (const auto& tool: contract.tools)
        {
            out += "\n### " + tool.name + "\n";
            out += tool.description + "\n";
            if (!tool.syntax.empty())
                out += "Syntax: " + tool.syntax + "\n";
            if (!tool.parameters.empty())
            {
                out += "Parameters:\n";
                for (const auto& p: tool.parameters)
                    out += "- " + p.name + " (" + p.type + ", " + (p.required ? "required" : "optional") + ")\n";
            }
            if (!tool.admissibility_note.empty())
                out += "Admissibility: " + tool.admissibility_note + "\n";
        }
    }
    if (!contract.policy_notes.empty())
    {
        out += "\n## Policy notes\n";
        for (const auto& note: contract.policy_notes)
            out += "- " + note + "\n";
    }
    if (!contract.pitfalls.empty())
    {
        out += "\n## Pitfalls\n";
        for (const auto& p: contract.pitfalls)
            out += "- " + p + "\n";
    }
    out += "\n## Answer format\n" + contract.answer_format + "\n";
    return out;
}

std::string render_syntax(const ToolSpec& tool, const ArgList& args)
{
    std::string out = tool.syntax;
    for (const auto& [name, value]: args)
    {
        auto key = "{" + name + "}";
        auto pos = out.find(key);
        if (pos != std::string::npos)
            out.replace(pos, key.size(), value);
    }
    return out;
}

namespace
{
std::string regex_escape(std::string_view s)
{
    static const std::string special = R"(\^$.|?*+()[]{})";
    std::string out;
    for (char c: s)
    {
        if (special.find(c) != std::string::npos)
            out += '\\';
        out += c;
    }
    return out;
}

struct CompiledSyntax
{
    std::regex pattern;
    std::vector<std::string> params;
};

CompiledSyntax compile_syntax(const std::string& syntax)
{
    CompiledSyntax compiled;
    std::string pattern = "^";
    std::size_t i = 0;
    while (i < syntax.size())
    {
        auto open = syntax.find('{', i);
        if (open == std::string::npos)
        {
            pattern += regex_escape(syntax.substr(i));
            break;
        }
        auto close = syntax.find('}', open);
        pattern += regex_escape(syntax.substr(i, open - i));
        compiled.params.push_back(syntax.substr(open + 1, close - open - 1));
        pattern += "(.+?)";
        i = close + 1;
    }
    pattern += "$";
    compiled.pattern = std::regex(pattern);
    return compiled;
}
} // namespace

std::optional<ToolCall> parse_command(const Contract& contract, std::string_view text)
{
    auto command = text::collapse_whitespace(text);
    if (command.empty())
        return std::nullopt;
    for (const auto& tool: contract.tools)
    {
        if (tool.syntax.empty())
            continue;
        auto compiled = compile_syntax(tool.syntax);
        std::smatch m;
        if (!std::regex_match(command, m, compiled.pattern))
            continue;
        ToolCall call { tool.name, {} };
        for (std::size_t i = 0; i < compiled.params.size(); ++i)
            call.arguments.emplace_back(compiled.params[i], m[i + 1].str());
        return call;
    }
    return std::nullopt;
}

std::string tool_syntax_summary(const Contract& contract)
{
    std::vector<std::string> parts;
    for (const auto& tool: contract.tools)
        parts.push_back(tool.syntax.empty() ? tool.name : tool.syntax);
    return text::join(parts, " | ");
}

} // namespace harness
