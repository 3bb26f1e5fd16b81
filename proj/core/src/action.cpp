// SPDX-License-Identifier: Apache-2.0
#include <harness/action.hpp>

#include <json.hpp>

#include <cctype>

namespace harness
{

const std::string* ToolCall::argument(std::string_view key) const
{
    for (const auto& [name, value]: arguments)
        if (name == key)
            return &value;
    return nullptr;
}

std::string format_call(const ToolCall& call)
{
    std::string out = call.name + "(";
    for (std::size_t i = 0; i < call.arguments.size(); ++i)
    {
        if (i > 0)
            out += ", ";
        out += '"';
        for (char c: call.arguments[i].second)
        {
            if (c == '"' || c == '\\')
                out += '\\';
            out += c;
        }
        out += '"';
    }
    out += ")";
    return out;
}

std::optional<std::pair<std::string, std::vector<std::string>>> parse_call_syntax(std::string_view text)
{
    std::size_t i = 0;
    auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    while (i < text.size() && is_ident(text[i]))
        ++i;
    if (i == 0 || i >= text.size() || text[i] != '(')
        return std::nullopt;
    std::string name(text.substr(0, i));
    ++i;
    std::vector<std::string> args;
    auto skip_ws = [&] {
        while (i < text.size() && text[i] == ' ')
            ++i;
    };
    skip_ws();
    if (i < text.size() && text[i] == ')')
        return i + 1 == text.size() ? std::optional { std::pair { name, args } } : std::nullopt;
    while (true)
    {
        skip_ws();
        if (i >= text.size() || text[i] != '"')
            return std::nullopt;
        ++i;
        std::string value;
        bool closed = false;
        while (i < text.size())
        {
            char c = text[i++];
            if (c == '\\' && i < text.size())
            {
                value += text[i++];
                continue;
            }
            if (c == '"')
            {
                closed = true;
                break;
            }
            value += c;
        }
        if (!closed)
            return std::nullopt;
        args.push_back(std::move(value));
        skip_ws();
        if (i < text.size() && text[i] == ',')
        {
            ++i;
            continue;
        }
        if (i < text.size() && text[i] == ')' && i + 1 == text.size())
            return std::pair { name, args };
        return std::nullopt;
    }
}

namespace
{
constexpr std::string_view kOpen = "<tool_call>";
constexpr std::string_view kClose = "</tool_call>";
} // namespace

std::string serialize_raw_output(const RawModelOutput& raw)
{
    if (!raw.tool_call)
        return raw.text;
    auto args = nlohmann::ordered_json::object();
    for (const auto& [k, v]: raw.tool_call->arguments)
        args[k] = v;
    nlohmann::ordered_json call { { "name", raw.tool_call->name }, { "arguments", args } };
    std::string out = raw.text;
    if (!out.empty())
        out += "\n";
    out += std::string(kOpen) + call.dump() + std::string(kClose);
    return out;
}

RawModelOutput deserialize_raw_output(std::string_view logged)
{
    RawModelOutput raw;
    auto open = logged.rfind(kOpen);
    if (open == std::string_view::npos || logged.size() < kClose.size()
        || logged.substr(logged.size() - kClose.size()) != kClose)
    {
        raw.text = std::string(logged);
        return raw;
    }
    auto body = logged.substr(open + kOpen.size(), logged.size() - kClose.size() - open - kOpen.size());
    auto parsed = nlohmann::ordered_json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object())
    {
        raw.text = std::string(logged);
        return raw;
    }
    ToolCall call;
    call.name = parsed.value("name", "");
    if (parsed.contains("arguments") && parsed["arguments"].is_object())
        for (auto& [k, v]: parsed["arguments"].items())
            call.arguments.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    raw.tool_call = std::move(call);
    auto text = logged.substr(0, open);
    if (!text.empty() && text.back() == '\n')
        text.remove_suffix(1);
    raw.text = std::string(text);
    return raw;
}

} // namespace harness
