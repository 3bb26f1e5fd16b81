// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/realization.hpp>
#include <harness/sql.hpp>
#include <harness/text.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <regex>

namespace harness
{

namespace
{

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Binds positional values to the tool's parameters; fails when a required one is missing.
std::optional<ToolCall> bind_positional(const ToolSpec& tool, const std::vector<std::string>& values)
{
    if (values.size() > tool.parameters.size())
        return std::nullopt;
    ToolCall call { tool.name, {} };
    for (std::size_t i = 0; i < tool.parameters.size(); ++i)
    {
        if (i < values.size())
            call.arguments.emplace_back(tool.parameters[i].name, values[i]);
        else if (tool.parameters[i].required)
            return std::nullopt;
    }
    return call;
}

std::optional<ToolCall> from_json(const nlohmann::json& j, const Contract& contract)
{
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
        return std::nullopt;
    auto tool = contract.find_tool(j["name"].get<std::string>());
    if (!tool)
        return std::nullopt;
    nlohmann::json args = j.value("arguments", nlohmann::json::object());
    if (args.is_string())
    {
        args = nlohmann::json::parse(args.get<std::string>(), nullptr, false);
        if (args.is_discarded())
            return std::nullopt;
    }
    if (!args.is_object())
        return std::nullopt;
    ToolCall call { tool->name, {} };
    for (const auto& p: tool->parameters)
    {
        if (!args.contains(p.name))
        {
            if (p.required)
                return std::nullopt;
            continue;
        }
        const auto& v = args[p.name];
        call.arguments.emplace_back(p.name, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return call;
}

/// End index (exclusive) of the balanced JSON object starting at `start`, honoring strings.
std::optional<std::size_t> object_end(std::string_view s, std::size_t start)
{
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < s.size(); ++i)
    {
        char c = s[i];
        if (in_string)
        {
            if (c == '\\')
                ++i;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{')
            ++depth;
        else if (c == '}' && --depth == 0)
            return i + 1;
    }
    return std::nullopt;
}

std::optional<ToolCall> rescue_json(std::string_view text, const Contract& contract)
{
    for (std::size_t i = text.find('{'); i != std::string_view::npos; i = text.find('{', i + 1))
    {
        auto end = object_end(text, i);
        if (!end)
            continue;
        auto j = nlohmann::json::parse(text.substr(i, *end - i), nullptr, false);
        if (j.is_discarded())
            continue;
        if (auto call = from_json(j, contract))
            return call;
    }
    return std::nullopt;
}

/// Parses `(a, "b", 'c')` starting at the opening parenthesis.
std::optional<std::vector<std::string>> parse_arguments(std::string_view s, std::size_t open)
{
    std::vector<std::string> out;
    std::size_t i = open + 1;
    auto skip_ws = [&] {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
    };
    skip_ws();
    if (i < s.size() && s[i] == ')')
        return out;
    while (i < s.size())
    {
        skip_ws();
        if (i >= s.size())
            return std::nullopt;
        std::string value;
        if (s[i] == '"' || s[i] == '\'')
        {
            char q = s[i++];
            bool closed = false;
            while (i < s.size())
            {
                if (s[i] == '\\' && i + 1 < s.size())
                {
                    value += s[i + 1];
                    i += 2;
                    continue;
                }
                if (s[i] == q)
                {
                    closed = true;
                    ++i;
                    break;
                }
                value += s[i++];
            }
            if (!closed)
                return std::nullopt;
            skip_ws();
        }
        else
        {
            while (i < s.size() && s[i] != ',' && s[i] != ')')
                value += s[i++];
            value = text::trim(value);
        }
        out.push_back(value);
        if (i >= s.size())
            return std::nullopt;
        if (s[i] == ')')
            return out;
        if (s[i] != ',')
            return std::nullopt;
        ++i;
    }
    return std::nullopt;
}

std::optional<ToolCall> rescue_keyword(std::string_view text, const Contract& contract)
{
    for (const auto& tool: contract.tools)
    {
        for (std::size_t pos = text.find(tool.name); pos != std::string_view::npos; pos = text.find(tool.name, pos + 1))
        {
            if (pos > 0 && ident_char(text[pos - 1]))
                continue;
            std::size_t after = pos + tool.name.size();
            while (after < text.size() && text[after] == ' ')
                ++after;
            if (after >= text.size())
                continue;
            if (text[after] == '(')
            {
                if (auto args = parse_arguments(text, after))
                    if (auto call = bind_positional(tool, *args))
                        return call;
            }
            else if (text[after] == ':')
            {
                auto line_end = text.find('\n', after);
                auto value = text::trim(text.substr(after + 1, line_end == std::string_view::npos ? std::string_view::npos
                                                                                                 : line_end - after - 1));
                if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
                    value = value.substr(1, value.size() - 2);
                if (!value.empty() && tool.parameters.size() >= 1)
                    if (auto call = bind_positional(tool, { value }))
                        return call;
            }
        }
    }
    return std::nullopt;
}

std::optional<ToolCall> rescue_fenced(std::string_view text, const Contract& contract)
{
    auto open = text.find("```");
    if (open == std::string_view::npos)
        return std::nullopt;
    auto body_start = text.find('\n', open);
    auto close = text.find("```", open + 3);
    if (close == std::string_view::npos)
        return std::nullopt;
    std::string body;
    if (body_start != std::string_view::npos && body_start < close)
        body = text::trim(text.substr(body_start + 1, close - body_start - 1));
    else
        body = text::trim(text.substr(open + 3, close - open - 3));
    if (body.empty())
        return std::nullopt;
    if (!contract.command_tool.empty())
    {
        auto tool = contract.find_tool(contract.command_tool);
        if (!tool)
            return std::nullopt;
        return bind_positional(*tool, { body });
    }
    if (contract.plain_text_commands)
        return parse_command(contract, body);
    return std::nullopt;
}

std::optional<ToolCall> rescue_xml(std::string_view text, const Contract& contract)
{
    for (const auto& tool: contract.tools)
    {
        auto open_tag = "<" + tool.name + ">";
        auto close_tag = "</" + tool.name + ">";
        auto open = text.find(open_tag);
        if (open == std::string_view::npos)
            continue;
        auto body_start = open + open_tag.size();
        auto close = text.find(close_tag, body_start);
        if (close == std::string_view::npos)
            continue;
        auto body = text::trim(text.substr(body_start, close - body_start));
        std::vector<std::string> values;
        if (!body.empty())
            values.push_back(body);
        if (auto call = bind_positional(tool, values))
            return call;
    }
    return std::nullopt;
}

std::string first_token(std::string_view s)
{
    auto t = text::to_lower(text::trim(s));
    auto sp = t.find(' ');
    return sp == std::string::npos ? t : t.substr(0, sp);
}

std::string alias(const std::string& verb, const RealizationConfig& config)
{
    auto it = config.verb_aliases.find(verb);
    return it == config.verb_aliases.end() ? verb : it->second;
}

/// Ranges of `s` inside single-quoted literals or backtick spans.
std::vector<bool> protected_mask(std::string_view s)
{
    std::vector<bool> mask(s.size(), false);
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        if (quote)
        {
            mask[i] = true;
            if (s[i] == '\\' && quote == '\'' && i + 1 < s.size())
                mask[++i] = true;
            else if (s[i] == quote)
                quote = 0;
            continue;
        }
        if (s[i] == '\'' || s[i] == '`')
        {
            quote = s[i];
            mask[i] = true;
        }
    }
    return mask;
}

/// Unprotected, word-bounded, case-insensitive occurrences of `ident`.
std::vector<std::size_t> occurrences(std::string_view s, std::string_view ident)
{
    auto mask = protected_mask(s);
    auto lower = text::to_lower(s);
    auto needle = text::to_lower(ident);
    std::vector<std::size_t> out;
    for (auto pos = lower.find(needle); pos != std::string::npos; pos = lower.find(needle, pos + 1))
    {
        if (mask[pos])
            continue;
        auto end = pos + needle.size();
        if ((pos > 0 && ident_char(s[pos - 1])) || (end < s.size() && ident_char(s[end])))
            continue;
        out.push_back(pos);
    }
    return out;
}

std::string wrap_at(std::string_view s, const std::vector<std::pair<std::size_t, std::size_t>>& spans)
{
    std::string out;
    std::size_t last = 0;
    for (const auto& [pos, len]: spans)
    {
        out.append(s.substr(last, pos - last));
        out += '`';
        out.append(s.substr(pos, len));
        out += '`';
        last = pos + len;
    }
    out.append(s.substr(last));
    return out;
}

struct Candidate
{
    Action action;
    bool parsed = false;
};

Candidate candidate_from_call(const ToolCall& call, const Contract& contract)
{
    Candidate c;
    c.parsed = true;
    c.action.call = call;
    if (contract.plain_text_commands)
    {
        auto tool = contract.find_tool(call.name);
        c.action.text = tool ? text::collapse_whitespace(render_syntax(*tool, call.arguments)) : format_call(call);
    }
    else
        c.action.text = format_call(call);
    return c;
}

Candidate initial_candidate(const RawModelOutput& raw, const Contract& contract)
{
    if (raw.tool_call)
        return candidate_from_call(*raw.tool_call, contract);
    Candidate c;
    if (contract.plain_text_commands)
    {
        c.action.text = text::collapse_whitespace(raw.text);
        c.action.call = parse_command(contract, c.action.text);
        c.parsed = c.action.call.has_value();
    }
    else
        c.action.text = text::collapse_whitespace(raw.text);
    return c;
}

Bindings make_bindings(const RawModelOutput& raw, const Candidate& c, const Contract& contract,
                       const EnvironmentEvidence& evidence, const Trajectory& trajectory)
{
    Bindings b;
    b.scalars["raw"] = raw.text;
    b.scalars["action"] = c.action.text;
    b.scalars["parsed"] = c.parsed ? "true" : "false";
    b.scalars["has_admissible"] = evidence.admissible_actions.empty() ? "false" : "true";
    b.scalars["blocked_before"] = prior_block_count(trajectory, c.action.text) > 0 ? "true" : "false";
    bool known = false;
    bool missing = false;
    if (c.action.call)
    {
        const auto& call = *c.action.call;
        b.scalars["tool"] = call.name;
        for (const auto& [k, v]: call.arguments)
            b.scalars["arg." + k] = v;
        if (auto tool = contract.find_tool(call.name))
        {
            known = true;
            for (const auto& p: tool->parameters)
                if (p.required && !call.argument(p.name))
                    missing = true;
        }
    }
    b.scalars["known_tool"] = known ? "true" : "false";
    b.scalars["missing_required"] = missing ? "true" : "false";
    for (const auto& [k, v]: evidence.progress_facts)
        b.scalars["fact." + k] = v;
    b.sets["admissible"] = evidence.admissible_actions;
    for (const auto& t: contract.tools)
        b.sets["tools"].push_back(t.name);
    return b;
}

std::string fill_template(const std::string& tmpl, const Bindings& b, const Contract& contract)
{
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size())
    {
        if (tmpl[i] == '{')
        {
            auto close = tmpl.find('}', i);
            if (close != std::string::npos)
            {
                auto key = tmpl.substr(i + 1, close - i - 1);
                if (key == "tools")
                {
                    out += tool_syntax_summary(contract);
                    i = close + 1;
                    continue;
                }
                if (b.scalars.count(key) || key.rfind("arg.", 0) == 0 || key.rfind("fact.", 0) == 0)
                {
                    out += b.scalar(key);
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

int rewrite_rank(Rewrite r)
{
    return static_cast<int>(r);
}

/// Applies one rewrite; returns true when the candidate changed.
bool apply_rewrite(Rewrite rewrite, Candidate& c, RescuePath& path, const RawModelOutput& raw,
                   const Contract& contract, const EnvironmentEvidence& evidence, const RealizationConfig& config)
{
    switch (rewrite)
    {
    case Rewrite::ToolCallRescue: {
        if (c.parsed && (!contract.plain_text_commands || evidence.is_admissible(c.action.text)))
            return false;
        auto rescued = rescue_tool_call(raw.text, contract);
        if (!rescued)
            return false;
        auto next = candidate_from_call(rescued->first, contract);
        if (next.action == c.action)
            return false;
        c = next;
        path = rescued->second;
        return true;
    }
    case Rewrite::FuzzyAdmissible: {
        if (evidence.admissible_actions.empty() || evidence.is_admissible(c.action.text))
            return false;
        auto match = canonicalize(c.action.text, evidence.admissible_actions, config);
        if (!match)
            return false;
        c.action.text = *match;
        c.action.call = parse_command(contract, *match);
        c.parsed = c.action.call.has_value();
        return true;
    }
    case Rewrite::BacktickRepair: {
        if (!c.action.call)
            return false;
        bool changed = false;
        for (auto& [k, v]: c.action.call->arguments)
        {
            auto repaired = backtick_repair(v, evidence.schema);
            if (repaired != v)
            {
                v = repaired;
                changed = true;
            }
        }
        if (changed)
            c = candidate_from_call(*c.action.call, contract);
        return changed;
    }
    case Rewrite::NullToZero: {
        if (!c.action.call)
            return false;
        bool changed = false;
        for (auto& [k, v]: c.action.call->arguments)
            if (text::to_lower(text::trim(v)) == "null")
            {
                v = "0";
                changed = true;
            }
        if (changed)
            c = candidate_from_call(*c.action.call, contract);
        return changed;
    }
    }
    return false;
}

} // namespace

std::optional<std::pair<ToolCall, RescuePath>> rescue_tool_call(std::string_view text, const Contract& contract)
{
    if (auto c = rescue_json(text, contract))
        return std::make_pair(*c, RescuePath::Json);
    if (auto c = rescue_keyword(text, contract))
        return std::make_pair(*c, RescuePath::Keyword);
    if (auto c = rescue_fenced(text, contract))
        return std::make_pair(*c, RescuePath::Fenced);
    if (auto c = rescue_xml(text, contract))
        return std::make_pair(*c, RescuePath::XmlLike);
    return std::nullopt;
}

std::optional<std::string> canonicalize(std::string_view action, const std::vector<std::string>& admissible,
                                        const RealizationConfig& config)
{
    auto input = text::collapse_whitespace(action);
    if (std::find(admissible.begin(), admissible.end(), input) != admissible.end())
        return input;
    auto lowered = text::to_lower(input);
    auto verb = alias(first_token(input), config);
    std::optional<std::string> found;
    for (const auto& a: admissible)
    {
        if (alias(first_token(a), config) != verb)
            continue;
        if (text::similarity_ratio(lowered, text::to_lower(a)) < config.similarity_threshold)
            continue;
        if (found)
            return std::nullopt;
        found = a;
    }
    return found;
}

std::string backtick_repair(std::string_view query, const SchemaMap& schema)
{
    std::vector<std::string> spaced;
    std::vector<std::string> reserved;
    for (const auto& id: schema.flagged_identifiers())
    {
        auto& bucket = id.find(' ') != std::string::npos ? spaced : reserved;
        if (std::find(bucket.begin(), bucket.end(), id) == bucket.end())
            bucket.push_back(id);
    }
    if (spaced.empty() && reserved.empty())
        return std::string(query);
    std::sort(spaced.begin(), spaced.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });

    std::string current(query);
    for (const auto& id: spaced)
    {
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        for (auto pos: occurrences(current, id))
            spans.emplace_back(pos, id.size());
        if (!spans.empty())
            current = wrap_at(current, spans);
    }
    if (sql::parses(current))
        return current;

    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (const auto& id: reserved)
        for (auto pos: occurrences(current, id))
            slots.emplace_back(pos, id.size());
    std::sort(slots.begin(), slots.end());
    if (slots.empty() || slots.size() > 12)
        return std::string(query);
    // Smallest set of reserved-word occurrences whose quoting makes the statement parse.
    const std::size_t n = slots.size();
    for (std::size_t size = 1; size <= n; ++size)
    {
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
        {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != size)
                continue;
            std::vector<std::pair<std::size_t, std::size_t>> chosen;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i))
                    chosen.push_back(slots[i]);
            auto candidate = wrap_at(current, chosen);
            if (sql::parses(candidate))
                return candidate;
        }
    }
    return std::string(query);
}

Action passthrough_action(const RawModelOutput& raw, const Contract& contract)
{
    return initial_candidate(raw, contract).action;
}

std::optional<std::string> suggest_action(std::string_view raw_text, const Contract& contract,
                                          const EnvironmentEvidence& evidence)
{
    if (contract.plain_text_commands)
    {
        auto lowered = text::to_lower(raw_text);
        const std::string* best = nullptr;
        for (const auto& a: evidence.admissible_actions)
        {
            auto pos = lowered.find(text::to_lower(a));
            if (pos == std::string::npos)
                continue;
            auto end = pos + a.size();
            if ((pos > 0 && ident_char(lowered[pos - 1])) || (end < lowered.size() && ident_char(lowered[end])))
                continue;
            if (!best || a.size() > best->size())
                best = &a;
        }
        if (best)
            return *best;
        return std::nullopt;
    }
    if (auto rescued = rescue_tool_call(raw_text, contract))
        return format_call(rescued->first);
    const std::string text(raw_text);
    static const std::regex sql_re(R"(\b(SELECT|INSERT|UPDATE|DELETE)\b[^\n;]*)", std::regex::icase);
    std::smatch m;
    if (!contract.command_tool.empty() && std::regex_search(text, m, sql_re))
    {
        auto stmt = text::trim(m.str());
        auto trimmed = stmt;
        while (!sql::parses(trimmed) && !trimmed.empty() && std::string_view(".\"')` ").find(trimmed.back()) != std::string_view::npos)
            trimmed.pop_back();
        if (sql::parses(trimmed))
            stmt = trimmed;
        if (auto tool = contract.find_tool(contract.command_tool))
            if (auto call = bind_positional(*tool, { stmt }))
                return format_call(*call);
    }
    static const std::regex answer_re(R"(answer\s*(?:is|:)\s*(.+?)\s*\.?\s*$)", std::regex::icase);
    for (const auto& tool: contract.tools)
    {
        if (tool.name.find("answer") == std::string::npos)
            continue;
        if (std::regex_search(text, m, answer_re))
        {
            auto value = text::trim(m[1].str());
            if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
                value = value.substr(1, value.size() - 2);
            if (auto call = bind_positional(tool, { value }))
                return format_call(*call);
        }
    }
    return std::nullopt;
}

int prior_block_count(const Trajectory& trajectory, std::string_view attempted)
{
    int n = 0;
    for (const auto& s: trajectory.steps)
        if (s.decision.kind == DecisionKind::Block && s.decision.attempted == attempted)
            ++n;
    return n;
}

RealizationDecision realize(const RawModelOutput& raw, const Trajectory& trajectory, const Contract& contract,
                            const EnvironmentEvidence& evidence, const std::vector<GateRule>& rules,
                            const RealizationConfig& config)
{
    std::vector<const GateRule*> rewrites;
    std::vector<const GateRule*> blocks;
    for (const auto& r: rules)
    {
        if (r.environment_id != contract.environment_id)
            continue;
        (std::holds_alternative<BlockEffect>(r.effect) ? blocks : rewrites).push_back(&r);
    }
    std::sort(rewrites.begin(), rewrites.end(), [](const GateRule* a, const GateRule* b) {
        auto ra = rewrite_rank(std::get<CanonicalizeEffect>(a->effect).rewrite);
        auto rb = rewrite_rank(std::get<CanonicalizeEffect>(b->effect).rewrite);
        return ra != rb ? ra < rb : a->rule_id < b->rule_id;
    });
    std::sort(blocks.begin(), blocks.end(), [](const GateRule* a, const GateRule* b) { return a->rule_id < b->rule_id; });

    RealizationDecision d;
    auto c = initial_candidate(raw, contract);
    std::vector<std::string> rewrote;
    for (auto rule: rewrites)
    {
        auto b = make_bindings(raw, c, contract, evidence, trajectory);
        if (!rule->trigger.evaluate(b))
            continue;
        auto kind = std::get<CanonicalizeEffect>(rule->effect).rewrite;
        if (apply_rewrite(kind, c, d.rescue_path, raw, contract, evidence, config))
        {
            rewrote.push_back(rule->rule_id);
            if (kind != Rewrite::ToolCallRescue)
                d.canonicalized = true;
        }
    }
    d.attempted = c.action.text;

    auto b = make_bindings(raw, c, contract, evidence, trajectory);
    for (auto rule: blocks)
    {
        if (!rule->trigger.evaluate(b))
            continue;
        const auto& effect = std::get<BlockEffect>(rule->effect);
        auto message = fill_template(effect.message_template, b, contract);
        if (effect.suggest)
            if (auto s = suggest_action(raw.text, contract, evidence))
                message += "\n" + std::string(kSuggestedActionPrefix) + *s;
        int repeats = prior_block_count(trajectory, d.attempted) + 1;
        if (repeats >= config.escalation_threshold)
        {
            message += "\nThis action has been blocked " + std::to_string(repeats) + " times.";
            if (!evidence.admissible_actions.empty())
                message += " Admissible actions: " + text::join(evidence.admissible_actions, ", ") + ".";
            else
                message += " Valid calls: " + tool_syntax_summary(contract);
        }
        d.kind = DecisionKind::Block;
        d.block_message = message;
        d.rule_id = rule->rule_id;
        d.canonicalized = false;
        return d;
    }
    d.kind = DecisionKind::Exec;
    d.action = c.action;
    d.rule_id = text::join(rewrote, ",");
    return d;
}

std::string to_string(Rewrite rewrite)
{
    switch (rewrite)
    {
    case Rewrite::ToolCallRescue:
        return "ToolCallRescue";
    case Rewrite::FuzzyAdmissible:
        return "FuzzyAdmissible";
    case Rewrite::BacktickRepair:
        return "BacktickRepair";
    case Rewrite::NullToZero:
        return "NullToZero";
    }
    return {};
}

Rewrite parse_rewrite(std::string_view s)
{
    for (auto r: { Rewrite::ToolCallRescue, Rewrite::FuzzyAdmissible, Rewrite::BacktickRepair, Rewrite::NullToZero })
        if (to_string(r) == s)
            return r;
    throw ConfigError("unknown rewrite '" + std::string(s) + "'");
}

} // namespace harness
