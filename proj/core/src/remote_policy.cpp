// SPDX-License-Identifier: Apache-2.0
#include <harness/agents.hpp>
#include <harness/errors.hpp>
#include <harness/text.hpp>

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>

namespace harness
{

using nlohmann::json;

namespace
{
std::string env_or(const char* name, const char* fallback)
{
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : std::string(fallback);
}

json tool_definitions(const Contract& contract)
{
    json tools = json::array();
    for (const auto& t: contract.tools)
    {
        json props = json::object();
        json required = json::array();
        for (const auto& p: t.parameters)
        {
            props[p.name] = json { { "type", "string" } };
            if (p.required)
                required.push_back(p.name);
        }
        tools.push_back(json { { "type", "function" },
                               { "function",
                                 { { "name", t.name },
                                   { "description", t.description },
                                   { "parameters", { { "type", "object" }, { "properties", props }, { "required", required } } } } } });
    }
    return tools;
}
} // namespace

RemoteConfig RemoteConfig::from_environment()
{
    RemoteConfig c;
    c.api_base = env_or("HARNESS_API_BASE", "https://api.openai.com/v1");
    c.api_key = env_or("HARNESS_API_KEY", "");
    c.model = env_or("HARNESS_MODEL", "");
    if (auto tokens = env_or("HARNESS_MAX_TOKENS", ""); !tokens.empty())
        c.max_tokens = std::stoi(tokens);
    return c;
}

RemotePolicy::RemotePolicy(RemoteConfig config): _config(std::move(config)), _id("remote:" + _config.model)
{
    if (_config.model.empty())
        throw ConfigError("remote policy needs a model name (HARNESS_MODEL)");
}

std::string RemotePolicy::request_body(const std::string& rendered, const std::string& environment_id) const
{
    auto t = parse_transcript(rendered);
    json messages = json::array();
    messages.push_back({ { "role", "system" }, { "content", t.contract } });
    messages.push_back({ { "role", "user" }, { "content", t.instruction + "\n\n" + t.initial_observation } });
    for (const auto& s: t.steps)
    {
        messages.push_back({ { "role", "assistant" }, { "content", s.raw } });
        std::string feedback = s.observation;
        if (!s.regulation.empty())
            feedback += "\n\n" + s.regulation;
        messages.push_back({ { "role", "user" }, { "content", feedback } });
    }
    json body { { "model", _config.model },
                { "messages", messages },
                { "temperature", _config.temperature },
                { "max_tokens", _config.max_tokens } };
    auto contract = base_contract_for(environment_id);
    if (!contract.plain_text_commands)
        body["tools"] = tool_definitions(contract);
    return body.dump();
}

RawModelOutput RemotePolicy::parse_response(std::string_view body, const Contract& contract)
{
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
        throw RemoteUnavailable("malformed chat-completions response");
    const auto& msg = j["choices"][0].value("message", json::object());
    RawModelOutput out;
    if (msg.contains("content") && msg["content"].is_string())
        out.text = msg["content"].get<std::string>();
    if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty())
    {
        const auto& fn = msg["tool_calls"][0].value("function", json::object());
        ToolCall call;
        call.name = fn.value("name", std::string {});
        auto args = json::parse(fn.value("arguments", std::string("{}")), nullptr, false);
        if (args.is_object())
        {
            if (auto tool = contract.find_tool(call.name))
            {
                for (const auto& p: tool->parameters)
                    if (args.contains(p.name))
                        call.arguments.emplace_back(
                            p.name, args[p.name].is_string() ? args[p.name].get<std::string>() : args[p.name].dump());
            }
            else
                for (const auto& [k, v]: args.items())
                    call.arguments.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
        }
        out.tool_call = call;
    }
    return out;
}

RawModelOutput RemotePolicy::next_action(const std::string& rendered, const PolicyContext& context) const
{
    const auto& base = _config.api_base;
    auto scheme_end = base.find("://");
    auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = base.find('/', host_start);
    std::string origin = path_start == std::string::npos ? base : base.substr(0, path_start);
    std::string path = (path_start == std::string::npos ? std::string {} : base.substr(path_start)) + "/chat/completions";

    httplib::Client client(origin);
    client.set_connection_timeout(_config.timeout_seconds);
    client.set_read_timeout(_config.timeout_seconds);
    httplib::Headers headers;
    if (!_config.api_key.empty())
        headers.emplace("Authorization", "Bearer " + _config.api_key);
    auto res = client.Post(path, headers, request_body(rendered, context.task.environment_id), "application/json");
    if (!res)
        throw RemoteUnavailable("request to " + origin + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw RemoteUnavailable("endpoint answered HTTP " + std::to_string(res->status));
    return parse_response(res->body, base_contract_for(context.task.environment_id));
}

std::unique_ptr<Policy> make_policy(const std::string& spec_json)
{
    auto j = json::parse(spec_json, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("policy spec must be a JSON object");
    auto kind = j.value("kind", std::string("scripted"));
    if (kind == "scripted")
    {
        ScriptedConfig c;
        c.behavior = parse_behavior(j.value("behavior", std::string("Oracle")));
        c.fault_rate = j.value("fault_rate", 1.0);
        c.hint_compliance = j.value("hint_compliance", true);
        c.commit_observed = j.value("commit_observed", false);
        return std::make_unique<ScriptedPolicy>(c);
    }
    if (kind == "remote")
    {
        auto c = RemoteConfig::from_environment();
        if (j.contains("model"))
            c.model = j["model"].get<std::string>();
        if (j.contains("max_tokens"))
            c.max_tokens = j["max_tokens"].get<int>();
        return std::make_unique<RemotePolicy>(c);
    }
    throw ConfigError("unknown policy kind '" + kind + "'");
}

} // namespace harness
