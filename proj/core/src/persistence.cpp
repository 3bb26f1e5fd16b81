// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/persistence.hpp>

#include <json.hpp>

#include <algorithm>
#include <sstream>
#include <tuple>

namespace harness
{

using nlohmann::json;

namespace
{

json call_to_json(const ToolCall& c)
{
    json args = json::array();
    for (const auto& [k, v]: c.arguments)
        args.push_back(json::array({ k, v }));
    return json { { "name", c.name }, { "arguments", args } };
}

ToolCall call_from_json(const json& j)
{
    ToolCall c;
    c.name = j.at("name").get<std::string>();
    for (const auto& a: j.at("arguments"))
        c.arguments.emplace_back(a.at(0).get<std::string>(), a.at(1).get<std::string>());
    return c;
}

json contract_to_json(const Contract& c)
{
    json tools = json::array();
    for (const auto& t: c.tools)
    {
        json params = json::array();
        for (const auto& p: t.parameters)
            params.push_back({ { "name", p.name }, { "type", p.type }, { "required", p.required } });
        tools.push_back({ { "name", t.name },
                          { "description", t.description },
                          { "parameters", params },
                          { "admissibility_note", t.admissibility_note },
                          { "syntax", t.syntax } });
    }
    return json { { "environment_id", c.environment_id }, { "tools", tools },
                  { "policy_notes", c.policy_notes },     { "pitfalls", c.pitfalls },
                  { "answer_format", c.answer_format },   { "command_tool", c.command_tool },
                  { "plain_text_commands", c.plain_text_commands } };
}

Contract contract_from_json(const json& j)
{
    Contract c;
    c.environment_id = j.at("environment_id").get<std::string>();
    for (const auto& t: j.at("tools"))
    {
        ToolSpec s;
        s.name = t.at("name").get<std::string>();
        s.description = t.at("description").get<std::string>();
        for (const auto& p: t.at("parameters"))
            s.parameters.push_back(
                { p.at("name").get<std::string>(), p.at("type").get<std::string>(), p.at("required").get<bool>() });
        s.admissibility_note = t.at("admissibility_note").get<std::string>();
        s.syntax = t.at("syntax").get<std::string>();
        c.tools.push_back(std::move(s));
    }
    c.policy_notes = j.at("policy_notes").get<std::vector<std::string>>();
    c.pitfalls = j.at("pitfalls").get<std::vector<std::string>>();
    c.answer_format = j.at("answer_format").get<std::string>();
    c.command_tool = j.at("command_tool").get<std::string>();
    c.plain_text_commands = j.at("plain_text_commands").get<bool>();
    return c;
}

json task_to_json(const TaskSpec& t)
{
    return json { { "task_id", t.task_id },
                  { "instruction", t.instruction },
                  { "environment_id", t.environment_id },
                  { "world_id", t.world_id },
                  { "variant_seed", t.variant_seed },
                  { "success_spec", t.success_spec },
                  { "reference_solution", t.reference_solution },
                  { "fault_family", t.fault_family } };
}

TaskSpec task_from_json(const json& j)
{
    TaskSpec t;
    t.task_id = j.at("task_id").get<std::string>();
    t.instruction = j.at("instruction").get<std::string>();
    t.environment_id = j.at("environment_id").get<std::string>();
    t.world_id = j.at("world_id").get<std::string>();
    t.variant_seed = j.at("variant_seed").get<std::uint64_t>();
    t.success_spec = j.at("success_spec").get<std::map<std::string, std::string>>();
    t.reference_solution = j.at("reference_solution").get<std::vector<std::string>>();
    t.fault_family = j.at("fault_family").get<std::string>();
    return t;
}

json step_to_json(const StepRecord& s)
{
    const auto& d = s.decision;
    json decision { { "kind", to_string(d.kind) },
                    { "canonicalized", d.canonicalized },
                    { "rescue_path", to_string(d.rescue_path) },
                    { "attempted", d.attempted },
                    { "rule_id", d.rule_id },
                    { "forced", d.forced } };
    if (d.action)
    {
        decision["action"] = d.action->text;
        if (d.action->call)
            decision["action_call"] = call_to_json(*d.action->call);
    }
    if (d.block_message)
        decision["block_message"] = *d.block_message;
    json regulation { { "level", to_string(s.regulation.level) },
                      { "message", s.regulation.message },
                      { "detector_id", s.regulation.detector_id } };
    if (s.regulation.suggested_action)
        regulation["suggested_action"] = *s.regulation.suggested_action;
    return json { { "index", s.index },
                  { "raw_model_output", s.raw_model_output },
                  { "decision", decision },
                  { "observation", s.observation },
                  { "regulation", regulation },
                  { "remaining_budget", s.remaining_budget } };
}

StepRecord step_from_json(const json& j)
{
    StepRecord s;
    s.index = j.at("index").get<int>();
    s.raw_model_output = j.at("raw_model_output").get<std::string>();
    const auto& d = j.at("decision");
    s.decision.kind = parse_decision_kind(d.at("kind").get<std::string>());
    s.decision.canonicalized = d.at("canonicalized").get<bool>();
    s.decision.rescue_path = parse_rescue_path(d.at("rescue_path").get<std::string>());
    s.decision.attempted = d.at("attempted").get<std::string>();
    s.decision.rule_id = d.at("rule_id").get<std::string>();
    s.decision.forced = d.at("forced").get<bool>();
    if (d.contains("action"))
    {
        Action a;
        a.text = d.at("action").get<std::string>();
        if (d.contains("action_call"))
            a.call = call_from_json(d.at("action_call"));
        s.decision.action = a;
    }
    if (d.contains("block_message"))
        s.decision.block_message = d.at("block_message").get<std::string>();
    s.observation = j.at("observation").get<std::string>();
    const auto& r = j.at("regulation");
    s.regulation.level = parse_regulation_level(r.at("level").get<std::string>());
    s.regulation.message = r.at("message").get<std::string>();
    s.regulation.detector_id = r.at("detector_id").get<std::string>();
    if (r.contains("suggested_action"))
        s.regulation.suggested_action = r.at("suggested_action").get<std::string>();
    s.remaining_budget = j.at("remaining_budget").get<int>();
    return s;
}

std::string read_text(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            out.push_back(line);
    return out;
}

} // namespace

std::string serialize_record(const EpisodeRecord& r)
{
    json steps = json::array();
    for (const auto& s: r.trajectory.steps)
        steps.push_back(step_to_json(s));
    json j { { "schema_version", kLogSchemaVersion },
             { "episode_id", r.episode_id },
             { "task_id", r.task_id },
             { "environment_id", r.environment_id },
             { "instruction", r.instruction },
             { "policy_id", r.policy_id },
             { "intervention_set_id", r.intervention_set_id },
             { "intervention_set_version", r.intervention_set_version },
             { "seed", r.seed },
             { "run_index", r.run_index },
             { "budget", r.budget },
             { "outcome", to_string(r.trajectory.outcome) },
             { "reward", r.reward },
             { "wall_steps", r.wall_steps },
             { "fault", r.fault },
             { "contract", contract_to_json(r.trajectory.contract) },
             { "task", task_to_json(r.trajectory.task) },
             { "initial_observation", r.trajectory.initial_observation },
             { "steps", steps } };
    return j.dump();
}

EpisodeRecord parse_record(std::string_view line)
{
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("malformed log line");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw SchemaVersionError("log record lacks schema_version");
    auto version = j["schema_version"].get<int>();
    if (version != kLogSchemaVersion)
        throw SchemaVersionError("unsupported log schema_version " + std::to_string(version) + " (expected " +
                                 std::to_string(kLogSchemaVersion) + ")");
    try
    {
        EpisodeRecord r;
        r.episode_id = j.at("episode_id").get<std::string>();
        r.task_id = j.at("task_id").get<std::string>();
        r.environment_id = j.at("environment_id").get<std::string>();
        r.instruction = j.at("instruction").get<std::string>();
        r.policy_id = j.at("policy_id").get<std::string>();
        r.intervention_set_id = j.at("intervention_set_id").get<std::string>();
        r.intervention_set_version = j.at("intervention_set_version").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.run_index = j.at("run_index").get<int>();
        r.budget = j.at("budget").get<int>();
        r.trajectory.outcome = parse_outcome(j.at("outcome").get<std::string>());
        r.reward = j.at("reward").get<double>();
        r.wall_steps = j.at("wall_steps").get<int>();
        r.fault = j.at("fault").get<std::string>();
        r.trajectory.contract = contract_from_json(j.at("contract"));
        r.trajectory.task = task_from_json(j.at("task"));
        r.trajectory.initial_observation = j.at("initial_observation").get<std::string>();
        for (const auto& s: j.at("steps"))
            r.trajectory.steps.push_back(step_from_json(s));
        return r;
    }
    catch (const json::exception& e)
    {
        throw ConfigError(std::string("malformed log record: ") + e.what());
    }
}

LogWriter::LogWriter(const std::filesystem::path& path): _path(path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    _out.open(path, std::ios::binary | std::ios::trunc);
    if (!_out)
        throw ConfigError("cannot write " + path.string());
}

void LogWriter::append(const EpisodeRecord& record)
{
    auto line = serialize_record(record);
    std::lock_guard lock(_mutex);
    _out << line << '\n';
    _out.flush();
}

std::vector<EpisodeRecord> read_log(const std::filesystem::path& path)
{
    std::vector<EpisodeRecord> out;
    for (const auto& line: lines_of(read_text(path)))
        out.push_back(parse_record(line));
    return out;
}

std::filesystem::path index_path(const std::filesystem::path& log)
{
    return std::filesystem::path(log.string() + ".index");
}

namespace
{
struct IndexRow
{
    std::string task_id;
    int run_index;
    std::uint64_t seed;
    std::string episode_id;
    std::size_t line;
};

std::vector<IndexRow> build_index(const std::vector<std::string>& lines)
{
    std::vector<IndexRow> rows;
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        auto r = parse_record(lines[i]);
        rows.push_back({ r.task_id, r.run_index, r.seed, r.episode_id, i });
    }
    std::sort(rows.begin(), rows.end(), [](const IndexRow& a, const IndexRow& b) {
        return std::tie(a.task_id, a.run_index, a.seed, a.line) < std::tie(b.task_id, b.run_index, b.seed, b.line);
    });
    return rows;
}
} // namespace

void write_index(const std::filesystem::path& log)
{
    auto rows = build_index(lines_of(read_text(log)));
    std::ofstream out(index_path(log), std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError("cannot write " + index_path(log).string());
    for (const auto& r: rows)
        out << r.task_id << '\t' << r.run_index << '\t' << r.seed << '\t' << r.episode_id << '\t' << r.line << '\n';
}

std::string sorted_log(const std::filesystem::path& log)
{
    auto lines = lines_of(read_text(log));
    std::string out;
    for (const auto& r: build_index(lines))
        out += lines[r.line] + "\n";
    return out;
}

std::string serialize_reports(const std::vector<DiagnosisReport>& reports)
{
    json items = json::array();
    for (const auto& r: reports)
        items.push_back({ { "episode_id", r.episode_id },
                          { "environment_id", r.environment_id },
                          { "category", to_string(r.category) },
                          { "triggering_rule_id", r.triggering_rule_id },
                          { "evidence_steps", r.evidence_steps },
                          { "notes", r.notes } });
    json hist = json::object();
    for (const auto& [env, row]: histogram(reports))
        for (const auto& [cat, n]: row)
            hist[env][to_string(cat)] = n;
    json doc { { "failures", reports.size() }, { "reports", items }, { "histogram", hist } };
    if (reports.empty())
        doc["note"] = "no failures";
    return doc.dump(2) + "\n";
}

} // namespace harness
