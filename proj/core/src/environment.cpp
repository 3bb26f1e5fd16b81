// SPDX-License-Identifier: Apache-2.0
#include <harness/environment.hpp>
#include <harness/errors.hpp>
#include <harness/gridhouse.hpp>
#include <harness/minidb.hpp>
#include <harness/sql.hpp>
#include <harness/text.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace harness
{

std::vector<std::string> SchemaMap::flagged_identifiers() const
{
    std::vector<std::string> out;
    for (const auto& t: tables)
    {
        if (t.table != t.table_display)
            out.push_back(t.table);
        for (const auto& [name, shown]: t.columns)
            if (name != shown)
                out.push_back(name);
    }
    return out;
}

bool EnvironmentEvidence::is_admissible(std::string_view action) const
{
    auto a = text::collapse_whitespace(action);
    return std::find(admissible_actions.begin(), admissible_actions.end(), a) != admissible_actions.end();
}

std::string EnvironmentEvidence::fact(const std::string& key) const
{
    auto it = progress_facts.find(key);
    return it == progress_facts.end() ? std::string {} : it->second;
}

namespace
{
std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
} // namespace

WorldCatalog WorldCatalog::load(const std::filesystem::path& root)
{
    WorldCatalog catalog;
    for (const char* env: { "gridhouse", "minidb" })
    {
        auto dir = root / env / "worlds";
        if (!std::filesystem::is_directory(dir))
            continue;
        std::vector<std::filesystem::path> files;
        for (const auto& entry: std::filesystem::directory_iterator(dir))
            if (entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f: files)
            catalog.add_world(env, f.stem().string(), read_file(f));
    }
    return catalog;
}

void WorldCatalog::add_world(const std::string& environment_id, const std::string& world_id, std::string json_text)
{
    _worlds[{ environment_id, world_id }] = std::move(json_text);
}

const std::string& WorldCatalog::world_json(const std::string& environment_id, const std::string& world_id) const
{
    auto it = _worlds.find({ environment_id, world_id });
    if (it == _worlds.end())
        throw UnknownTask("no world '" + world_id + "' for environment '" + environment_id + "'");
    return it->second;
}

bool WorldCatalog::has_world(const std::string& environment_id, const std::string& world_id) const
{
    return _worlds.count({ environment_id, world_id }) > 0;
}

std::unique_ptr<Environment> make_environment(const TaskSpec& task, std::uint64_t seed, const WorldCatalog& worlds)
{
    const auto& json = worlds.world_json(task.environment_id, task.world_id);
    std::uint64_t shuffle = task.variant_seed == 0 ? 0 : text::mix_seed(task.variant_seed, seed);
    if (task.environment_id == "gridhouse")
        return std::make_unique<gridhouse::GridHouse>(gridhouse::GridHouse::from_world(json, task, shuffle));
    if (task.environment_id == "minidb")
        return std::make_unique<minidb::MiniDB>(minidb::MiniDB::from_world(json, task, shuffle));
    throw UnknownTask("unknown environment '" + task.environment_id + "'");
}

Contract gridhouse_contract()
{
    auto tool = [](std::string name, std::string description, std::vector<std::string> params, std::string syntax) {
        ToolSpec t;
        t.name = std::move(name);
        t.description = std::move(description);
        for (auto& p: params)
            t.parameters.push_back({ std::move(p), "string", true });
        t.syntax = std::move(syntax);
        return t;
    };
    Contract c;
    c.environment_id = "gridhouse";
    c.tools = {
        tool("go", "Walk to a receptacle in the current room, or to another room.", { "target" }, "go to {target}"),
        tool("open", "Open a closed receptacle you are standing at.", { "receptacle" }, "open {receptacle}"),
        tool("close", "Close an open receptacle you are standing at.", { "receptacle" }, "close {receptacle}"),
        tool("take", "Pick up an object from the receptacle you are standing at.", { "object", "receptacle" },
             "take {object} from {receptacle}"),
        tool("put", "Place the object you carry into the receptacle you are standing at.", { "object", "receptacle" },
             "put {object} in {receptacle}"),
        tool("clean", "Clean the carried object with a sinkbasin.", { "object", "receptacle" },
             "clean {object} with {receptacle}"),
        tool("heat", "Heat the carried object with a microwave.", { "object", "receptacle" },
             "heat {object} with {receptacle}"),
        tool("cool", "Cool the carried object with a fridge.", { "object", "receptacle" },
             "cool {object} with {receptacle}"),
        tool("examine", "Look at the receptacle you are standing at.", { "receptacle" }, "examine {receptacle}"),
        tool("look", "Describe your surroundings.", {}, "look"),
        tool("inventory", "List what you carry.", {}, "inventory"),
    };
    c.policy_notes = { "You can carry one object at a time." };
    c.answer_format = "Reply with exactly one command per turn, for example: go to shelf 1";
    c.plain_text_commands = true;
    return c;
}

Contract minidb_contract()
{
    Contract c;
    c.environment_id = "minidb";
    ToolSpec q;
    q.name = "execute_query";
    q.description = "Run one SQL statement against the database and return its result.";
    q.parameters = { { "query", "string", true } };
    q.syntax = "execute_query(\"{query}\")";
    ToolSpec a;
    a.name = "commit_final_answer";
    a.description = "Submit the final answer and end the task.";
    a.parameters = { { "answer", "string", true } };
    a.syntax = "commit_final_answer(\"{answer}\")";
    c.tools = { q, a };
    c.policy_notes = { "Use one tool call per turn." };
    c.answer_format = "Respond with a single tool call, for example: execute_query(\"SELECT * FROM t\")";
    c.command_tool = "execute_query";
    return c;
}

Contract base_contract_for(const std::string& environment_id)
{
    if (environment_id == "gridhouse")
        return gridhouse_contract();
    if (environment_id == "minidb")
        return minidb_contract();
    throw UnknownTask("unknown environment '" + environment_id + "'");
}

std::string normalize_answer(std::string_view answer)
{
    auto s = text::collapse_whitespace(answer);
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') || (s.front() == '"' && s.back() == '"')))
        s = text::collapse_whitespace(std::string_view(s).substr(1, s.size() - 2));
    if (auto n = text::canonical_number(s))
        return *n;
    return s;
}

} // namespace harness
