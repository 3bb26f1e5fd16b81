// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/minidb.hpp>
#include <harness/text.hpp>

#include <json.hpp>

#include <random>

namespace harness::minidb
{

sql::Database parse_database(const std::string& world_json)
{
    auto j = nlohmann::json::parse(world_json);
    sql::Database db;
    for (const auto& t: j.at("tables"))
    {
        sql::Table table;
        table.name = t.at("name").get<std::string>();
        for (const auto& c: t.at("columns"))
            table.columns.push_back(
                { c.at("name").get<std::string>(), sql::parse_column_type(c.value("type", std::string("TEXT"))) });
        for (const auto& r: t.value("rows", nlohmann::json::array()))
        {
            if (r.size() != table.columns.size())
                throw ConfigError("row width mismatch in table " + table.name);
            std::vector<sql::Value> row;
            for (std::size_t i = 0; i < r.size(); ++i)
            {
                const auto& cell = r[i];
                if (cell.is_null())
                    row.emplace_back(std::monostate {});
                else if (cell.is_number_integer())
                {
                    if (table.columns[i].type == sql::ColumnType::Real)
                        row.emplace_back(cell.get<double>());
                    else
                        row.emplace_back(cell.get<std::int64_t>());
                }
                else if (cell.is_number())
                    row.emplace_back(cell.get<double>());
                else
                    row.emplace_back(cell.get<std::string>());
            }
            table.rows.push_back(std::move(row));
        }
        db.tables.push_back(std::move(table));
    }
    return db;
}

SchemaMap schema_of(const sql::Database& db)
{
    auto display = [](const std::string& id) { return sql::needs_quoting(id) ? "`" + id + "`" : id; };
    SchemaMap map;
    for (const auto& t: db.tables)
    {
        SchemaMap::Entry e { t.name, display(t.name), {} };
        for (const auto& c: t.columns)
            e.columns.emplace_back(c.name, display(c.name));
        map.tables.push_back(std::move(e));
    }
    return map;
}

MiniDB::MiniDB(State state, std::map<std::string, std::string> success_spec)
    : _state(std::move(state)), _spec(std::move(success_spec))
{
}

MiniDB MiniDB::from_world(const std::string& world_json, const TaskSpec& task, std::uint64_t shuffle_seed)
{
    State s;
    s.db = parse_database(world_json);
    if (shuffle_seed != 0)
    {
        std::mt19937_64 rng(shuffle_seed);
        for (auto& t: s.db.tables)
            for (std::size_t i = t.rows.size(); i > 1; --i)
                std::swap(t.rows[i - 1], t.rows[static_cast<std::size_t>(rng() % i)]);
    }
    auto it = task.success_spec.find("task_kind");
    if (it == task.success_spec.end())
        throw UnknownTask("minidb task " + task.task_id + " lacks task_kind");
    s.task_kind = it->second;
    if (s.task_kind == "mutation")
    {
        if (!task.success_spec.count("verify_query") || !task.success_spec.count("verify_answer"))
            throw UnknownTask("minidb mutation task " + task.task_id + " lacks verification");
    }
    else if (!task.success_spec.count("answer"))
        throw UnknownTask("minidb task " + task.task_id + " lacks an answer");
    return MiniDB(std::move(s), task.success_spec);
}

const std::string& MiniDB::environment_id() const
{
    static const std::string id = "minidb";
    return id;
}

const Contract& MiniDB::base_contract() const
{
    static const Contract contract = minidb_contract();
    return contract;
}

std::string MiniDB::initial_observation() const
{
    std::string out = "Available tools: " + tool_syntax_summary(base_contract()) + "\nThe database contains the following tables:";
    for (const auto& e: schema_of(_state.db).tables)
    {
        std::vector<std::string> cols;
        for (const auto& [name, shown]: e.columns)
            cols.push_back(shown);
        out += "\n- " + e.table_display + "(" + text::join(cols, ", ") + ")";
    }
    return out;
}

std::string MiniDB::step(const Action& action)
{
    if (_state.committed_answer)
        return "Error: the answer has already been committed.";
    if (!action.call)
    {
        _state.last_error = std::string(kNoToolCall);
        return _state.last_error;
    }
    const auto& call = *action.call;
    auto fail = [&](std::string msg) {
        _state.last_error = msg;
        return msg;
    };
    if (call.name == "execute_query")
    {
        auto q = call.argument("query");
        if (!q)
            return fail("Error: missing required argument 'query' for execute_query.");
        auto result = sql::execute(_state.db, *q);
        ++_state.query_count;
        auto rendered = sql::render_result(result);
        if (!result.ok)
        {
            _state.last_result.clear();
            _state.last_result_scalar = false;
            return fail(rendered);
        }
        _state.last_error.clear();
        if (result.is_mutation())
        {
            _state.mutation_succeeded = true;
            _state.last_result.clear();
            _state.last_result_scalar = false;
        }
        else
        {
            _state.last_result = rendered;
            _state.last_result_scalar = result.rows.size() == 1 && result.rows.front().size() == 1;
        }
        return rendered;
    }
    if (call.name == "commit_final_answer")
    {
        auto a = call.argument("answer");
        if (!a)
            return fail("Error: missing required argument 'answer' for commit_final_answer.");
        _state.committed_answer = *a;
        _state.last_error.clear();
        return "Answer committed: " + *a;
    }
    return fail("Error: unknown tool '" + call.name + "'. Available tools: execute_query, commit_final_answer.");
}

bool MiniDB::is_end() const
{
    return _state.committed_answer.has_value();
}

double MiniDB::evaluate() const
{
    if (!_state.committed_answer)
        return 0.0;
    if (_state.task_kind != "mutation")
        return normalize_answer(*_state.committed_answer) == normalize_answer(_spec.at("answer")) ? 1.0 : 0.0;
    if (!_state.mutation_succeeded)
        return 0.0;
    auto check = sql::query(_state.db, _spec.at("verify_query"));
    if (!check.ok)
        return 0.0;
    return normalize_answer(sql::render_result(check)) == normalize_answer(_spec.at("verify_answer")) ? 1.0 : 0.0;
}

EnvironmentEvidence MiniDB::evidence() const
{
    EnvironmentEvidence ev;
    ev.schema = schema_of(_state.db);
    ev.no_op_phrases = { "Error:" };
    ev.progress_facts["task_kind"] = _state.task_kind;
    ev.progress_facts["mutation_succeeded"] = _state.mutation_succeeded ? "true" : "false";
    ev.progress_facts["committed"] = _state.committed_answer ? "true" : "false";
    ev.progress_facts["last_result"] = _state.last_result;
    ev.progress_facts["last_result_scalar"] = _state.last_result_scalar ? "true" : "false";
    ev.progress_facts["query_count"] = std::to_string(_state.query_count);
    ev.progress_facts["last_error"] = _state.last_error;
    return ev;
}

std::unique_ptr<Environment> MiniDB::clone() const
{
    return std::make_unique<MiniDB>(*this);
}

std::string MiniDB::state_fingerprint() const
{
    std::string out;
    for (const auto& t: _state.db.tables)
    {
        out += t.name + "{";
        for (const auto& row: t.rows)
        {
            for (const auto& v: row)
                out += sql::render_value(v, true) + ",";
            out += ";";
        }
        out += "}";
    }
    out += "|m" + std::to_string(_state.mutation_succeeded) + "|c" + (_state.committed_answer ? *_state.committed_answer : "<none>");
    out += "|r" + _state.last_result + "|q" + std::to_string(_state.query_count) + "|e" + _state.last_error;
    return out;
}

bool MiniDB::is_error_or_noop(std::string_view observation) const
{
    return observation.substr(0, 6) == "Error:";
}

} // namespace harness::minidb
