// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/environment.hpp>
#include <harness/sql.hpp>

#include <optional>

namespace harness::minidb
{

struct State
{
    sql::Database db;
    std::string task_kind; // "select", "count", "aggregate", "mutation"
    bool mutation_succeeded = false;
    std::optional<std::string> committed_answer;
    std::string last_result;
    bool last_result_scalar = false;
    std::size_t query_count = 0;
    std::string last_error;

    bool operator==(const State&) const = default;
};

/// Parses `{"tables": [{"name", "columns": [{"name", "type"}], "rows": [[...]]}]}`.
sql::Database parse_database(const std::string& world_json);

SchemaMap schema_of(const sql::Database& db);

class MiniDB final: public Environment
{
  public:
    MiniDB(State state, std::map<std::string, std::string> success_spec);

    /// Row order is permuted when `shuffle_seed` is non-zero; query results are unaffected
    /// except for unordered listings.
    static MiniDB from_world(const std::string& world_json, const TaskSpec& task, std::uint64_t shuffle_seed = 0);

    [[nodiscard]] const std::string& environment_id() const override;
    [[nodiscard]] const Contract& base_contract() const override;
    [[nodiscard]] std::string initial_observation() const override;
    std::string step(const Action& action) override;
    [[nodiscard]] bool is_end() const override;
    [[nodiscard]] double evaluate() const override;
    [[nodiscard]] EnvironmentEvidence evidence() const override;
    [[nodiscard]] std::unique_ptr<Environment> clone() const override;
    [[nodiscard]] std::string state_fingerprint() const override;
    [[nodiscard]] bool is_error_or_noop(std::string_view observation) const override;

    [[nodiscard]] const State& state() const { return _state; }

  private:
    State _state;
    std::map<std::string, std::string> _spec;
};

inline constexpr std::string_view kNoToolCall =
    "Error: no executable tool call found in the response. Available tools: execute_query, commit_final_answer.";

} // namespace harness::minidb
