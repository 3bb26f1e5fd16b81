// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/action.hpp>
#include <harness/contract.hpp>
#include <harness/task.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace harness
{

/// table -> ordered (column name, display name); display names are backticked when required.
struct SchemaMap
{
    struct Entry
    {
        std::string table;
        std::string table_display;
        std::vector<std::pair<std::string, std::string>> columns;

        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> tables;

    /// Identifiers (tables and columns) that need backtick quoting.
    [[nodiscard]] std::vector<std::string> flagged_identifiers() const;

    bool operator==(const SchemaMap&) const = default;
};

/// Deterministic facts the harness may consult; derivable from state alone.
struct EnvironmentEvidence
{
    std::vector<std::string> admissible_actions;
    std::vector<std::string> no_op_phrases;
    std::map<std::string, std::string> progress_facts;
    SchemaMap schema;

    [[nodiscard]] bool is_admissible(std::string_view action) const;
    [[nodiscard]] std::string fact(const std::string& key) const;
};

class Environment
{
  public:
    virtual ~Environment() = default;

    [[nodiscard]] virtual const std::string& environment_id() const = 0;
    [[nodiscard]] virtual const Contract& base_contract() const = 0;
    [[nodiscard]] virtual std::string initial_observation() const = 0;

    /// Applies one action. Problems are reported as observation text, never thrown.
    virtual std::string step(const Action& action) = 0;

    [[nodiscard]] virtual bool is_end() const = 0;
    /// Reward in [0, 1], binary for the bundled environments.
    [[nodiscard]] virtual double evaluate() const = 0;
    [[nodiscard]] virtual EnvironmentEvidence evidence() const = 0;
    [[nodiscard]] virtual std::unique_ptr<Environment> clone() const = 0;

    /// Canonical serialization of the full state; equal strings iff equal states.
    [[nodiscard]] virtual std::string state_fingerprint() const = 0;

    /// True when `observation` denotes an error or a no-op rather than an effect.
    [[nodiscard]] virtual bool is_error_or_noop(std::string_view observation) const = 0;
};

/// World definitions for both environments, keyed by world id.
class WorldCatalog
{
  public:
    WorldCatalog() = default;

    /// Loads `<root>/gridhouse/worlds/*.json` and `<root>/minidb/worlds/*.json`.
    static WorldCatalog load(const std::filesystem::path& root);

    void add_world(const std::string& environment_id, const std::string& world_id, std::string json_text);
    [[nodiscard]] const std::string& world_json(const std::string& environment_id, const std::string& world_id) const;
    [[nodiscard]] bool has_world(const std::string& environment_id, const std::string& world_id) const;

  private:
    std::map<std::pair<std::string, std::string>, std::string> _worlds;
};

/// E.Init: builds the environment for a task; throws UnknownTask for unknown worlds or environments.
std::unique_ptr<Environment> make_environment(const TaskSpec& task, std::uint64_t seed, const WorldCatalog& worlds);

/// The bundled environments' base contracts.
Contract gridhouse_contract();
Contract minidb_contract();
Contract base_contract_for(const std::string& environment_id);

inline constexpr std::string_view kNothingHappens = "Nothing happens.";

/// Answer normalization: trim, collapse whitespace, canonical numeric form.
std::string normalize_answer(std::string_view answer);

} // namespace harness
