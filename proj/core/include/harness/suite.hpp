// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/intervention.hpp>
#include <harness/task.hpp>

#include <filesystem>
#include <optional>

namespace harness
{

enum class Split
{
    Train,
    Test
};

std::string to_string(Split s);
Split parse_split(std::string_view s);

/// A task list loaded from a manifest document. Every manifest carries its split.
struct TaskManifest
{
    std::string suite_id;
    std::string environment_id;
    Split split = Split::Train;
    std::vector<TaskSpec> tasks;
};

/// Throws ConfigError on malformed documents, duplicate task ids or empty instructions.
TaskManifest parse_manifest(std::string_view json_text);
TaskManifest load_manifest(const std::filesystem::path& file);

/// Step budget used when a config leaves it unset: gridhouse 50, minidb 15.
int default_budget(const std::string& environment_id);

struct SuiteConfig
{
    std::string environment_id;
    std::filesystem::path manifest;
    Split split = Split::Train;
    /// JSON policy spec, see make_policy.
    std::string policy = R"({"kind":"scripted","behavior":"Oracle"})";
    /// Intervention set document, or empty for "none".
    std::optional<std::filesystem::path> intervention_set;
    int budget = 0;
    int runs = 3;
    std::uint64_t seed = 0;
    LayerToggles toggles;
    unsigned workers = 1;
    std::filesystem::path worlds;
    std::filesystem::path log = "episodes.jsonl";
    /// Held-out manifest whose ids evolution must never see.
    std::optional<std::filesystem::path> test_manifest;
    /// Where evolve writes the frozen set.
    std::filesystem::path output = "evolved_set.json";

    [[nodiscard]] int effective_budget() const { return budget > 0 ? budget : default_budget(environment_id); }
};

/// Parses a YAML config. Relative paths resolve against `base_dir`.
SuiteConfig parse_suite_config(std::string_view yaml_text, const std::filesystem::path& base_dir);
SuiteConfig load_suite_config(const std::filesystem::path& file);

/// Applies `--disable-layer` names (contract, skill, action, regulation).
void disable_layer(SuiteConfig& config, std::string_view layer);

/// Everything a run needs, checked before the first episode.
struct ResolvedSuite
{
    SuiteConfig config;
    TaskManifest manifest;
    InterventionSet set;
};

/// Loads the manifest and set and checks the config invariants: the manifest split and
/// environment match the config, and a test split only accepts frozen sets.
ResolvedSuite resolve(const SuiteConfig& config);

} // namespace harness
