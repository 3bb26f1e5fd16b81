// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/contract.hpp>
#include <harness/realization.hpp>
#include <harness/regulation.hpp>
#include <harness/skills.hpp>

#include <filesystem>
#include <optional>
#include <variant>

namespace harness
{

enum class Layer
{
    Contract,
    Skill,
    ActionGate,
    Regulation
};

/// Enables regulation detectors for one environment and overrides their thresholds.
struct DetectorConfig
{
    std::string environment_id;
    /// Detector names: budget, repetition, stall, oscillation.
    std::vector<std::string> enable;
    std::map<std::string, int> thresholds;
    std::optional<bool> force_directives;

    bool operator==(const DetectorConfig&) const = default;
};

using InterventionPayload = std::variant<ContractDelta, Skill, GateRule, DetectorConfig>;

struct Intervention
{
    std::string intervention_id;
    Layer layer = Layer::Contract;
    InterventionPayload payload;
    std::string provenance;

    [[nodiscard]] const std::string& environment_id() const;
    /// Throws ConfigError when the payload does not belong to the layer.
    void validate() const;

    bool operator==(const Intervention&) const = default;
};

class InterventionSet
{
  public:
    InterventionSet() = default;
    InterventionSet(std::string set_id, int version, std::vector<Intervention> interventions, bool frozen = false);

    [[nodiscard]] const std::string& set_id() const { return _set_id; }
    [[nodiscard]] int version() const { return _version; }
    [[nodiscard]] const std::vector<Intervention>& interventions() const { return _interventions; }
    [[nodiscard]] bool frozen() const { return _frozen; }
    [[nodiscard]] bool contains(const std::string& intervention_id) const;

    /// Copy with `intervention` appended and the version bumped. Throws FrozenSetError.
    [[nodiscard]] InterventionSet with(const Intervention& intervention) const;
    /// Frozen copy; freezing a frozen set returns it unchanged.
    [[nodiscard]] InterventionSet freeze() const;
    /// Throws FrozenSetError when frozen.
    void add(const Intervention& intervention);

    bool operator==(const InterventionSet&) const = default;

  private:
    std::string _set_id = "empty";
    int _version = 0;
    std::vector<Intervention> _interventions;
    bool _frozen = false;
};

struct LayerToggles
{
    bool contract = true;
    bool skill = true;
    bool action = true;
    bool regulation = true;

    bool operator==(const LayerToggles&) const = default;
};

/// The layers of an intervention set as seen by one environment.
struct Harness
{
    std::vector<ContractDelta> deltas;
    SkillLibrary skills;
    std::size_t skill_k = 1;
    std::vector<GateRule> rules;
    RealizationConfig realization;
    /// Unset when no detector is enabled for the environment.
    std::optional<RegulationConfig> regulation;
};

Harness compile_harness(const InterventionSet& set, const std::string& environment_id, const LayerToggles& toggles = {});

std::string to_string(Layer layer);
Layer parse_layer(std::string_view s);

/// Canonical JSON text; identical sets serialize to identical bytes.
std::string serialize_intervention(const Intervention& intervention);
Intervention parse_intervention(std::string_view json_text);
std::string serialize_set(const InterventionSet& set);
InterventionSet parse_set(std::string_view json_text);

/// Loads every `*.json` intervention document of a directory, sorted by filename.
std::vector<Intervention> load_registry(const std::filesystem::path& dir);
InterventionSet load_set(const std::filesystem::path& file);
void save_set(const InterventionSet& set, const std::filesystem::path& file);

} // namespace harness
