// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/action.hpp>
#include <harness/contract.hpp>
#include <harness/task.hpp>

#include <optional>
#include <string>
#include <vector>

namespace harness
{

enum class DecisionKind
{
    Exec,
    Block
};

enum class RescuePath
{
    None,
    Json,
    Keyword,
    Fenced,
    XmlLike
};

struct RealizationDecision
{
    DecisionKind kind = DecisionKind::Exec;
    std::optional<Action> action;              // iff Exec
    std::optional<std::string> block_message;  // iff Block
    bool canonicalized = false;
    RescuePath rescue_path = RescuePath::None;
    /// The action string the model attempted after rescue; keys the repeat-block counter.
    std::string attempted;
    /// Rule that blocked or rewrote the action ("" when none did).
    std::string rule_id;
    /// Set when the runtime replaced the model's action with a regulation directive.
    bool forced = false;

    bool operator==(const RealizationDecision&) const = default;
};

enum class RegulationLevel
{
    Empty,
    SoftRecovery,
    Warning,
    Directive
};

struct RegulationSignal
{
    RegulationLevel level = RegulationLevel::Empty;
    std::string message;
    std::optional<std::string> suggested_action;
    std::string detector_id;

    bool operator==(const RegulationSignal&) const = default;
};

struct StepRecord
{
    int index = 0;
    std::string raw_model_output;
    RealizationDecision decision;
    std::string observation;
    RegulationSignal regulation;
    int remaining_budget = 0;

    bool operator==(const StepRecord&) const = default;
};

enum class Outcome
{
    Success,
    Failure,
    BudgetExhausted,
    EnvironmentTerminated
};

struct Trajectory
{
    Contract contract;
    /// The task with its skill-augmented instruction x'.
    TaskSpec task;
    std::string initial_observation;
    std::vector<StepRecord> steps;
    Outcome outcome = Outcome::BudgetExhausted;

    bool operator==(const Trajectory&) const = default;
};

std::string to_string(DecisionKind kind);
std::string to_string(RescuePath path);
std::string to_string(RegulationLevel level);
std::string to_string(Outcome outcome);
DecisionKind parse_decision_kind(std::string_view s);
RescuePath parse_rescue_path(std::string_view s);
RegulationLevel parse_regulation_level(std::string_view s);
Outcome parse_outcome(std::string_view s);

} // namespace harness
