// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/condition.hpp>
#include <harness/environment.hpp>
#include <harness/trajectory.hpp>

#include <map>
#include <optional>
#include <variant>

namespace harness
{

enum class Rewrite
{
    ToolCallRescue,
    FuzzyAdmissible,
    BacktickRepair,
    NullToZero
};

struct BlockEffect
{
    /// Placeholders: {action}, {tool}, {tools}, {raw}, {arg.NAME}, {fact.NAME}.
    std::string message_template;
    /// Append a "Suggested action: ..." line when one is recoverable from the raw text.
    bool suggest = false;

    bool operator==(const BlockEffect&) const = default;
};

struct CanonicalizeEffect
{
    Rewrite rewrite = Rewrite::ToolCallRescue;

    bool operator==(const CanonicalizeEffect&) const = default;
};

struct GateRule
{
    std::string rule_id;
    std::string environment_id;
    Condition trigger;
    std::variant<BlockEffect, CanonicalizeEffect> effect;

    bool operator==(const GateRule&) const = default;
};

struct RealizationConfig
{
    double similarity_threshold = 0.85;
    int escalation_threshold = 2;
    std::map<std::string, std::string> verb_aliases { { "goto", "go" }, { "grab", "take" }, { "place", "put" } };
};

inline constexpr std::string_view kSuggestedActionPrefix = "Suggested action: ";

/// Tries JSON, keyword, fenced, then XML-like forms; returns the first parse naming a
/// contract tool with every required argument present.
std::optional<std::pair<ToolCall, RescuePath>> rescue_tool_call(std::string_view text, const Contract& contract);

/// Unique admissible action within the similarity threshold that shares the input's
/// leading verb (after aliasing).
std::optional<std::string> canonicalize(std::string_view action, const std::vector<std::string>& admissible,
                                        const RealizationConfig& config = {});

/// Backtick-quotes flagged identifiers outside string literals.
std::string backtick_repair(std::string_view query, const SchemaMap& schema);

/// The action a model would have executed with no realization layer at all.
Action passthrough_action(const RawModelOutput& raw, const Contract& contract);

/// Recovers an executable action from prose for block messages, or nullopt.
std::optional<std::string> suggest_action(std::string_view raw_text, const Contract& contract,
                                          const EnvironmentEvidence& evidence);

/// z_t = RealizeAction(a_t, tau_t, s_t). Rewrites run first (rescue, fuzzy match, backtick
/// repair, null-to-zero, each in rule_id order), then Block rules in rule_id order.
/// The repeat-block counter is derived from the trajectory, keeping this a pure function.
RealizationDecision realize(const RawModelOutput& raw, const Trajectory& trajectory, const Contract& contract,
                            const EnvironmentEvidence& evidence, const std::vector<GateRule>& rules,
                            const RealizationConfig& config = {});

/// Number of earlier blocked steps that attempted `attempted`.
int prior_block_count(const Trajectory& trajectory, std::string_view attempted);

std::string to_string(Rewrite rewrite);
Rewrite parse_rewrite(std::string_view s);

} // namespace harness
