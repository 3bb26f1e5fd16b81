// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/action.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace harness
{

struct ToolParam
{
    std::string name;
    std::string type = "string";
    bool required = true;

    bool operator==(const ToolParam&) const = default;
};

struct ToolSpec
{
    std::string name;
    std::string description;
    std::vector<ToolParam> parameters;
    std::string admissibility_note;
    /// Call syntax shown to the model, with `{param}` placeholders.
    std::string syntax;

    bool operator==(const ToolSpec&) const = default;
};

/// The model-visible interaction protocol of one environment.
struct Contract
{
    std::string environment_id;
    std::vector<ToolSpec> tools;
    std::vector<std::string> policy_notes;
    std::vector<std::string> pitfalls;
    std::string answer_format;
    /// Tool that receives fenced code blocks during rescue.
    std::string command_tool;
    /// When set, a bare line of text is itself an action (text-command environments).
    bool plain_text_commands = false;

    [[nodiscard]] const ToolSpec* find_tool(std::string_view name) const;
    /// Checks the invariants: unique tool names, unique parameter names, required before optional.
    void validate() const;

    bool operator==(const Contract&) const = default;
};

struct ContractDelta
{
    std::string delta_id;
    std::string environment_id;
    std::map<std::string, std::string> tool_amendments;
    std::vector<std::string> added_policy_notes;
    std::vector<std::string> pitfalls;

    bool operator==(const ContractDelta&) const = default;
};

inline constexpr std::string_view kAmendmentSeparator = "\nNOTE: ";

/// C' = C (+) delta. Appends only; reapplying a delta is a no-op.
/// Throws UnknownTool when an amendment names a tool missing from the contract.
Contract apply_delta(const Contract& contract, const ContractDelta& delta);

/// Applies deltas left to right.
Contract apply_deltas(const Contract& contract, const std::vector<ContractDelta>& deltas);

std::string render_contract(const Contract& contract);

/// Renders a tool's syntax for `call`'s arguments, e.g. `take mug 1 from shelf 1`.
std::string render_syntax(const ToolSpec& tool, const ArgList& args);

/// Parses a plain-text command against the tools' syntax templates.
/// Returns the matching call (first tool in registration order) or nullopt.
std::optional<ToolCall> parse_command(const Contract& contract, std::string_view text);

/// `execute_query("{query}") | commit_final_answer("{answer}")` style summary of all tools.
std::string tool_syntax_summary(const Contract& contract);

} // namespace harness
