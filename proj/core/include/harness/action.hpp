// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace harness
{

/// Ordered (name, value) argument list. Order follows the tool's parameter declaration.
using ArgList = std::vector<std::pair<std::string, std::string>>;

struct ToolCall
{
    std::string name;
    ArgList arguments;

    [[nodiscard]] const std::string* argument(std::string_view key) const;

    bool operator==(const ToolCall&) const = default;
};

/// What a policy emitted for one turn. At least one of text / tool_call is meaningful.
struct RawModelOutput
{
    std::string text;
    std::optional<ToolCall> tool_call;

    bool operator==(const RawModelOutput&) const = default;
};

/// An action handed to the environment. Plain-text environments read `text`;
/// tool environments read `call` and report an error when it is absent.
struct Action
{
    std::string text;
    std::optional<ToolCall> call;

    bool operator==(const Action&) const = default;
};

/// Renders `name("a", "b")` with `"` and `\` escaped.
std::string format_call(const ToolCall& call);

/// Parses exactly the syntax produced by format_call (whole string). Argument names are
/// left empty; callers bind positions to parameter names.
std::optional<std::pair<std::string, std::vector<std::string>>> parse_call_syntax(std::string_view text);

/// Log form of a raw output: the text, followed by a `<tool_call>{json}</tool_call>` marker
/// when a structured call was attached.
std::string serialize_raw_output(const RawModelOutput& raw);
RawModelOutput deserialize_raw_output(std::string_view logged);

} // namespace harness
