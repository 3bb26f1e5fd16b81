// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace harness
{

/// Values a condition can read. Scalar fields are strings ("true"/"false" for flags);
/// set fields are string lists used on the right of `in`.
struct Bindings
{
    std::map<std::string, std::string> scalars;
    std::map<std::string, std::vector<std::string>> sets;

    [[nodiscard]] std::string scalar(const std::string& name) const;
};

/// Trigger expressions over Bindings:
///
///   expr    := term ("or" term)*
///   term    := factor ("and" factor)*
///   factor  := "not" factor | "(" expr ")" | field [op operand]
///   op      := "==" | "!=" | "in" | "not in" | "matches" | "contains"
///   operand := 'literal' | "literal" | [lit, ...] | set-field
///
/// A bare field is true when its value is "true". Fields: raw, tool, action, parsed,
/// known_tool, missing_required, has_admissible, blocked_before, arg.<name>, fact.<name>;
/// set fields: admissible, tools. `matches` is a case-insensitive regex search and
/// `contains` a case-insensitive substring test.
class Condition
{
  public:
    struct Node;

    Condition();
    /// Throws ConditionSyntaxError.
    static Condition parse(const std::string& source);

    [[nodiscard]] bool evaluate(const Bindings& bindings) const;
    [[nodiscard]] const std::string& source() const { return _source; }

    bool operator==(const Condition& other) const { return _source == other._source; }

  private:
    std::string _source;
    std::shared_ptr<const Node> _root;
};

} // namespace harness
