// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/trajectory.hpp>

#include <array>

namespace harness
{

namespace
{
template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& names, const char* what)
{
    for (const auto& [e, name]: names)
        if (name == s)
            return e;
    throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string name_of(E e, const std::array<std::pair<E, std::string_view>, N>& names)
{
    for (const auto& [v, name]: names)
        if (v == e)
            return std::string(name);
    return {};
}

constexpr std::array<std::pair<DecisionKind, std::string_view>, 2> kDecisionNames { {
    { DecisionKind::Exec, "EXEC" },
    { DecisionKind::Block, "BLOCK" },
} };

constexpr std::array<std::pair<RescuePath, std::string_view>, 5> kRescueNames { {
    { RescuePath::None, "None" },
    { RescuePath::Json, "Json" },
    { RescuePath::Keyword, "Keyword" },
    { RescuePath::Fenced, "Fenced" },
    { RescuePath::XmlLike, "XmlLike" },
} };

constexpr std::array<std::pair<RegulationLevel, std::string_view>, 4> kLevelNames { {
    { RegulationLevel::Empty, "Empty" },
    { RegulationLevel::SoftRecovery, "SoftRecovery" },
    { RegulationLevel::Warning, "Warning" },
    { RegulationLevel::Directive, "Directive" },
} };

constexpr std::array<std::pair<Outcome, std::string_view>, 4> kOutcomeNames { {
    { Outcome::Success, "Success" },
    { Outcome::Failure, "Failure" },
    { Outcome::BudgetExhausted, "BudgetExhausted" },
    { Outcome::EnvironmentTerminated, "EnvironmentTerminated" },
} };
} // namespace

std::string to_string(DecisionKind kind)
{
    return name_of(kind, kDecisionNames);
}

std::string to_string(RescuePath path)
{
    return name_of(path, kRescueNames);
}

std::string to_string(RegulationLevel level)
{
    return name_of(level, kLevelNames);
}

std::string to_string(Outcome outcome)
{
    return name_of(outcome, kOutcomeNames);
}

DecisionKind parse_decision_kind(std::string_view s)
{
    return parse_enum(s, kDecisionNames, "decision kind");
}

RescuePath parse_rescue_path(std::string_view s)
{
    return parse_enum(s, kRescueNames, "rescue path");
}

RegulationLevel parse_regulation_level(std::string_view s)
{
    return parse_enum(s, kLevelNames, "regulation level");
}

Outcome parse_outcome(std::string_view s)
{
    return parse_enum(s, kOutcomeNames, "outcome");
}

} // namespace harness
