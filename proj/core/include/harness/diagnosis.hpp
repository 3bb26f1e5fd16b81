// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/runtime.hpp>

#include <map>

namespace harness
{

enum class FailureCategory
{
    ActionRealization,
    ContractMismatch,
    TrajectoryDegeneration,
    ResidualReasoning
};

struct DiagnosisReport
{
    std::string episode_id;
    std::string environment_id;
    FailureCategory category = FailureCategory::ResidualReasoning;
    std::string triggering_rule_id;
    std::vector<int> evidence_steps;
    std::string notes;

    bool operator==(const DiagnosisReport&) const = default;
};

struct DiagnosisConfig
{
    int repeat_k = 3;
    int stall_k = 3;
    int oscillation_window = 6;
};

/// Priority protocol: action realization, then contract mismatch, then trajectory
/// degeneration, else residual reasoning. Throws NotAFailure for successful episodes.
DiagnosisReport classify(const EpisodeRecord& record, const DiagnosisConfig& config = {});

using Histogram = std::map<std::string, std::map<FailureCategory, int>>;

/// Per-environment counts; every category is present (zero when unused).
Histogram histogram(const std::vector<DiagnosisReport>& reports);

std::string to_string(FailureCategory c);
FailureCategory parse_failure_category(std::string_view s);

/// The intervention layer that addresses a category.
Layer layer_for(FailureCategory c);

std::string render_histogram(const Histogram& h);

} // namespace harness
