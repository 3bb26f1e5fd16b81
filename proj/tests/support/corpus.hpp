// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/diagnosis.hpp>

namespace harness::testkit
{

/// A failed episode with a category assigned by hand from the priority protocol.
struct LabeledEpisode
{
    std::string name;
    EpisodeRecord record;
    FailureCategory label;
};

std::vector<LabeledEpisode> diagnosis_corpus();

/// Step builders for hand-written trajectories.
StepRecord command_step(const std::string& command, const std::string& observation);
StepRecord prose_step(const std::string& prose, const std::string& observation);
StepRecord call_step(const std::string& tool, const ArgList& args, const std::string& observation);

/// Wraps steps into a record; indices and remaining budgets follow b_t = B - t - 1.
EpisodeRecord make_record(const std::string& id, const std::string& environment_id, const std::string& instruction,
                          std::vector<StepRecord> steps, Outcome outcome, int budget);

} // namespace harness::testkit
