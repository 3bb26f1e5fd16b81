// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/environment.hpp>
#include <harness/trajectory.hpp>

#include <cstdint>
#include <deque>
#include <set>

namespace harness
{

struct RegulationConfig
{
    int repeat_k = 3;
    int stall_k = 3;
    int oscillation_window = 6;
    int budget_warn = 2;
    bool budget = true;
    bool repetition = true;
    bool stall = true;
    bool oscillation = true;
    /// Execute a budget Directive's action when the model's next action is not task-critical.
    bool force_directives = true;

    bool operator==(const RegulationConfig&) const = default;
};

struct ProgressTracker
{
    static constexpr std::size_t kHistory = 12;

    std::deque<std::pair<std::string, std::uint64_t>> history;
    int no_progress_streak = 0;
    /// Consecutive blocked steps or error / no-op observations.
    int noop_streak = 0;
    std::set<std::uint64_t> visited_state_hashes;
    std::set<std::string> visited_locations;
    std::map<std::string, std::string> facts;
};

std::uint64_t observation_hash(std::string_view observation);

/// True when the observation starts with one of the evidence's no-op phrases.
bool is_noop_observation(std::string_view observation, const EnvironmentEvidence& evidence);

void update_tracker(ProgressTracker& tracker, const std::string& action, const std::string& observation,
                    const EnvironmentEvidence& evidence, bool blocked);

/// r_t: first firing detector in priority order budget > repetition > stall > oscillation.
/// A detector that fired on the previous step and still holds is never out-ranked by a
/// lower level. `trajectory` already holds the current step with its observation.
RegulationSignal regulate(const Trajectory& trajectory, const std::string& action, const std::string& observation,
                          int remaining_budget, const ProgressTracker& tracker, const EnvironmentEvidence& evidence,
                          const RegulationConfig& config = {});

/// Goal parsed from an instruction such as "put a clean mug in cabinet": (transform, object type,
/// destination kind). Empty when the instruction does not follow the pattern.
struct InstructionGoal
{
    std::string transform;
    std::string object_type;
    std::string destination_kind;
};
std::optional<InstructionGoal> parse_instruction_goal(std::string_view instruction);

/// Actions whose execution can complete or commit the task (put/take/transforms, commits, mutations).
bool is_task_critical(const Action& action, const std::string& environment_id);

inline constexpr std::string_view kRepetitionMarker = "You have repeated the same action";

} // namespace harness
