// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/agents.hpp>
#include <harness/intervention.hpp>
#include <harness/trajectory.hpp>

#include <chrono>

namespace harness
{

struct Budget
{
    int total_steps = 0;
    int consumed = 0;

    /// b_t = B - t - 1 for the step about to be taken.
    [[nodiscard]] int remaining() const { return total_steps - consumed - 1; }
};

struct EpisodeRecord
{
    std::string episode_id;
    std::string task_id;
    std::string environment_id;
    /// The task instruction x before skill injection.
    std::string instruction;
    std::string policy_id;
    std::string intervention_set_id;
    int intervention_set_version = 0;
    std::uint64_t seed = 0;
    int run_index = 0;
    int budget = 0;
    Trajectory trajectory;
    double reward = 0.0;
    int wall_steps = 0;
    /// Policy failure description when the episode ended on a fault.
    std::string fault;

    [[nodiscard]] Outcome outcome() const { return trajectory.outcome; }
    bool operator==(const EpisodeRecord&) const = default;
};

struct EpisodeOptions
{
    std::uint64_t seed = 0;
    int run_index = 0;
    const WorldCatalog* worlds = nullptr;
    std::string set_id = "none";
    int set_version = 0;
    int policy_retries = 2;
    std::chrono::milliseconds retry_backoff { 200 };
};

/// Stable id from (task_id, run_index, seed).
std::string episode_id(const std::string& task_id, int run_index, std::uint64_t seed);

/// Per-step loop state threaded through step_once.
struct EpisodeState
{
    Trajectory trajectory;
    ProgressTracker tracker;
    Budget budget;
};

/// One iteration after the policy has answered: realize, execute or block, append,
/// regulate. Only an EXEC decision touches the environment.
StepRecord step_once(EpisodeState& state, const RawModelOutput& raw, const Harness& harness, Environment& env);

/// The episode loop: contract layer, skill layer, Init, then per step
/// policy -> realize -> execute or block -> append -> regulate -> IsEnd.
EpisodeRecord run_episode(const TaskSpec& task, Environment& env, const Contract& contract, int budget,
                          const Harness& harness, const Policy& policy, const EpisodeOptions& options);

} // namespace harness
