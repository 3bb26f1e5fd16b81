// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/diagnosis.hpp>
#include <harness/suite.hpp>

namespace harness
{

struct EvolutionRound
{
    int round = 0;
    int pass = 0;
    std::string candidate_id;
    Layer layer = Layer::Contract;
    /// Dominant failure category of the train suite when the candidate was picked.
    FailureCategory targeted = FailureCategory::ResidualReasoning;
    int score_before = 0;
    int score_after = 0;
    std::vector<std::string> newly_passing;
    std::vector<std::string> regressed;
    bool accepted = false;
    int version_after = 0;

    bool operator==(const EvolutionRound&) const = default;
};

struct EvolutionReport
{
    std::vector<std::string> train_task_ids;
    /// Train score is the number of successful (task, run) cells.
    int cells = 0;
    int initial_score = 0;
    int final_score = 0;
    std::vector<EvolutionRound> rounds;
};

struct EvolutionOptions
{
    const WorldCatalog* worlds = nullptr;
    /// 0 selects the environment default.
    int budget = 0;
    int runs = 1;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    LayerToggles toggles;
};

struct EvolutionResult
{
    InterventionSet set;
    EvolutionReport report;
};

/// Greedy admission of registry candidates. Each pass tries the not-yet-admitted
/// candidates, those matching the layer of the dominant failure category first; a
/// candidate is admitted iff the train score strictly increases and no passing task
/// fails. Stops after a pass without admissions. The returned set is frozen.
/// Throws EmptyTrainSet.
EvolutionResult evolve(const InterventionSet& base, const std::vector<Intervention>& candidates,
                       const std::vector<TaskSpec>& train_tasks, const Policy& policy, const EvolutionOptions& options);

/// Throws SplitViolation when a train task id also appears in the held-out manifest.
void check_split_hygiene(const std::vector<TaskSpec>& train_tasks, const TaskManifest& held_out);

std::string serialize_report(const EvolutionReport& report);

/// `evolve`: loads the registry and a train config, evolves, writes the frozen set to
/// `config.output` and the report beside it. Aborts with SplitViolation on a test manifest.
std::filesystem::path cmd_evolve(const std::filesystem::path& registry, const SuiteConfig& config);

} // namespace harness
