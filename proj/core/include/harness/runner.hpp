// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/diagnosis.hpp>
#include <harness/metrics.hpp>
#include <harness/persistence.hpp>
#include <harness/suite.hpp>

namespace harness
{

struct SuiteRun
{
    const Policy* policy = nullptr;
    const WorldCatalog* worlds = nullptr;
    InterventionSet set;
    LayerToggles toggles;
    /// 0 selects the environment default.
    int budget = 0;
    int runs = 1;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    /// Optional sink; records are appended in completion order.
    LogWriter* log = nullptr;
};

/// Seed of run `run_index` under a suite seed.
std::uint64_t episode_seed(std::uint64_t suite_seed, int run_index);

/// Runs every (task, run) pair on a bounded worker pool. The result is ordered by
/// (task order, run_index) regardless of completion order. The first episode error is
/// rethrown after all workers stop.
std::vector<EpisodeRecord> run_suite(const std::vector<TaskSpec>& tasks, const SuiteRun& run);

/// `run`: executes a config, writes the log and its index, returns the log path.
std::filesystem::path cmd_run(const SuiteConfig& config);

struct DiagnoseOutput
{
    std::vector<DiagnosisReport> reports;
    std::string text;
    std::string json;
};

/// `diagnose`: classifies every failed episode of a log.
DiagnoseOutput cmd_diagnose(const std::filesystem::path& log);

struct ReportOutput
{
    std::vector<MetricsRow> rows;
    std::string text;
    std::string json;
};

/// `report`: Pass@1, Pass^K and Pass@K per environment and policy.
ReportOutput cmd_report(const std::filesystem::path& log);

} // namespace harness
