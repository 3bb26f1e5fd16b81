// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace harness
{

struct EpisodeRecord;

/// task_id -> K binary outcomes.
using RunMatrix = std::map<std::string, std::vector<int>>;

/// Builds a matrix from episode records (success iff reward == 1), runs ordered by run_index.
RunMatrix run_matrix(const std::vector<EpisodeRecord>& records);

/// Mean over all task-run cells.
double pass_at_1(const RunMatrix& m);

/// Fraction of tasks whose k runs all succeed; k must equal K.
double pass_hat_k(const RunMatrix& m, std::size_t k);

/// Fraction of tasks with at least one success among the k runs.
double pass_at_k(const RunMatrix& m, std::size_t k);

/// (after - before) / before. Throws ZeroBaseline when before is 0.
double relative_gain(double before, double after);

struct MetricsRow
{
    std::string environment_id;
    std::string policy_id;
    std::size_t tasks = 0;
    std::size_t runs = 0;
    double pass_at_1 = 0.0;
    double pass_hat_k = 0.0;
    double pass_at_k = 0.0;
};

/// Per (environment, policy) breakdown plus an "all" row per policy.
std::vector<MetricsRow> metrics_table(const std::vector<EpisodeRecord>& records);
std::string render_metrics(const std::vector<MetricsRow>& rows);

} // namespace harness
