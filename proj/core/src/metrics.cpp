// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/metrics.hpp>
#include <harness/runtime.hpp>
#include <harness/text.hpp>

#include <algorithm>
#include <cstdio>

namespace harness
{

namespace
{
std::size_t common_k(const RunMatrix& m)
{
    if (m.empty())
        throw EmptyMatrix("run matrix has no tasks");
    std::size_t k = m.begin()->second.size();
    for (const auto& [task, runs]: m)
    {
        if (runs.size() != k)
            throw KMismatch("task " + task + " has " + std::to_string(runs.size()) + " runs, expected " + std::to_string(k));
        for (int v: runs)
            if (v != 0 && v != 1)
                throw KMismatch("task " + task + " has a non-binary outcome");
    }
    if (k == 0)
        throw EmptyMatrix("run matrix has zero runs per task");
    return k;
}
} // namespace

RunMatrix run_matrix(const std::vector<EpisodeRecord>& records)
{
    std::map<std::string, std::vector<std::pair<int, int>>> by_task;
    for (const auto& r: records)
        by_task[r.task_id].emplace_back(r.run_index, r.reward == 1.0 ? 1 : 0);
    RunMatrix m;
    for (auto& [task, runs]: by_task)
    {
        std::sort(runs.begin(), runs.end());
        for (const auto& [idx, v]: runs)
            m[task].push_back(v);
    }
    return m;
}

double pass_at_1(const RunMatrix& m)
{
    auto k = common_k(m);
    double sum = 0.0;
    for (const auto& [task, runs]: m)
        for (int v: runs)
            sum += v;
    return sum / static_cast<double>(m.size() * k);
}

double pass_hat_k(const RunMatrix& m, std::size_t k)
{
    if (common_k(m) != k)
        throw KMismatch("pass^k requested with k=" + std::to_string(k) + " but the matrix has K=" + std::to_string(common_k(m)));
    std::size_t all = 0;
    for (const auto& [task, runs]: m)
        if (std::all_of(runs.begin(), runs.end(), [](int v) { return v == 1; }))
            ++all;
    return static_cast<double>(all) / static_cast<double>(m.size());
}

double pass_at_k(const RunMatrix& m, std::size_t k)
{
    if (common_k(m) != k)
        throw KMismatch("pass@k requested with k=" + std::to_string(k) + " but the matrix has K=" + std::to_string(common_k(m)));
    std::size_t any = 0;
    for (const auto& [task, runs]: m)
        if (std::any_of(runs.begin(), runs.end(), [](int v) { return v == 1; }))
            ++any;
    return static_cast<double>(any) / static_cast<double>(m.size());
}

double relative_gain(double before, double after)
{
    if (before == 0.0)
        throw ZeroBaseline("relative gain undefined for a zero baseline; absolute delta is " + text::format_real(after));
    return (after - before) / before;
}

std::vector<MetricsRow> metrics_table(const std::vector<EpisodeRecord>& records)
{
    std::map<std::pair<std::string, std::string>, std::vector<EpisodeRecord>> groups;
    for (const auto& r: records)
    {
        groups[{ r.environment_id, r.policy_id }].push_back(r);
        groups[{ "all", r.policy_id }].push_back(r);
    }
    std::vector<MetricsRow> rows;
    for (const auto& [key, recs]: groups)
    {
        auto m = run_matrix(recs);
        auto k = common_k(m);
        MetricsRow row;
        row.environment_id = key.first;
        row.policy_id = key.second;
        row.tasks = m.size();
        row.runs = k;
        row.pass_at_1 = pass_at_1(m);
        row.pass_hat_k = pass_hat_k(m, k);
        row.pass_at_k = pass_at_k(m, k);
        rows.push_back(row);
    }
    return rows;
}

std::string render_metrics(const std::vector<MetricsRow>& rows)
{
    std::string out = "environment  policy                     tasks  K  Pass@1   Pass^K   Pass@K\n";
    char buf[256];
    for (const auto& r: rows)
    {
        std::snprintf(buf, sizeof buf, "%-11s  %-25s  %5zu  %zu  %.4f   %.4f   %.4f\n", r.environment_id.c_str(),
                      r.policy_id.c_str(), r.tasks, r.runs, r.pass_at_1, r.pass_hat_k, r.pass_at_k);
        out += buf;
    }
    return out;
}

} // namespace harness
