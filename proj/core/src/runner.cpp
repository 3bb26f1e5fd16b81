// SPDX-License-Identifier: Apache-2.0
#include <harness/environment.hpp>
#include <harness/errors.hpp>
#include <harness/runner.hpp>
#include <harness/text.hpp>

#include <json.hpp>

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace harness
{

std::uint64_t episode_seed(std::uint64_t suite_seed, int run_index)
{
    return suite_seed + static_cast<std::uint64_t>(run_index);
}

std::vector<EpisodeRecord> run_suite(const std::vector<TaskSpec>& tasks, const SuiteRun& run)
{
    if (!run.policy || !run.worlds)
        throw ConfigError("suite run needs a policy and a world catalog");
    if (run.runs < 1)
        throw ConfigError("runs must be at least 1");

    std::map<std::string, Harness> harnesses;
    for (const auto& t: tasks)
        if (!harnesses.count(t.environment_id))
            harnesses.emplace(t.environment_id, compile_harness(run.set, t.environment_id, run.toggles));

    const std::size_t total = tasks.size() * static_cast<std::size_t>(run.runs);
    std::vector<EpisodeRecord> records(total);
    std::atomic<std::size_t> next { 0 };
    std::atomic<bool> failed { false };
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&] {
        for (;;)
        {
            auto i = next.fetch_add(1);
            if (i >= total || failed)
                return;
            const auto& task = tasks[i / run.runs];
            int run_index = static_cast<int>(i % run.runs);
            try
            {
                EpisodeOptions opts;
                opts.seed = episode_seed(run.seed, run_index);
                opts.run_index = run_index;
                opts.worlds = run.worlds;
                opts.set_id = run.set.set_id();
                opts.set_version = run.set.version();
                auto env = make_environment(task, opts.seed, *run.worlds);
                int budget = run.budget > 0 ? run.budget : default_budget(task.environment_id);
                records[i] = run_episode(task, *env, base_contract_for(task.environment_id), budget,
                                         harnesses.at(task.environment_id), *run.policy, opts);
                if (run.log)
                    run.log->append(records[i]);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                failed = true;
                return;
            }
        }
    };

    unsigned n = std::max(1u, std::min<unsigned>(run.workers, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
    if (n == 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n; ++w)
            pool.emplace_back(work);
        for (auto& t: pool)
            t.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);
    return records;
}

std::filesystem::path cmd_run(const SuiteConfig& config)
{
    auto suite = resolve(config);
    auto policy = make_policy(config.policy);
    auto worlds = WorldCatalog::load(config.worlds);
    for (const auto& t: suite.manifest.tasks)
        if (!worlds.has_world(t.environment_id, t.world_id))
            throw UnknownTask("task " + t.task_id + " references unknown world " + t.world_id);

    LogWriter log(config.log);
    SuiteRun run;
    run.policy = policy.get();
    run.worlds = &worlds;
    run.set = suite.set;
    run.toggles = config.toggles;
    run.budget = config.effective_budget();
    run.runs = config.runs;
    run.seed = config.seed;
    run.workers = config.workers;
    run.log = &log;
    run_suite(suite.manifest.tasks, run);
    write_index(config.log);
    return config.log;
}

DiagnoseOutput cmd_diagnose(const std::filesystem::path& log)
{
    DiagnoseOutput out;
    for (const auto& r: read_log(log))
        if (r.outcome() != Outcome::Success)
            out.reports.push_back(classify(r));
    std::sort(out.reports.begin(), out.reports.end(),
              [](const DiagnosisReport& a, const DiagnosisReport& b) { return a.episode_id < b.episode_id; });
    out.json = serialize_reports(out.reports);
    if (out.reports.empty())
        out.text = "no failures\n";
    else
    {
        for (const auto& r: out.reports)
            out.text += r.episode_id + "  " + r.environment_id + "  " + to_string(r.category) + "  " +
                        r.triggering_rule_id + "\n";
        out.text += "\n" + render_histogram(histogram(out.reports));
    }
    return out;
}

ReportOutput cmd_report(const std::filesystem::path& log)
{
    auto records = read_log(log);
    if (records.empty())
        throw EmptyMatrix("log " + log.string() + " has no episodes");
    ReportOutput out;
    out.rows = metrics_table(records);
    out.text = render_metrics(out.rows);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r: out.rows)
        rows.push_back({ { "environment_id", r.environment_id },
                         { "policy_id", r.policy_id },
                         { "tasks", r.tasks },
                         { "runs", r.runs },
                         { "pass_at_1", r.pass_at_1 },
                         { "pass_hat_k", r.pass_hat_k },
                         { "pass_at_k", r.pass_at_k } });
    out.json = nlohmann::json { { "rows", rows } }.dump(2) + "\n";
    return out;
}

} // namespace harness
