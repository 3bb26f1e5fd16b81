// SPDX-License-Identifier: Apache-2.0
#include <harness/environment.hpp>
#include <harness/errors.hpp>
#include <harness/evolution.hpp>
#include <harness/runner.hpp>

#include <json.hpp>

#include <fstream>
#include <set>

namespace harness
{

namespace
{

struct Evaluation
{
    int score = 0;
    std::set<std::string> passing;
    FailureCategory dominant = FailureCategory::ResidualReasoning;
};

Evaluation evaluate_set(const InterventionSet& set, const std::vector<TaskSpec>& tasks, const Policy& policy,
                        const EvolutionOptions& o)
{
    SuiteRun run;
    run.policy = &policy;
    run.worlds = o.worlds;
    run.set = set;
    run.toggles = o.toggles;
    run.budget = o.budget;
    run.runs = o.runs;
    run.seed = o.seed;
    run.workers = o.workers;
    auto records = run_suite(tasks, run);

    Evaluation e;
    std::map<std::string, int> successes;
    std::map<FailureCategory, int> counts;
    for (const auto& r: records)
    {
        if (r.outcome() == Outcome::Success && r.reward >= 1.0)
        {
            ++e.score;
            ++successes[r.task_id];
        }
        else
            ++counts[classify(r).category];
    }
    for (const auto& [id, n]: successes)
        if (n == o.runs)
            e.passing.insert(id);
    int best = 0;
    for (auto c: { FailureCategory::ActionRealization, FailureCategory::ContractMismatch,
                   FailureCategory::TrajectoryDegeneration, FailureCategory::ResidualReasoning })
        if (counts[c] > best)
        {
            best = counts[c];
            e.dominant = c;
        }
    return e;
}

} // namespace

EvolutionResult evolve(const InterventionSet& base, const std::vector<Intervention>& candidates,
                       const std::vector<TaskSpec>& train_tasks, const Policy& policy, const EvolutionOptions& options)
{
    if (train_tasks.empty())
        throw EmptyTrainSet("evolution needs at least one train task");
    if (!options.worlds)
        throw ConfigError("evolution needs a world catalog");

    std::set<std::string> environments;
    for (const auto& t: train_tasks)
        environments.insert(t.environment_id);

    std::vector<Intervention> pool;
    for (const auto& c: candidates)
    {
        c.validate();
        if (environments.count(c.environment_id()) && !base.contains(c.intervention_id))
            pool.push_back(c);
    }

    EvolutionReport report;
    for (const auto& t: train_tasks)
        report.train_task_ids.push_back(t.task_id);
    report.cells = static_cast<int>(train_tasks.size()) * options.runs;

    InterventionSet current(base.set_id(), base.version(), base.interventions());
    auto eval = evaluate_set(current, train_tasks, policy, options);
    report.initial_score = eval.score;

    int round = 0;
    for (int pass = 0;; ++pass)
    {
        bool admitted = false;
        std::set<std::string> tried;
        for (;;)
        {
            auto target = layer_for(eval.dominant);
            const Intervention* pick = nullptr;
            for (const auto& c: pool)
                if (!current.contains(c.intervention_id) && !tried.count(c.intervention_id) && c.layer == target)
                {
                    pick = &c;
                    break;
                }
            if (!pick)
                for (const auto& c: pool)
                    if (!current.contains(c.intervention_id) && !tried.count(c.intervention_id))
                    {
                        pick = &c;
                        break;
                    }
            if (!pick)
                break;
            tried.insert(pick->intervention_id);

            auto trial = current.with(*pick);
            auto after = evaluate_set(trial, train_tasks, policy, options);

            EvolutionRound r;
            r.round = ++round;
            r.pass = pass;
            r.candidate_id = pick->intervention_id;
            r.layer = pick->layer;
            r.targeted = eval.dominant;
            r.score_before = eval.score;
            r.score_after = after.score;
            for (const auto& id: after.passing)
                if (!eval.passing.count(id))
                    r.newly_passing.push_back(id);
            for (const auto& id: eval.passing)
                if (!after.passing.count(id))
                    r.regressed.push_back(id);
            r.accepted = after.score > eval.score && r.regressed.empty();
            if (r.accepted)
            {
                current = trial;
                eval = after;
                admitted = true;
            }
            r.version_after = current.version();
            report.rounds.push_back(std::move(r));
        }
        if (!admitted)
            break;
    }
    report.final_score = eval.score;
    return { current.freeze(), report };
}

void check_split_hygiene(const std::vector<TaskSpec>& train_tasks, const TaskManifest& held_out)
{
    std::set<std::string> test_ids;
    for (const auto& t: held_out.tasks)
        test_ids.insert(t.task_id);
    for (const auto& t: train_tasks)
        if (test_ids.count(t.task_id))
            throw SplitViolation("train task " + t.task_id + " also appears in held-out suite " + held_out.suite_id);
}

std::string serialize_report(const EvolutionReport& report)
{
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r: report.rounds)
        rounds.push_back({ { "round", r.round },
                           { "pass", r.pass },
                           { "candidate_id", r.candidate_id },
                           { "layer", to_string(r.layer) },
                           { "targeted_category", to_string(r.targeted) },
                           { "score_before", r.score_before },
                           { "score_after", r.score_after },
                           { "newly_passing", r.newly_passing },
                           { "regressed", r.regressed },
                           { "decision", r.accepted ? "accept" : "reject" },
                           { "version_after", r.version_after } });
    nlohmann::json doc { { "train_task_ids", report.train_task_ids },
                         { "cells", report.cells },
                         { "initial_score", report.initial_score },
                         { "final_score", report.final_score },
                         { "rounds", rounds } };
    return doc.dump(2) + "\n";
}

std::filesystem::path cmd_evolve(const std::filesystem::path& registry, const SuiteConfig& config)
{
    auto manifest = load_manifest(config.manifest);
    if (manifest.split == Split::Test || config.split == Split::Test)
        throw SplitViolation("refusing to evolve against test manifest " + config.manifest.string());
    auto suite = resolve(config);
    if (config.test_manifest)
        check_split_hygiene(suite.manifest.tasks, load_manifest(*config.test_manifest));

    auto candidates = load_registry(registry);
    auto policy = make_policy(config.policy);
    auto worlds = WorldCatalog::load(config.worlds);

    EvolutionOptions opts;
    opts.worlds = &worlds;
    opts.budget = config.effective_budget();
    opts.runs = config.runs;
    opts.seed = config.seed;
    opts.workers = config.workers;
    opts.toggles = config.toggles;
    auto base = config.intervention_set ? suite.set : InterventionSet("evolved", 0, {});
    auto result = evolve(base, candidates, suite.manifest.tasks, *policy, opts);

    save_set(result.set, config.output);
    std::ofstream out(config.output.string() + ".report.json", std::ios::binary | std::ios::trunc);
    out << serialize_report(result.report);
    return config.output;
}

} // namespace harness
