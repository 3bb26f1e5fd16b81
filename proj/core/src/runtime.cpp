// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/runtime.hpp>
#include <harness/skills.hpp>
#include <harness/text.hpp>

#include <thread>

namespace harness
{

std::string episode_id(const std::string& task_id, int run_index, std::uint64_t seed)
{
    return text::hex64(text::fnv1a(task_id + "#" + std::to_string(run_index) + "#" + std::to_string(seed)));
}

namespace
{

/// A budget directive from the previous step replaces the model's action unless the model
/// already chose a task-critical action or the directive is no longer executable.
void apply_directive(RealizationDecision& decision, const EpisodeState& state, const Harness& harness,
                     const EnvironmentEvidence& evidence, const Contract& contract)
{
    if (!harness.regulation || !harness.regulation->force_directives || state.trajectory.steps.empty())
        return;
    const auto& prev = state.trajectory.steps.back().regulation;
    if (prev.level != RegulationLevel::Directive || !prev.suggested_action)
        return;
    if (decision.kind == DecisionKind::Exec && decision.action &&
        is_task_critical(*decision.action, contract.environment_id))
        return;
    Action forced;
    forced.text = *prev.suggested_action;
    if (contract.plain_text_commands)
    {
        if (!evidence.is_admissible(forced.text))
            return;
        forced.call = parse_command(contract, forced.text);
    }
    else
    {
        auto parsed = parse_call_syntax(forced.text);
        if (!parsed)
            return;
        auto tool = contract.find_tool(parsed->first);
        if (!tool || parsed->second.size() != tool->parameters.size())
            return;
        ToolCall call { parsed->first, {} };
        for (std::size_t i = 0; i < parsed->second.size(); ++i)
            call.arguments.emplace_back(tool->parameters[i].name, parsed->second[i]);
        forced.call = call;
    }
    decision.kind = DecisionKind::Exec;
    decision.action = forced;
    decision.block_message.reset();
    decision.attempted = forced.text;
    decision.forced = true;
    decision.canonicalized = false;
    decision.rule_id = prev.detector_id;
}

} // namespace

StepRecord step_once(EpisodeState& state, const RawModelOutput& raw, const Harness& harness, Environment& env)
{
    const auto& contract = state.trajectory.contract;
    auto evidence = env.evidence();
    auto decision = realize(raw, state.trajectory, contract, evidence, harness.rules, harness.realization);
    apply_directive(decision, state, harness, evidence, contract);

    StepRecord step;
    step.index = state.budget.consumed;
    step.remaining_budget = state.budget.remaining();
    step.raw_model_output = serialize_raw_output(raw);
    if (decision.kind == DecisionKind::Exec)
        step.observation = env.step(*decision.action);
    else
        step.observation = *decision.block_message;
    step.decision = decision;
    state.trajectory.steps.push_back(step);
    ++state.budget.consumed;

    if (harness.regulation)
    {
        auto after = env.evidence();
        update_tracker(state.tracker, decision.attempted, step.observation, after,
                       decision.kind == DecisionKind::Block);
        state.trajectory.steps.back().regulation = regulate(state.trajectory, decision.attempted, step.observation,
                                                            step.remaining_budget, state.tracker, after,
                                                            *harness.regulation);
    }
    return state.trajectory.steps.back();
}

EpisodeRecord run_episode(const TaskSpec& task, Environment& env, const Contract& contract, int budget,
                          const Harness& harness, const Policy& policy, const EpisodeOptions& options)
{
    if (contract.environment_id != env.environment_id() || task.environment_id != env.environment_id())
        throw EnvironmentMismatch("contract '" + contract.environment_id + "' and task '" + task.environment_id +
                                  "' do not match environment '" + env.environment_id() + "'");
    if (budget < 0)
        throw ConfigError("budget must be non-negative");

    EpisodeRecord rec;
    rec.episode_id = episode_id(task.task_id, options.run_index, options.seed);
    rec.task_id = task.task_id;
    rec.environment_id = task.environment_id;
    rec.instruction = task.instruction;
    rec.policy_id = policy.policy_id();
    rec.intervention_set_id = options.set_id;
    rec.intervention_set_version = options.set_version;
    rec.seed = options.seed;
    rec.run_index = options.run_index;
    rec.budget = budget;

    EpisodeState state;
    state.trajectory.contract = apply_deltas(contract, harness.deltas);
    auto skills = harness.skills.size() > 0 ? retrieve(task, harness.skills, harness.skill_k) : std::vector<Skill> {};
    state.trajectory.task = inject(task, skills);
    state.trajectory.initial_observation = env.initial_observation();
    state.budget.total_steps = budget;

    PolicyContext context { task, options.seed, options.worlds };
    bool ended = false;
    while (state.budget.consumed < state.budget.total_steps)
    {
        auto rendered = render_for_model(state.trajectory);
        std::optional<RawModelOutput> raw;
        for (int attempt = 0;; ++attempt)
        {
            try
            {
                raw = policy.next_action(rendered, context);
                break;
            }
            catch (const PolicyFault& e)
            {
                if (attempt >= options.policy_retries)
                {
                    rec.fault = e.what();
                    break;
                }
                std::this_thread::sleep_for(options.retry_backoff);
            }
        }
        if (!raw)
        {
            state.trajectory.outcome = Outcome::Failure;
            ended = true;
            break;
        }
        step_once(state, *raw, harness, env);
        if (env.is_end())
        {
            ended = true;
            rec.reward = env.evaluate();
            state.trajectory.outcome = rec.reward >= 1.0 ? Outcome::Success : Outcome::Failure;
            break;
        }
    }
    if (!ended)
        state.trajectory.outcome = Outcome::BudgetExhausted;
    if (state.trajectory.outcome != Outcome::Success)
        rec.reward = env.evaluate();
    rec.wall_steps = static_cast<int>(state.trajectory.steps.size());
    rec.trajectory = std::move(state.trajectory);
    return rec;
}

} // namespace harness
