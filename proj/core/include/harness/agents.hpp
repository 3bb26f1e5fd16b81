// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/environment.hpp>
#include <harness/trajectory.hpp>

#include <memory>

namespace harness
{

/// Section markers of a rendered trajectory; each sits alone on its own line.
namespace render_tags
{
inline constexpr std::string_view kSystem = "[system]";
inline constexpr std::string_view kUser = "[user]";
inline constexpr std::string_view kEnvironment = "[environment]";
inline constexpr std::string_view kAssistant = "[assistant]";
inline constexpr std::string_view kExecuted = "[executed]";
inline constexpr std::string_view kBlocked = "[blocked]";
inline constexpr std::string_view kRegulation = "[environment:regulation]";
} // namespace render_tags

/// tau_t as model context: contract C', task x', o_0, then per step the raw output, the
/// executed action (or a blocked marker), the observation and any regulation message.
std::string render_for_model(const Trajectory& trajectory);

struct TranscriptStep
{
    std::string raw;
    bool blocked = false;
    std::string executed;
    std::string observation;
    std::string regulation;
};

struct Transcript
{
    std::string contract;
    std::string instruction;
    std::string initial_observation;
    std::vector<TranscriptStep> steps;
};

Transcript parse_transcript(std::string_view rendered);

/// Privileged per-episode facts available to scripted policies; remote policies only read
/// the environment id.
struct PolicyContext
{
    TaskSpec task;
    std::uint64_t seed = 0;
    const WorldCatalog* worlds = nullptr;
};

class Policy
{
  public:
    virtual ~Policy() = default;
    [[nodiscard]] virtual const std::string& policy_id() const = 0;
    /// a_t ~ pi(. | tau_t). Throws PolicyFault on irrecoverable adapter failures.
    [[nodiscard]] virtual RawModelOutput next_action(const std::string& rendered, const PolicyContext& context) const = 0;
};

enum class Behavior
{
    Oracle,
    FreeText,
    Loop,
    WrongTool,
    PrematureCommit,
    /// Takes its fault from the task's fault family and obeys suggested actions.
    FollowHint
};

std::string to_string(Behavior b);
Behavior parse_behavior(std::string_view s);

struct ScriptedConfig
{
    Behavior behavior = Behavior::Oracle;
    double fault_rate = 1.0;
    bool hint_compliance = true;
    /// Commit the last scalar query result instead of the known answer (MiniDB).
    bool commit_observed = false;

    bool operator==(const ScriptedConfig&) const = default;
};

/// Correction markers the scripted faults react to.
namespace markers
{
inline constexpr std::string_view kTakeBeforeTransform = "pick up the object before cleaning";
inline constexpr std::string_view kBareValue = "bare value";
inline constexpr std::string_view kMutationFirst = "mutation required before commit";
} // namespace markers

/// Deterministic agent with designed fault modes. Rebuilds the environment state from the
/// executed actions in the transcript, then plans with privileged access to the world.
class ScriptedPolicy final: public Policy
{
  public:
    explicit ScriptedPolicy(ScriptedConfig config);

    [[nodiscard]] const std::string& policy_id() const override { return _id; }
    [[nodiscard]] RawModelOutput next_action(const std::string& rendered, const PolicyContext& context) const override;
    [[nodiscard]] const ScriptedConfig& config() const { return _config; }

  private:
    ScriptedConfig _config;
    std::string _id;
};

struct RemoteConfig
{
    std::string api_base;
    std::string api_key;
    std::string model;
    int max_tokens = 512;
    double temperature = 0.0;
    int timeout_seconds = 60;

    /// Reads HARNESS_API_BASE, HARNESS_API_KEY and HARNESS_MODEL.
    static RemoteConfig from_environment();
};

/// Chat-completions adapter. Transcript sections become system / user / assistant
/// messages; observations and regulation messages are sent with the user role.
class RemotePolicy final: public Policy
{
  public:
    explicit RemotePolicy(RemoteConfig config);

    [[nodiscard]] const std::string& policy_id() const override { return _id; }
    [[nodiscard]] RawModelOutput next_action(const std::string& rendered, const PolicyContext& context) const override;

    /// Request body for a rendered transcript (exposed for tests).
    [[nodiscard]] std::string request_body(const std::string& rendered, const std::string& environment_id) const;
    /// Parses a chat-completions response body.
    static RawModelOutput parse_response(std::string_view body, const Contract& contract);

  private:
    RemoteConfig _config;
    std::string _id;
};

/// Builds a policy from a spec such as {"kind": "scripted", "behavior": "FollowHint"}.
std::unique_ptr<Policy> make_policy(const std::string& spec_json);

} // namespace harness
