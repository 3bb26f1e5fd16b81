// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/environment.hpp>

#include <functional>

namespace harness::gridhouse
{

struct Receptacle
{
    std::string name;
    std::string kind;
    std::string room;
    bool openable = false;
    bool open = true;

    bool operator==(const Receptacle&) const = default;
};

struct Object
{
    std::string name;
    std::string type;
    /// Receptacle name, or "inventory" while held.
    std::string location;
    bool clean = false;
    bool hot = false;
    bool cold = false;

    bool operator==(const Object&) const = default;
};

/// Goal predicate: some object of `object_type`, transformed when required, inside a
/// receptacle of `destination_kind`.
struct Goal
{
    std::string object_type;
    std::string transform; // "", "clean", "heat", "cool"
    std::string destination_kind;

    bool operator==(const Goal&) const = default;
};

struct State
{
    std::vector<std::string> rooms;
    std::vector<Receptacle> receptacles;
    std::vector<Object> objects;
    std::string agent_room;
    std::string agent_at; // receptacle name, empty in the middle of a room
    Goal goal;

    [[nodiscard]] const Receptacle* receptacle(std::string_view name) const;
    [[nodiscard]] const Object* held() const;
    [[nodiscard]] bool goal_satisfied() const;

    bool operator==(const State&) const = default;
};

inline constexpr std::string_view kInventory = "inventory";

/// Appliance kind that performs a transform ("clean" -> "sinkbasin", ...).
std::string appliance_for(std::string_view transform);
bool has_transform(const Object& object, std::string_view transform);

/// Admissible commands paired with their effects, in deterministic order.
struct Transition
{
    std::string command;
    std::function<std::string(State&)> apply;
};
std::vector<Transition> transitions(const State& state);

class GridHouse final: public Environment
{
  public:
    GridHouse(State state, std::uint64_t rng_seed);

    /// Builds a world from its JSON definition and the task's goal; shuffles listing
    /// order when `shuffle_seed` is non-zero.
    static GridHouse from_world(const std::string& world_json, const TaskSpec& task, std::uint64_t shuffle_seed);

    [[nodiscard]] const std::string& environment_id() const override;
    [[nodiscard]] const Contract& base_contract() const override;
    [[nodiscard]] std::string initial_observation() const override;
    std::string step(const Action& action) override;
    [[nodiscard]] bool is_end() const override;
    [[nodiscard]] double evaluate() const override;
    [[nodiscard]] EnvironmentEvidence evidence() const override;
    [[nodiscard]] std::unique_ptr<Environment> clone() const override;
    [[nodiscard]] std::string state_fingerprint() const override;
    [[nodiscard]] bool is_error_or_noop(std::string_view observation) const override;

    [[nodiscard]] const State& state() const { return _state; }
    [[nodiscard]] std::uint64_t rng_seed() const { return _rng_seed; }

  private:
    State _state;
    std::uint64_t _rng_seed;
};

std::string fingerprint(const State& state);

/// Goal-directed plan from the given state (privileged: sees hidden object locations).
/// Enumerates target object, appliance and destination choices and returns the shortest.
std::vector<std::string> oracle_plan(const State& state);

} // namespace harness::gridhouse
