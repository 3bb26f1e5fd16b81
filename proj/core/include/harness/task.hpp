// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace harness
{

/// One task of a suite. `success_spec` is owned and interpreted by the environment;
/// `reference_solution` is privileged data consumed only by scripted policies.
struct TaskSpec
{
    std::string task_id;
    std::string instruction;
    std::string environment_id;
    std::string world_id;
    std::uint64_t variant_seed = 0;
    std::map<std::string, std::string> success_spec;
    std::vector<std::string> reference_solution;
    /// Fault family a suite was designed around ("" when unspecified).
    std::string fault_family;

    bool operator==(const TaskSpec&) const = default;
};

} // namespace harness
