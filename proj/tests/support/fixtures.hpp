// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/agents.hpp>
#include <harness/environment.hpp>
#include <harness/intervention.hpp>
#include <harness/runtime.hpp>
#include <harness/suite.hpp>

#include <filesystem>
#include <random>

namespace harness::testkit
{

std::filesystem::path data_dir();
std::filesystem::path golden_dir();
std::string read_file(const std::filesystem::path& path);

/// The bundled world catalog, loaded once.
const WorldCatalog& worlds();
std::vector<Intervention> registry();

std::vector<TaskSpec> load_suites(const std::vector<std::string>& suite_ids);

/// A correctable fault family and its designed suites.
struct Family
{
    std::string name;
    Behavior behavior;
    std::vector<std::string> train_suites;
    std::vector<std::string> test_suites;
    /// Layer whose interventions address the family's faults.
    std::string matched_layer;
};
const std::vector<Family>& families();
std::vector<TaskSpec> all_train_tasks();
std::vector<TaskSpec> all_test_tasks();

std::unique_ptr<Policy> scripted(Behavior behavior, bool commit_observed = false);

/// Runs one task under a set with a fresh environment.
EpisodeRecord run_one(const TaskSpec& task, const Policy& policy, const InterventionSet& set = {},
                      std::uint64_t seed = 0, int budget = 0, LayerToggles toggles = {});

/// Small deterministic generator helper over std::mt19937_64.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed): _engine(seed) { }
    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(_engine); }
    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(_engine);
    }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(_engine); }
    bool chance(double p) { return std::bernoulli_distribution(p)(_engine); }
    template <typename T>
    const T& pick(const std::vector<T>& v)
    {
        return v[below(v.size())];
    }
    std::mt19937_64& engine() { return _engine; }

  private:
    std::mt19937_64 _engine;
};

} // namespace harness::testkit
