// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/evolution.hpp>
#include <harness/runner.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace
{

void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw harness::ConfigError("cannot write " + p.string());
    out << text;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Layered agent harness: run suites, diagnose failures, evolve intervention sets" };
    app.require_subcommand(1);

    std::string run_config;
    std::vector<std::string> disabled;
    auto* run = app.add_subcommand("run", "Run a task suite and write a JSONL episode log");
    run->add_option("--config", run_config, "Suite config (YAML)")->required()->check(CLI::ExistingFile);
    run->add_option("--disable-layer", disabled, "contract|skill|action|regulation")
        ->check(CLI::IsMember({ "contract", "skill", "action", "regulation" }));

    std::string diagnose_log;
    auto* diagnose = app.add_subcommand("diagnose", "Classify the failed episodes of a log");
    diagnose->add_option("--log", diagnose_log, "Episode log")->required()->check(CLI::ExistingFile);

    std::string report_log;
    auto* report = app.add_subcommand("report", "Pass@1 / Pass^K metrics of a log");
    report->add_option("--log", report_log, "Episode log")->required()->check(CLI::ExistingFile);

    std::string registry, evolve_config;
    auto* evolve = app.add_subcommand("evolve", "Evolve a frozen intervention set on a train suite");
    evolve->add_option("--registry", registry, "Candidate intervention directory")->required()->check(CLI::ExistingDirectory);
    evolve->add_option("--config", evolve_config, "Train suite config (YAML)")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            auto config = harness::load_suite_config(run_config);
            for (const auto& layer: disabled)
                harness::disable_layer(config, layer);
            auto log = harness::cmd_run(config);
            std::cout << log.string() << "\n";
        }
        else if (*diagnose)
        {
            auto out = harness::cmd_diagnose(diagnose_log);
            std::filesystem::path path = diagnose_log + ".diagnosis.json";
            write_file(path, out.json);
            std::cout << out.text << path.string() << "\n";
        }
        else if (*report)
        {
            auto out = harness::cmd_report(report_log);
            std::filesystem::path path = report_log + ".metrics.json";
            write_file(path, out.json);
            std::cout << out.text << path.string() << "\n";
        }
        else if (*evolve)
        {
            auto config = harness::load_suite_config(evolve_config);
            auto set = harness::cmd_evolve(registry, config);
            std::cout << set.string() << "\n";
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
