// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/suite.hpp>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace harness
{

using nlohmann::json;

std::string to_string(Split s)
{
    return s == Split::Train ? "train" : "test";
}

Split parse_split(std::string_view s)
{
    if (s == "train")
        return Split::Train;
    if (s == "test")
        return Split::Test;
    throw ConfigError("unknown split '" + std::string(s) + "'");
}

namespace
{

std::string read_text(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json yaml_to_json(const YAML::Node& n)
{
    switch (n.Type())
    {
    case YAML::NodeType::Map:
    {
        json out = json::object();
        for (const auto& kv: n)
            out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
        return out;
    }
    case YAML::NodeType::Sequence:
    {
        json out = json::array();
        for (const auto& item: n)
            out.push_back(yaml_to_json(item));
        return out;
    }
    case YAML::NodeType::Scalar:
    {
        auto s = n.Scalar();
        if (n.Tag() == "!")
            return s;
        if (s == "true")
            return true;
        if (s == "false")
            return false;
        try
        {
            std::size_t pos = 0;
            long long v = std::stoll(s, &pos);
            if (pos == s.size())
                return v;
            double d = std::stod(s, &pos);
            if (pos == s.size())
                return d;
        }
        catch (const std::exception&)
        {
        }
        return s;
    }
    default:
        return nullptr;
    }
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p)
{
    std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

} // namespace

TaskManifest parse_manifest(std::string_view json_text)
{
    auto j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("manifest is not a JSON object");
    try
    {
        TaskManifest m;
        m.suite_id = j.at("suite_id").get<std::string>();
        m.environment_id = j.at("environment_id").get<std::string>();
        m.split = parse_split(j.at("split").get<std::string>());
        std::set<std::string> seen;
        for (const auto& t: j.at("tasks"))
        {
            TaskSpec task;
            task.task_id = t.at("task_id").get<std::string>();
            task.instruction = t.at("instruction").get<std::string>();
            task.environment_id = t.value("environment_id", m.environment_id);
            task.world_id = t.at("world_id").get<std::string>();
            task.variant_seed = t.value("variant_seed", std::uint64_t { 0 });
            if (t.contains("success_spec"))
                for (const auto& [k, v]: t.at("success_spec").items())
                    task.success_spec[k] = v.is_string() ? v.get<std::string>() : v.dump();
            task.reference_solution = t.value("reference_solution", std::vector<std::string> {});
            task.fault_family = t.value("fault_family", std::string {});
            if (task.instruction.empty())
                throw ConfigError("task " + task.task_id + " has an empty instruction");
            if (!seen.insert(task.task_id).second)
                throw ConfigError("duplicate task id " + task.task_id);
            m.tasks.push_back(std::move(task));
        }
        return m;
    }
    catch (const json::exception& e)
    {
        throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
}

TaskManifest load_manifest(const std::filesystem::path& file)
{
    return parse_manifest(read_text(file));
}

int default_budget(const std::string& environment_id)
{
    if (environment_id == "gridhouse")
        return 50;
    if (environment_id == "minidb")
        return 15;
    throw ConfigError("no default budget for environment '" + environment_id + "'");
}

SuiteConfig parse_suite_config(std::string_view yaml_text, const std::filesystem::path& base_dir)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(std::string(yaml_text));
    }
    catch (const YAML::Exception& e)
    {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    if (!root.IsMap())
        throw ConfigError("config must be a mapping");

    static const std::set<std::string> known { "environment_id", "manifest", "split",  "policy",
                                               "intervention_set", "budget", "runs",  "seed",
                                               "layers", "workers", "worlds", "log", "test_manifest",
                                               "output" };
    for (const auto& kv: root)
        if (!known.count(kv.first.as<std::string>()))
            throw ConfigError("unknown config key '" + kv.first.as<std::string>() + "'");

    try
    {
        SuiteConfig c;
        if (!root["environment_id"] || !root["manifest"])
            throw ConfigError("config requires environment_id and manifest");
        c.environment_id = root["environment_id"].as<std::string>();
        c.manifest = resolve_path(base_dir, root["manifest"].as<std::string>());
        if (root["split"])
            c.split = parse_split(root["split"].as<std::string>());
        if (root["policy"])
            c.policy = root["policy"].IsScalar() ? json { { "kind", "scripted" }, { "behavior", root["policy"].as<std::string>() } }.dump()
                                                 : yaml_to_json(root["policy"]).dump();
        if (root["intervention_set"])
        {
            auto s = root["intervention_set"].as<std::string>();
            if (s != "none")
                c.intervention_set = resolve_path(base_dir, s);
        }
        if (root["budget"])
            c.budget = root["budget"].as<int>();
        if (root["runs"])
            c.runs = root["runs"].as<int>();
        if (root["seed"])
            c.seed = root["seed"].as<std::uint64_t>();
        if (root["workers"])
            c.workers = root["workers"].as<unsigned>();
        if (const auto& layers = root["layers"])
        {
            if (!layers.IsMap())
                throw ConfigError("layers must map layer names to booleans");
            for (const auto& kv: layers)
            {
                auto name = kv.first.as<std::string>();
                bool on = kv.second.as<bool>();
                if (name == "contract")
                    c.toggles.contract = on;
                else if (name == "skill")
                    c.toggles.skill = on;
                else if (name == "action")
                    c.toggles.action = on;
                else if (name == "regulation")
                    c.toggles.regulation = on;
                else
                    throw ConfigError("unknown layer '" + name + "'");
            }
        }
        c.worlds = root["worlds"] ? resolve_path(base_dir, root["worlds"].as<std::string>()) : c.manifest.parent_path();
        if (root["log"])
            c.log = resolve_path(base_dir, root["log"].as<std::string>());
        if (root["test_manifest"])
            c.test_manifest = resolve_path(base_dir, root["test_manifest"].as<std::string>());
        if (root["output"])
            c.output = resolve_path(base_dir, root["output"].as<std::string>());
        if (c.budget < 0)
            throw ConfigError("budget must be non-negative");
        if (c.runs < 1)
            throw ConfigError("runs must be at least 1");
        if (c.workers < 1)
            throw ConfigError("workers must be at least 1");
        (void)c.effective_budget();
        return c;
    }
    catch (const YAML::Exception& e)
    {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

SuiteConfig load_suite_config(const std::filesystem::path& file)
{
    return parse_suite_config(read_text(file), file.parent_path());
}

void disable_layer(SuiteConfig& config, std::string_view layer)
{
    if (layer == "contract")
        config.toggles.contract = false;
    else if (layer == "skill")
        config.toggles.skill = false;
    else if (layer == "action")
        config.toggles.action = false;
    else if (layer == "regulation")
        config.toggles.regulation = false;
    else
        throw ConfigError("unknown layer '" + std::string(layer) + "'");
}

ResolvedSuite resolve(const SuiteConfig& config)
{
    ResolvedSuite r { config, load_manifest(config.manifest), InterventionSet {} };
    if (r.manifest.split != config.split)
        throw ConfigError("config split '" + to_string(config.split) + "' does not match manifest split '" +
                          to_string(r.manifest.split) + "'");
    if (r.manifest.environment_id != config.environment_id)
        throw EnvironmentMismatch("manifest environment '" + r.manifest.environment_id + "' differs from config '" +
                                  config.environment_id + "'");
    for (const auto& t: r.manifest.tasks)
        if (t.environment_id != config.environment_id)
            throw EnvironmentMismatch("task " + t.task_id + " targets '" + t.environment_id + "'");
    if (config.intervention_set)
    {
        r.set = load_set(*config.intervention_set);
        if (config.split == Split::Test && !r.set.frozen())
            throw SplitViolation("test split requires a frozen intervention set; " +
                                 config.intervention_set->string() + " is not frozen");
    }
    return r;
}

} // namespace harness
