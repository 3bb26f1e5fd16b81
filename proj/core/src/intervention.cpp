// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/intervention.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace harness
{

using nlohmann::json;

namespace
{
constexpr int kSetFormatVersion = 1;

const std::array<std::pair<Layer, std::string_view>, 4> kLayerNames { {
    { Layer::Contract, "Contract" },
    { Layer::Skill, "Skill" },
    { Layer::ActionGate, "ActionGate" },
    { Layer::Regulation, "Regulation" },
} };

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
} // namespace

std::string to_string(Layer layer)
{
    for (const auto& [l, name]: kLayerNames)
        if (l == layer)
            return std::string(name);
    return {};
}

Layer parse_layer(std::string_view s)
{
    for (const auto& [l, name]: kLayerNames)
        if (name == s)
            return l;
    throw ConfigError("unknown layer '" + std::string(s) + "'");
}

const std::string& Intervention::environment_id() const
{
    return std::visit(
        [](const auto& p) -> const std::string& {
            return p.environment_id;
        },
        payload);
}

void Intervention::validate() const
{
    bool ok = (layer == Layer::Contract && std::holds_alternative<ContractDelta>(payload)) ||
              (layer == Layer::Skill && std::holds_alternative<Skill>(payload)) ||
              (layer == Layer::ActionGate && std::holds_alternative<GateRule>(payload)) ||
              (layer == Layer::Regulation && std::holds_alternative<DetectorConfig>(payload));
    if (!ok)
        throw ConfigError("intervention " + intervention_id + ": payload does not match layer " + to_string(layer));
}

InterventionSet::InterventionSet(std::string set_id, int version, std::vector<Intervention> interventions, bool frozen)
    : _set_id(std::move(set_id)), _version(version), _interventions(std::move(interventions)), _frozen(frozen)
{
    for (const auto& i: _interventions)
        i.validate();
}

bool InterventionSet::contains(const std::string& intervention_id) const
{
    return std::any_of(_interventions.begin(), _interventions.end(),
                       [&](const Intervention& i) { return i.intervention_id == intervention_id; });
}

InterventionSet InterventionSet::with(const Intervention& intervention) const
{
    auto copy = *this;
    copy.add(intervention);
    return copy;
}

InterventionSet InterventionSet::freeze() const
{
    auto copy = *this;
    copy._frozen = true;
    return copy;
}

void InterventionSet::add(const Intervention& intervention)
{
    if (_frozen)
        throw FrozenSetError("intervention set " + _set_id + " is frozen");
    intervention.validate();
    _interventions.push_back(intervention);
    ++_version;
}

Harness compile_harness(const InterventionSet& set, const std::string& environment_id, const LayerToggles& toggles)
{
    Harness h;
    std::vector<Skill> skills;
    RegulationConfig reg;
    reg.budget = reg.repetition = reg.stall = reg.oscillation = false;
    bool any_detector = false;
    for (const auto& i: set.interventions())
    {
        if (i.environment_id() != environment_id)
            continue;
        switch (i.layer)
        {
        case Layer::Contract:
            if (toggles.contract)
                h.deltas.push_back(std::get<ContractDelta>(i.payload));
            break;
        case Layer::Skill:
            if (toggles.skill)
                skills.push_back(std::get<Skill>(i.payload));
            break;
        case Layer::ActionGate:
            if (toggles.action)
                h.rules.push_back(std::get<GateRule>(i.payload));
            break;
        case Layer::Regulation: {
            if (!toggles.regulation)
                break;
            const auto& d = std::get<DetectorConfig>(i.payload);
            for (const auto& name: d.enable)
            {
                if (name == "budget")
                    reg.budget = true;
                else if (name == "repetition")
                    reg.repetition = true;
                else if (name == "stall")
                    reg.stall = true;
                else if (name == "oscillation")
                    reg.oscillation = true;
                else
                    throw ConfigError("unknown detector '" + name + "' in " + i.intervention_id);
                any_detector = true;
            }
            for (const auto& [k, v]: d.thresholds)
            {
                if (k == "repeat_k")
                    reg.repeat_k = v;
                else if (k == "stall_k")
                    reg.stall_k = v;
                else if (k == "oscillation_window")
                    reg.oscillation_window = v;
                else if (k == "budget_warn")
                    reg.budget_warn = v;
                else
                    throw ConfigError("unknown threshold '" + k + "' in " + i.intervention_id);
            }
            if (d.force_directives)
                reg.force_directives = *d.force_directives;
            break;
        }
        }
    }
    h.skills = SkillLibrary(std::move(skills));
    if (any_detector)
        h.regulation = reg;
    return h;
}

namespace
{

json delta_to_json(const ContractDelta& d)
{
    return json { { "delta_id", d.delta_id },
                  { "environment_id", d.environment_id },
                  { "tool_amendments", d.tool_amendments },
                  { "added_policy_notes", d.added_policy_notes },
                  { "pitfalls", d.pitfalls } };
}

ContractDelta delta_from_json(const json& j)
{
    ContractDelta d;
    d.delta_id = j.at("delta_id").get<std::string>();
    d.environment_id = j.at("environment_id").get<std::string>();
    d.tool_amendments = j.value("tool_amendments", std::map<std::string, std::string> {});
    d.added_policy_notes = j.value("added_policy_notes", std::vector<std::string> {});
    d.pitfalls = j.value("pitfalls", std::vector<std::string> {});
    return d;
}

json skill_to_json(const Skill& s)
{
    return json { { "skill_id", s.skill_id },
                  { "environment_id", s.environment_id },
                  { "task_type_tags", s.task_type_tags },
                  { "title", s.title },
                  { "body", s.body } };
}

Skill skill_from_json(const json& j)
{
    Skill s;
    s.skill_id = j.at("skill_id").get<std::string>();
    s.environment_id = j.at("environment_id").get<std::string>();
    s.task_type_tags = j.value("task_type_tags", std::vector<std::string> {});
    s.title = j.at("title").get<std::string>();
    s.body = j.at("body").get<std::string>();
    if (s.body.empty())
        throw ConfigError("skill " + s.skill_id + " has an empty body");
    return s;
}

json rule_to_json(const GateRule& r)
{
    json effect;
    if (auto b = std::get_if<BlockEffect>(&r.effect))
        effect = json { { "type", "block" }, { "message", b->message_template }, { "suggest", b->suggest } };
    else
        effect = json { { "type", "canonicalize" }, { "rewrite", to_string(std::get<CanonicalizeEffect>(r.effect).rewrite) } };
    return json { { "rule_id", r.rule_id },
                  { "environment_id", r.environment_id },
                  { "trigger", r.trigger.source() },
                  { "effect", effect } };
}

GateRule rule_from_json(const json& j)
{
    GateRule r;
    r.rule_id = j.at("rule_id").get<std::string>();
    r.environment_id = j.at("environment_id").get<std::string>();
    r.trigger = Condition::parse(j.at("trigger").get<std::string>());
    const auto& e = j.at("effect");
    auto type = e.at("type").get<std::string>();
    if (type == "block")
        r.effect = BlockEffect { e.at("message").get<std::string>(), e.value("suggest", false) };
    else if (type == "canonicalize")
        r.effect = CanonicalizeEffect { parse_rewrite(e.at("rewrite").get<std::string>()) };
    else
        throw ConfigError("rule " + r.rule_id + ": unknown effect type '" + type + "'");
    return r;
}

json detector_to_json(const DetectorConfig& d)
{
    json j { { "environment_id", d.environment_id }, { "enable", d.enable }, { "thresholds", d.thresholds } };
    if (d.force_directives)
        j["force_directives"] = *d.force_directives;
    return j;
}

DetectorConfig detector_from_json(const json& j)
{
    DetectorConfig d;
    d.environment_id = j.at("environment_id").get<std::string>();
    d.enable = j.value("enable", std::vector<std::string> {});
    d.thresholds = j.value("thresholds", std::map<std::string, int> {});
    if (j.contains("force_directives"))
        d.force_directives = j["force_directives"].get<bool>();
    return d;
}

json intervention_to_json(const Intervention& i)
{
    json payload = std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ContractDelta>)
                return delta_to_json(p);
            else if constexpr (std::is_same_v<T, Skill>)
                return skill_to_json(p);
            else if constexpr (std::is_same_v<T, GateRule>)
                return rule_to_json(p);
            else
                return detector_to_json(p);
        },
        i.payload);
    return json { { "intervention_id", i.intervention_id },
                  { "layer", to_string(i.layer) },
                  { "provenance", i.provenance },
                  { "payload", payload } };
}

Intervention intervention_from_json(const json& j)
{
    Intervention i;
    i.intervention_id = j.at("intervention_id").get<std::string>();
    i.layer = parse_layer(j.at("layer").get<std::string>());
    i.provenance = j.value("provenance", std::string {});
    const auto& p = j.at("payload");
    switch (i.layer)
    {
    case Layer::Contract:
        i.payload = delta_from_json(p);
        break;
    case Layer::Skill:
        i.payload = skill_from_json(p);
        break;
    case Layer::ActionGate:
        i.payload = rule_from_json(p);
        break;
    case Layer::Regulation:
        i.payload = detector_from_json(p);
        break;
    }
    i.validate();
    return i;
}

json parse_json(std::string_view text, const char* what)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::exception& e)
    {
        throw ConfigError(std::string("malformed ") + what + ": " + e.what());
    }
}

} // namespace

std::string serialize_intervention(const Intervention& intervention)
{
    return intervention_to_json(intervention).dump(2) + "\n";
}

Intervention parse_intervention(std::string_view json_text)
{
    try
    {
        return intervention_from_json(parse_json(json_text, "intervention document"));
    }
    catch (const json::exception& e)
    {
        throw ConfigError(std::string("invalid intervention document: ") + e.what());
    }
}

std::string serialize_set(const InterventionSet& set)
{
    json items = json::array();
    for (const auto& i: set.interventions())
        items.push_back(intervention_to_json(i));
    json j { { "format_version", kSetFormatVersion },
             { "set_id", set.set_id() },
             { "version", set.version() },
             { "frozen", set.frozen() },
             { "interventions", items } };
    return j.dump(2) + "\n";
}

InterventionSet parse_set(std::string_view json_text)
{
    auto j = parse_json(json_text, "intervention set");
    try
    {
        auto fv = j.at("format_version").get<int>();
        if (fv != kSetFormatVersion)
            throw SchemaVersionError("unsupported intervention set format_version " + std::to_string(fv));
        std::vector<Intervention> items;
        for (const auto& i: j.at("interventions"))
            items.push_back(intervention_from_json(i));
        return InterventionSet(j.at("set_id").get<std::string>(), j.at("version").get<int>(), std::move(items),
                               j.value("frozen", false));
    }
    catch (const json::exception& e)
    {
        throw ConfigError(std::string("invalid intervention set: ") + e.what());
    }
}

std::vector<Intervention> load_registry(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("registry directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e: std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Intervention> out;
    for (const auto& f: files)
        out.push_back(parse_intervention(read_file(f)));
    return out;
}

InterventionSet load_set(const std::filesystem::path& file)
{
    return parse_set(read_file(file));
}

void save_set(const InterventionSet& set, const std::filesystem::path& file)
{
    if (file.has_parent_path())
        std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + file.string());
    out << serialize_set(set);
}

} // namespace harness
