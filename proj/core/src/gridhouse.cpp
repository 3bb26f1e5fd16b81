// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/gridhouse.hpp>
#include <harness/text.hpp>

#include <json.hpp>

#include <algorithm>
#include <random>

namespace harness::gridhouse
{

const Receptacle* State::receptacle(std::string_view name) const
{
    for (const auto& r: receptacles)
        if (r.name == name)
            return &r;
    return nullptr;
}

const Object* State::held() const
{
    for (const auto& o: objects)
        if (o.location == kInventory)
            return &o;
    return nullptr;
}

std::string appliance_for(std::string_view transform)
{
    if (transform == "clean")
        return "sinkbasin";
    if (transform == "heat")
        return "microwave";
    if (transform == "cool")
        return "fridge";
    return {};
}

bool has_transform(const Object& object, std::string_view transform)
{
    if (transform == "clean")
        return object.clean;
    if (transform == "heat")
        return object.hot;
    if (transform == "cool")
        return object.cold;
    return true;
}

bool State::goal_satisfied() const
{
    for (const auto& o: objects)
    {
        if (o.type != goal.object_type || !has_transform(o, goal.transform))
            continue;
        auto r = receptacle(o.location);
        if (r && r->kind == goal.destination_kind)
            return true;
    }
    return false;
}

namespace
{

Receptacle* find_receptacle(State& s, std::string_view name)
{
    for (auto& r: s.receptacles)
        if (r.name == name)
            return &r;
    return nullptr;
}

Object* find_object(State& s, std::string_view name)
{
    for (auto& o: s.objects)
        if (o.name == name)
            return &o;
    return nullptr;
}

bool accessible(const Receptacle& r)
{
    return !r.openable || r.open;
}

std::string list_items(const std::vector<std::string>& items)
{
    if (items.empty())
        return "nothing";
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
    {
        if (i > 0)
            out += ", ";
        if (i > 0 && i + 1 == items.size())
            out += "and ";
        out += "a " + items[i];
    }
    return out;
}

std::string contents(const State& s, const Receptacle& r)
{
    if (!accessible(r))
        return "The " + r.name + " is closed.";
    std::vector<std::string> names;
    for (const auto& o: s.objects)
        if (o.location == r.name)
            names.push_back(o.name);
    if (r.openable)
        return "The " + r.name + " is open. In it, you see " + list_items(names) + ".";
    return "On the " + r.name + ", you see " + list_items(names) + ".";
}

std::string room_overview(const State& s)
{
    std::vector<std::string> names;
    for (const auto& r: s.receptacles)
        if (r.room == s.agent_room)
            names.push_back(r.name);
    std::string out = "Looking quickly around you, you see " + text::join(names, ", ") + ".";
    std::vector<std::string> exits;
    for (const auto& room: s.rooms)
        if (room != s.agent_room)
            exits.push_back(room);
    if (!exits.empty())
        out += " Exits lead to: " + text::join(exits, ", ") + ".";
    return out;
}

std::string transform_verb(std::string_view kind)
{
    if (kind == "sinkbasin")
        return "clean";
    if (kind == "microwave")
        return "heat";
    if (kind == "fridge")
        return "cool";
    return {};
}

std::string past_tense_note(const Object& o)
{
    std::vector<std::string> attrs;
    if (o.clean)
        attrs.emplace_back("clean");
    if (o.hot)
        attrs.emplace_back("hot");
    if (o.cold)
        attrs.emplace_back("cold");
    return text::join(attrs, ",");
}

} // namespace

std::vector<Transition> transitions(const State& s)
{
    std::vector<Transition> out;
    for (const auto& r: s.receptacles)
    {
        if (r.room != s.agent_room || r.name == s.agent_at)
            continue;
        auto name = r.name;
        out.push_back({ "go to " + name, [name](State& st) {
                           st.agent_at = name;
                           return "You arrive at " + name + ". " + contents(st, *st.receptacle(name));
                       } });
    }
    for (const auto& room: s.rooms)
    {
        if (room == s.agent_room)
            continue;
        out.push_back({ "go to " + room, [room](State& st) {
                           st.agent_room = room;
                           st.agent_at.clear();
                           return "You enter the " + room + ". " + room_overview(st);
                       } });
    }
    const Receptacle* here = s.agent_at.empty() ? nullptr : s.receptacle(s.agent_at);
    const Object* held = s.held();
    if (here)
    {
        auto name = here->name;
        if (here->openable && !here->open)
            out.push_back({ "open " + name, [name](State& st) {
                               find_receptacle(st, name)->open = true;
                               std::vector<std::string> items;
                               for (const auto& o: st.objects)
                                   if (o.location == name)
                                       items.push_back(o.name);
                               return "You open the " + name + ". In it, you see " + list_items(items) + ".";
                           } });
        if (here->openable && here->open)
            out.push_back({ "close " + name, [name](State& st) {
                               find_receptacle(st, name)->open = false;
                               return "You close the " + name + ".";
                           } });
        if (accessible(*here) && !held)
            for (const auto& o: s.objects)
                if (o.location == name)
                {
                    auto obj = o.name;
                    out.push_back({ "take " + obj + " from " + name, [obj, name](State& st) {
                                       find_object(st, obj)->location = std::string(kInventory);
                                       return "You pick up the " + obj + " from the " + name + ".";
                                   } });
                }
        if (accessible(*here) && held)
        {
            auto obj = held->name;
            out.push_back({ "put " + obj + " in " + name, [obj, name](State& st) {
                               find_object(st, obj)->location = name;
                               return "You put the " + obj + " in the " + name + ".";
                           } });
        }
        if (held)
        {
            auto verb = transform_verb(here->kind);
            if (!verb.empty())
            {
                auto obj = held->name;
                out.push_back({ verb + " " + obj + " with " + name, [verb, obj, name](State& st) {
                                   auto o = find_object(st, obj);
                                   if (verb == "clean")
                                       o->clean = true;
                                   else if (verb == "heat")
                                       o->hot = true;
                                   else
                                       o->cold = true;
                                   return "You " + verb + " the " + obj + " using the " + name + ".";
                               } });
            }
        }
        out.push_back({ "examine " + name,
                        [name](State& st) { return contents(st, *st.receptacle(name)); } });
    }
    out.push_back({ "look", [](State& st) {
                       if (st.agent_at.empty())
                           return "You are in the middle of the " + st.agent_room + ". " + room_overview(st);
                       return "You are at the " + st.agent_at + " in the " + st.agent_room + ".";
                   } });
    out.push_back({ "inventory", [](State& st) -> std::string {
                       auto h = st.held();
                       if (!h)
                           return "You are not carrying anything.";
                       return "You are carrying: a " + h->name + ".";
                   } });
    return out;
}

std::string fingerprint(const State& s)
{
    std::string out = s.agent_room + "|" + s.agent_at + "|";
    for (const auto& r: s.receptacles)
        out += r.name + (r.open ? ":o;" : ":c;");
    out += "|";
    for (const auto& o: s.objects)
        out += o.name + "@" + o.location + (o.clean ? "C" : "") + (o.hot ? "H" : "") + (o.cold ? "K" : "") + ";";
    return out;
}

GridHouse::GridHouse(State state, std::uint64_t rng_seed): _state(std::move(state)), _rng_seed(rng_seed) {}

namespace
{
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng)
{
    for (std::size_t i = items.size(); i > 1; --i)
    {
        auto j = static_cast<std::size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}
} // namespace

GridHouse GridHouse::from_world(const std::string& world_json, const TaskSpec& task, std::uint64_t shuffle_seed)
{
    auto j = nlohmann::json::parse(world_json);
    State s;
    for (const auto& room: j.at("rooms"))
    {
        auto room_name = room.at("name").get<std::string>();
        s.rooms.push_back(room_name);
        for (const auto& r: room.at("receptacles"))
        {
            Receptacle rec;
            rec.name = r.at("name").get<std::string>();
            rec.kind = r.at("kind").get<std::string>();
            rec.room = room_name;
            rec.openable = r.value("openable", false);
            rec.open = rec.openable ? r.value("open", false) : true;
            s.receptacles.push_back(std::move(rec));
        }
    }
    for (const auto& o: j.at("objects"))
    {
        Object obj;
        obj.name = o.at("name").get<std::string>();
        obj.type = o.at("type").get<std::string>();
        obj.location = o.at("location").get<std::string>();
        obj.clean = o.value("clean", false);
        obj.hot = o.value("hot", false);
        obj.cold = o.value("cold", false);
        if (!s.receptacle(obj.location))
            throw ConfigError("object " + obj.name + " placed in unknown receptacle " + obj.location);
        s.objects.push_back(std::move(obj));
    }
    s.agent_room = j.value("start_room", s.rooms.empty() ? std::string {} : s.rooms.front());
    auto spec = [&](const char* key) {
        auto it = task.success_spec.find(key);
        return it == task.success_spec.end() ? std::string {} : it->second;
    };
    s.goal = Goal { spec("object_type"), spec("transform"), spec("destination_kind") };
    if (s.goal.object_type.empty() || s.goal.destination_kind.empty())
        throw UnknownTask("gridhouse task " + task.task_id + " lacks a goal predicate");
    if (shuffle_seed != 0)
    {
        std::mt19937_64 rng(shuffle_seed);
        seeded_shuffle(s.receptacles, rng);
        seeded_shuffle(s.objects, rng);
    }
    return GridHouse(std::move(s), shuffle_seed);
}

const std::string& GridHouse::environment_id() const
{
    static const std::string id = "gridhouse";
    return id;
}

const Contract& GridHouse::base_contract() const
{
    static const Contract contract = gridhouse_contract();
    return contract;
}

std::string GridHouse::initial_observation() const
{
    if (_state.agent_at.empty())
        return "You are in the middle of the " + _state.agent_room + ". " + room_overview(_state);
    return "You are at the " + _state.agent_at + " in the " + _state.agent_room + ".";
}

std::string GridHouse::step(const Action& action)
{
    auto command = text::collapse_whitespace(action.text);
    for (auto& t: transitions(_state))
        if (t.command == command)
            return t.apply(_state);
    return std::string(kNothingHappens);
}

bool GridHouse::is_end() const
{
    return _state.goal_satisfied();
}

double GridHouse::evaluate() const
{
    return _state.goal_satisfied() ? 1.0 : 0.0;
}

EnvironmentEvidence GridHouse::evidence() const
{
    EnvironmentEvidence ev;
    for (const auto& t: transitions(_state))
        ev.admissible_actions.push_back(t.command);
    ev.no_op_phrases = { std::string(kNothingHappens) };
    ev.progress_facts["room"] = _state.agent_room;
    ev.progress_facts["location"] = _state.agent_at.empty() ? _state.agent_room : _state.agent_at;
    auto held = _state.held();
    ev.progress_facts["holding"] = held ? held->name : "";
    ev.progress_facts["holding_type"] = held ? held->type : "";
    ev.progress_facts["holding_state"] = held ? past_tense_note(*held) : "";
    std::vector<std::string> kinds;
    for (const auto& r: _state.receptacles)
        kinds.push_back(r.name + "=" + r.kind);
    ev.progress_facts["receptacle_kinds"] = text::join(kinds, ";");
    return ev;
}

std::unique_ptr<Environment> GridHouse::clone() const
{
    return std::make_unique<GridHouse>(*this);
}

std::string GridHouse::state_fingerprint() const
{
    return fingerprint(_state);
}

bool GridHouse::is_error_or_noop(std::string_view observation) const
{
    return observation == kNothingHappens;
}

std::vector<std::string> oracle_plan(const State& start)
{
    if (start.goal_satisfied())
        return {};
    const auto& goal = start.goal;
    const auto appliance_kind = appliance_for(goal.transform);

    std::vector<const Object*> targets;
    if (auto h = start.held(); h && h->type == goal.object_type)
        targets.push_back(h);
    else
        for (const auto& o: start.objects)
            if (o.type == goal.object_type)
                targets.push_back(&o);

    std::vector<const Receptacle*> appliances { nullptr };
    if (!appliance_kind.empty())
    {
        appliances.clear();
        for (const auto& r: start.receptacles)
            if (r.kind == appliance_kind)
                appliances.push_back(&r);
    }
    std::vector<const Receptacle*> destinations;
    for (const auto& r: start.receptacles)
        if (r.kind == goal.destination_kind)
            destinations.push_back(&r);

    std::vector<std::string> best;
    bool found = false;
    for (auto target: targets)
        for (auto appliance: appliances)
            for (auto dest: destinations)
            {
                if (!goal.transform.empty() && !has_transform(*target, goal.transform) && !appliance)
                    continue;
                State s = start;
                std::vector<std::string> plan;
                auto go = [&](const std::string& name) {
                    auto r = s.receptacle(name);
                    if (r->room != s.agent_room)
                    {
                        plan.push_back("go to " + r->room);
                        s.agent_room = r->room;
                        s.agent_at.clear();
                    }
                    if (s.agent_at != name)
                    {
                        plan.push_back("go to " + name);
                        s.agent_at = name;
                    }
                };
                auto ensure_open = [&](const std::string& name) {
                    auto r = find_receptacle(s, name);
                    if (r->openable && !r->open)
                    {
                        plan.push_back("open " + name);
                        r->open = true;
                    }
                };
                auto held = s.held();
                if (held && held->name != target->name)
                {
                    // Free the hands first: put the stray object back where the agent stands,
                    // or at the first receptacle of the current room.
                    std::string spot = s.agent_at;
                    if (spot.empty())
                        for (const auto& r: s.receptacles)
                            if (r.room == s.agent_room)
                            {
                                spot = r.name;
                                break;
                            }
                    go(spot);
                    ensure_open(spot);
                    plan.push_back("put " + held->name + " in " + spot);
                    find_object(s, held->name)->location = spot;
                }
                auto obj = find_object(s, target->name);
                if (obj->location != kInventory)
                {
                    auto loc = obj->location;
                    go(loc);
                    ensure_open(loc);
                    plan.push_back("take " + obj->name + " from " + loc);
                    obj->location = std::string(kInventory);
                }
                if (!goal.transform.empty() && !has_transform(*obj, goal.transform))
                {
                    go(appliance->name);
                    plan.push_back(goal.transform + " " + obj->name + " with " + appliance->name);
                }
                go(dest->name);
                ensure_open(dest->name);
                plan.push_back("put " + obj->name + " in " + dest->name);
                if (!found || plan.size() < best.size())
                {
                    best = std::move(plan);
                    found = true;
                }
            }
    return best;
}

} // namespace harness::gridhouse
