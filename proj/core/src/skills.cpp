// SPDX-License-Identifier: Apache-2.0
#include <harness/errors.hpp>
#include <harness/task.hpp>
#include <harness/skills.hpp>
#include <harness/text.hpp>

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace harness
{

const std::vector<std::string>& default_stopwords()
{
    static const std::vector<std::string> words {
        "a",    "an",   "the",  "and",  "or",   "of",   "to",   "in",   "on",   "at",
        "for",  "with", "from", "by",   "is",   "are",  "was",  "be",   "it",   "this",
        "that", "as",   "into", "then", "than", "your", "you",  "we",   "do",   "its",
    };
    return words;
}

std::vector<std::string> tokenize(std::string_view input)
{
    static const std::set<std::string> stop(default_stopwords().begin(), default_stopwords().end());
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2 && !stop.contains(current))
            tokens.push_back(current);
        current.clear();
    };
    for (unsigned char c: input)
    {
        if (std::isalnum(c))
            current.push_back(static_cast<char>(std::tolower(c)));
        else
            flush();
    }
    flush();
    return tokens;
}

SkillLibrary::SkillLibrary(std::vector<Skill> skills, Bm25Params params):
    _skills(std::move(skills)), _params(params)
{
    std::set<std::string> ids;
    std::size_t total = 0;
    for (const auto& skill: _skills)
    {
        if (skill.body.empty())
            throw ConfigError("skill '" + skill.skill_id + "' has an empty body");
        if (!ids.insert(skill.skill_id).second)
            throw ConfigError("duplicate skill id '" + skill.skill_id + "'");
        auto tokens = tokenize(skill.title + " " + skill.body);
        std::map<std::string, std::size_t> counts;
        for (const auto& t: tokens)
            ++counts[t];
        for (const auto& [t, _]: counts)
            ++_doc_freq[t];
        _doc_lengths.push_back(tokens.size());
        total += tokens.size();
        _term_counts.push_back(std::move(counts));
    }
    _avg_length = _skills.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(_skills.size());
}

std::size_t SkillLibrary::document_frequency(const std::string& token) const
{
    auto it = _doc_freq.find(token);
    return it == _doc_freq.end() ? 0 : it->second;
}

double SkillLibrary::score(const std::vector<std::string>& query_tokens, std::size_t index) const
{
    const auto& counts = _term_counts.at(index);
    const auto n = static_cast<double>(_skills.size());
    const auto norm = _avg_length > 0.0 ? static_cast<double>(_doc_lengths[index]) / _avg_length : 0.0;
    double total = 0.0;
    for (const auto& token: query_tokens)
    {
        auto it = counts.find(token);
        if (it == counts.end())
            continue;
        const auto df = static_cast<double>(document_frequency(token));
        const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
        const auto tf = static_cast<double>(it->second);
        total += idf * tf * (_params.k1 + 1.0) / (tf + _params.k1 * (1.0 - _params.b + _params.b * norm));
    }
    return total;
}

double SkillLibrary::score(const std::vector<std::string>& query_tokens, const Skill& skill) const
{
    for (std::size_t i = 0; i < _skills.size(); ++i)
        if (_skills[i].skill_id == skill.skill_id)
            return score(query_tokens, i);
    return 0.0;
}

bool SkillLibrary::operator==(const SkillLibrary& other) const
{
    return _skills == other._skills && _doc_freq == other._doc_freq && _doc_lengths == other._doc_lengths
           && _term_counts == other._term_counts && _avg_length == other._avg_length;
}

std::string classify_task_type(std::string_view environment_id, std::string_view instruction)
{
    auto words = tokenize(instruction);
    auto has = [&](std::initializer_list<std::string_view> keys) {
        return std::any_of(words.begin(), words.end(), [&](const std::string& w) {
            return std::find(keys.begin(), keys.end(), w) != keys.end();
        });
    };
    if (environment_id == "gridhouse")
    {
        if (has({ "clean", "cleaned", "wash", "washed" }))
            return "clean";
        if (has({ "hot", "heat", "heated", "warm" }))
            return "heat";
        if (has({ "cool", "cold", "cooled", "chill", "chilled" }))
            return "cool";
        return "pick";
    }
    if (environment_id == "minidb")
    {
        if (has({ "insert", "add", "update", "change", "set", "delete", "remove", "record", "raise", "lower" }))
            return "mutation";
        if (text::contains_icase(instruction, "how many") || has({ "count", "number" }))
            return "count";
        if (has({ "maximum", "minimum", "average", "sum", "total", "highest", "lowest", "largest", "smallest", "max", "min" }))
            return "aggregate";
        return "select";
    }
    return {};
}

std::vector<Skill> retrieve(const TaskSpec& task, const SkillLibrary& library, std::size_t k)
{
    if (k == 0)
        throw ConfigError("retrieve requires k >= 1");
    const auto& skills = library.skills();
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < skills.size(); ++i)
        if (skills[i].environment_id == task.environment_id)
            candidates.push_back(i);

    auto type = classify_task_type(task.environment_id, task.instruction);
    auto tagged = [&](std::size_t i) {
        const auto& tags = skills[i].task_type_tags;
        return std::find(tags.begin(), tags.end(), type) != tags.end();
    };
    if (!type.empty() && std::any_of(candidates.begin(), candidates.end(), tagged))
        std::erase_if(candidates, [&](std::size_t i) { return !tagged(i); });

    auto query = tokenize(task.instruction);
    std::vector<std::pair<double, std::size_t>> scored;
    for (auto i: candidates)
    {
        auto s = library.score(query, i);
        if (s > 0.0)
            scored.emplace_back(s, i);
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return skills[a.second].skill_id < skills[b.second].skill_id;
    });
    std::vector<Skill> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i)
        out.push_back(skills[scored[i].second]);
    return out;
}

TaskSpec inject(const TaskSpec& task, const std::vector<Skill>& skills)
{
    if (skills.empty())
        return task;
    TaskSpec out = task;
    out.instruction += "\n\n" + std::string(kSkillsHeader) + "\n";
    for (const auto& skill: skills)
        out.instruction += "[Skill: " + skill.title + "]\n" + skill.body + "\n";
    out.instruction += std::string(kSkillsFooter);
    return out;
}

Skill parse_skill_document(std::string_view document)
{
    auto lines = text::split_lines(document);
    if (lines.empty() || text::trim(lines[0]) != "---")
        throw ConfigError("skill document lacks front-matter");
    std::size_t end = 1;
    while (end < lines.size() && text::trim(lines[end]) != "---")
        ++end;
    if (end >= lines.size())
        throw ConfigError("skill document front-matter is not terminated");
    std::string front;
    for (std::size_t i = 1; i < end; ++i)
        front += lines[i] + "\n";
    YAML::Node node = YAML::Load(front);
    Skill skill;
    skill.skill_id = node["skill_id"].as<std::string>("");
    skill.environment_id = node["environment_id"].as<std::string>("");
    skill.title = node["title"].as<std::string>("");
    if (auto tags = node["task_type_tags"]; tags && tags.IsSequence())
        for (const auto& t: tags)
            skill.task_type_tags.push_back(t.as<std::string>());
    std::vector<std::string> body_lines(lines.begin() + static_cast<std::ptrdiff_t>(end) + 1, lines.end());
    skill.body = text::trim(text::join(body_lines, "\n"));
    if (skill.skill_id.empty() || skill.body.empty())
        throw ConfigError("skill document requires skill_id and a non-empty body");
    return skill;
}

std::string write_skill_document(const Skill& skill)
{
    std::string out = "---\nskill_id: " + skill.skill_id + "\nenvironment_id: " + skill.environment_id
                      + "\ntask_type_tags: [" + text::join(skill.task_type_tags, ", ") + "]\ntitle: \""
                      + skill.title + "\"\n---\n" + skill.body + "\n";
    return out;
}

std::vector<Skill> load_skill_directory(const std::filesystem::path& dir)
{
    std::vector<std::filesystem::path> files;
    for (const auto& entry: std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".md")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Skill> skills;
    for (const auto& f: files)
    {
        std::ifstream in(f);
        std::stringstream ss;
        ss << in.rdbuf();
        skills.push_back(parse_skill_document(ss.str()));
    }
    return skills;
}

} // namespace harness
