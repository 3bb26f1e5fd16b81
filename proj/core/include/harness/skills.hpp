// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace harness
{

struct TaskSpec;

struct Skill
{
    std::string skill_id;
    std::string environment_id;
    std::vector<std::string> task_type_tags;
    std::string title;
    std::string body;

    bool operator==(const Skill&) const = default;
};

struct Bm25Params
{
    double k1 = 1.2;
    double b = 0.75;
};

/// Thirty common English words removed before indexing and querying.
const std::vector<std::string>& default_stopwords();

/// Lowercases, splits on non-alphanumeric runs, drops tokens shorter than two
/// characters and stopwords.
std::vector<std::string> tokenize(std::string_view text);

/// Skill memory with Okapi BM25 statistics over title + body.
class SkillLibrary
{
  public:
    SkillLibrary() = default;
    explicit SkillLibrary(std::vector<Skill> skills, Bm25Params params = {});

    [[nodiscard]] const std::vector<Skill>& skills() const { return _skills; }
    [[nodiscard]] std::size_t size() const { return _skills.size(); }
    [[nodiscard]] const Bm25Params& params() const { return _params; }

    [[nodiscard]] std::size_t document_frequency(const std::string& token) const;
    [[nodiscard]] std::size_t document_length(std::size_t index) const { return _doc_lengths.at(index); }
    [[nodiscard]] double average_length() const { return _avg_length; }

    /// Okapi BM25 of the query against skill `index`; duplicate query tokens count repeatedly.
    [[nodiscard]] double score(const std::vector<std::string>& query_tokens, std::size_t index) const;
    [[nodiscard]] double score(const std::vector<std::string>& query_tokens, const Skill& skill) const;

    bool operator==(const SkillLibrary& other) const;

  private:
    std::vector<Skill> _skills;
    Bm25Params _params;
    std::vector<std::map<std::string, std::size_t>> _term_counts;
    std::vector<std::size_t> _doc_lengths;
    std::map<std::string, std::size_t> _doc_freq;
    double _avg_length = 0.0;
};

/// Task type parsed from an instruction, used as the retrieval pre-filter
/// ("clean", "heat", "cool", "pick" for gridhouse; "mutation", "count", "aggregate", "select" for minidb).
std::string classify_task_type(std::string_view environment_id, std::string_view instruction);

/// Top-k skills for a task: environment filter, task-type pre-filter, (score desc, id asc), zero scores dropped.
std::vector<Skill> retrieve(const TaskSpec& task, const SkillLibrary& library, std::size_t k);

inline constexpr std::string_view kSkillsHeader = "=== RELEVANT SKILLS ===";
inline constexpr std::string_view kSkillsFooter = "=== END SKILLS ===";

TaskSpec inject(const TaskSpec& task, const std::vector<Skill>& skills);

/// Parses a skill document: YAML front-matter between `---` lines, then the body.
Skill parse_skill_document(std::string_view document);
std::string write_skill_document(const Skill& skill);

/// Loads every `*.md` file of a directory, sorted by filename.
std::vector<Skill> load_skill_directory(const std::filesystem::path& dir);

} // namespace harness
