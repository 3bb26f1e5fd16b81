// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <harness/diagnosis.hpp>
#include <harness/runtime.hpp>

#include <filesystem>
#include <fstream>
#include <mutex>

namespace harness
{

inline constexpr int kLogSchemaVersion = 1;

std::string serialize_record(const EpisodeRecord& record);
/// Throws SchemaVersionError for unknown versions and ConfigError for malformed lines.
EpisodeRecord parse_record(std::string_view line);

/// Appends one JSON line per episode; safe to share between worker threads.
class LogWriter
{
  public:
    explicit LogWriter(const std::filesystem::path& path);
    void append(const EpisodeRecord& record);
    [[nodiscard]] const std::filesystem::path& path() const { return _path; }

  private:
    std::filesystem::path _path;
    std::ofstream _out;
    std::mutex _mutex;
};

std::vector<EpisodeRecord> read_log(const std::filesystem::path& path);

/// Companion index path for a log: `<log>.index`.
std::filesystem::path index_path(const std::filesystem::path& log);

/// Writes the index: one `task_id<TAB>run_index<TAB>seed<TAB>episode_id<TAB>line` row per
/// record, sorted by (task_id, run_index, seed).
void write_index(const std::filesystem::path& log);

/// Log lines reordered by the index order; identical runs give identical text.
std::string sorted_log(const std::filesystem::path& log);

std::string serialize_reports(const std::vector<DiagnosisReport>& reports);

} // namespace harness
