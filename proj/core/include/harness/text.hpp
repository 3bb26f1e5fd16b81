// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace harness::text
{

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Trims and collapses internal whitespace runs into single spaces.
std::string collapse_whitespace(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);
bool contains_icase(std::string_view haystack, std::string_view needle);

std::vector<std::string> split_lines(std::string_view s);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - distance / max(len); two empty strings are identical.
double similarity_ratio(std::string_view a, std::string_view b);

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// splitmix64 step, used to derive independent seeds from (seed, salt) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Maps a hash to [0, 1).
double unit_interval(std::uint64_t h);

/// Canonical form of a numeric answer: "3.0" -> "3", "2.50" -> "2.5". Returns nullopt for non-numbers.
std::optional<std::string> canonical_number(std::string_view s);

/// Shortest round-trip decimal rendering of a double.
std::string format_real(double v);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace harness::text
