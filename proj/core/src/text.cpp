// SPDX-License-Identifier: Apache-2.0
#include <harness/text.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace harness::text
{

namespace
{
bool is_space(char c)
{
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}
} // namespace

std::string trim(std::string_view s)
{
    auto begin = s.begin();
    auto end = s.end();
    while (begin != end && is_space(*begin))
        ++begin;
    while (end != begin && is_space(*(end - 1)))
        --end;
    return std::string(begin, end);
}

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string collapse_whitespace(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c: s)
    {
        if (is_space(c))
        {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space)
            out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

bool starts_with_icase(std::string_view s, std::string_view prefix)
{
    if (prefix.size() > s.size())
        return false;
    return to_lower(s.substr(0, prefix.size())) == to_lower(prefix);
}

bool contains_icase(std::string_view haystack, std::string_view needle)
{
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

std::vector<std::string> split_lines(std::string_view s)
{
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= s.size())
    {
        auto pos = s.find('\n', start);
        if (pos == std::string_view::npos)
        {
            lines.emplace_back(s.substr(start));
            break;
        }
        lines.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return lines;
}

std::size_t levenshtein(std::string_view a, std::string_view b)
{
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
    {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
        {
            auto subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({ prev[j] + 1, cur[j - 1] + 1, subst });
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double similarity_ratio(std::string_view a, std::string_view b)
{
    auto longest = std::max(a.size(), b.size());
    if (longest == 0)
        return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c: s)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit_interval(std::uint64_t h)
{
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

std::string format_real(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc {})
        return "nan";
    return std::string(buf, ptr);
}

std::optional<std::string> canonical_number(std::string_view s)
{
    auto t = trim(s);
    if (t.empty())
        return std::nullopt;
    std::size_t i = 0;
    if (t[0] == '-' || t[0] == '+')
        i = 1;
    bool digit = false;
    bool dot = false;
    for (; i < t.size(); ++i)
    {
        if (std::isdigit(static_cast<unsigned char>(t[i])))
            digit = true;
        else if (t[i] == '.' && !dot)
            dot = true;
        else
            return std::nullopt;
    }
    if (!digit)
        return std::nullopt;
    double value = 0.0;
    auto begin = t.data() + (t[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), value);
    if (ec != std::errc {} || ptr != t.data() + t.size())
        return std::nullopt;
    if (value == 0.0)
        value = 0.0; // folds -0
    return format_real(value);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i)
    {
        if (i > 0)
            out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

} // namespace harness::text
