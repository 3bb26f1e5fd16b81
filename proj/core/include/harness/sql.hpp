// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace harness::sql
{

enum class ColumnType
{
    Integer,
    Real,
    Text
};

using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Column
{
    std::string name;
    ColumnType type = ColumnType::Text;

    bool operator==(const Column&) const = default;
};

struct Table
{
    std::string name;
    std::vector<Column> columns;
    std::vector<std::vector<Value>> rows;

    [[nodiscard]] std::optional<std::size_t> column_index(std::string_view column) const;
    bool operator==(const Table&) const = default;
};

struct Database
{
    std::vector<Table> tables;

    Table* find(std::string_view name);
    [[nodiscard]] const Table* find(std::string_view name) const;
    bool operator==(const Database&) const = default;
};

enum class StatementKind
{
    Select,
    Aggregate,
    Insert,
    Update,
    Delete
};

struct QueryResult
{
    bool ok = false;
    std::string error;
    StatementKind kind = StatementKind::Select;
    std::size_t affected = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;

    [[nodiscard]] bool is_mutation() const
    {
        return kind == StatementKind::Insert || kind == StatementKind::Update || kind == StatementKind::Delete;
    }
};

/// Keywords that must be backtick-quoted when used as identifiers.
const std::vector<std::string>& reserved_words();
bool is_reserved(std::string_view word);

/// True for identifiers that cannot appear bare: containing spaces or equal to a reserved word.
bool needs_quoting(std::string_view identifier);

/// Executes one statement of the subset grammar:
///   SELECT cols | * | COUNT(*) | MAX/MIN/SUM/AVG(col) FROM t [WHERE c op lit [AND ...]]
///          [ORDER BY col [ASC|DESC]] [LIMIT n]
///   INSERT INTO t VALUES (...)[, (...)]
///   UPDATE t SET col = lit[, ...] [WHERE ...]
///   DELETE FROM t [WHERE ...]
/// Failed statements leave the database untouched.
QueryResult execute(Database& db, std::string_view statement);

/// True when `statement` is accepted by the grammar (no schema checks).
bool parses(std::string_view statement);

/// Read-only execution; mutations are rejected.
QueryResult query(const Database& db, std::string_view statement);

std::string render_value(const Value& v, bool quote_text);

/// Observation text for a result: bare scalar for 1x1 results, a list of tuples otherwise,
/// "Query OK, N rows affected." for mutations, or the error message.
std::string render_result(const QueryResult& result);

ColumnType parse_column_type(std::string_view name);
std::string column_type_name(ColumnType type);

} // namespace harness::sql
