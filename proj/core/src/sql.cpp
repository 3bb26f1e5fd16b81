// SPDX-License-Identifier: Apache-2.0
#include <harness/sql.hpp>
#include <harness/text.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

namespace harness::sql
{

std::optional<std::size_t> Table::column_index(std::string_view column) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == column)
            return i;
    return std::nullopt;
}

Table* Database::find(std::string_view name)
{
    for (auto& t: tables)
        if (t.name == name)
            return &t;
    return nullptr;
}

const Table* Database::find(std::string_view name) const
{
    for (const auto& t: tables)
        if (t.name == name)
            return &t;
    return nullptr;
}

const std::vector<std::string>& reserved_words()
{
    static const std::vector<std::string> words {
        "select", "from",  "where", "and",    "or",  "not", "order", "by",    "asc",   "desc",
        "limit",  "insert", "into", "values", "update", "set", "delete", "count", "max", "min",
        "sum",    "avg",   "like",  "null",   "group", "key", "rank",  "table", "is",    "in",
    };
    return words;
}

bool is_reserved(std::string_view word)
{
    static const std::set<std::string> words(reserved_words().begin(), reserved_words().end());
    return words.contains(text::to_lower(word));
}

bool needs_quoting(std::string_view identifier)
{
    return identifier.find(' ') != std::string_view::npos || is_reserved(identifier);
}

ColumnType parse_column_type(std::string_view name)
{
    auto n = text::to_lower(name);
    if (n == "integer" || n == "int")
        return ColumnType::Integer;
    if (n == "real" || n == "float" || n == "double")
        return ColumnType::Real;
    if (n == "text" || n == "string")
        return ColumnType::Text;
    throw std::invalid_argument("unknown column type '" + std::string(name) + "'");
}

std::string column_type_name(ColumnType type)
{
    switch (type)
    {
        case ColumnType::Integer: return "integer";
        case ColumnType::Real: return "real";
        case ColumnType::Text: return "text";
    }
    return "text";
}

namespace
{

struct SqlError: std::runtime_error
{
    using std::runtime_error::runtime_error;
};

[[noreturn]] void syntax_error(std::string_view near)
{
    throw SqlError("Error: You have an error in your SQL syntax near '" + std::string(near) + "'.");
}

enum class TokKind
{
    Word,       // bare identifier or keyword
    Quoted,     // `identifier`
    String,     // 'literal'
    Number,
    Symbol,
    End
};

struct Token
{
    TokKind kind;
    std::string text;
};

std::vector<Token> lex(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size())
    {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c)))
        {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
        {
            auto start = i;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
                ++i;
            out.push_back({ TokKind::Word, std::string(s.substr(start, i - start)) });
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))
            || (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))))
        {
            auto start = i++;
            while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'))
                ++i;
            out.push_back({ TokKind::Number, std::string(s.substr(start, i - start)) });
            continue;
        }
        if (c == '`')
        {
            auto close = s.find('`', i + 1);
            if (close == std::string_view::npos)
                syntax_error(s.substr(i));
            out.push_back({ TokKind::Quoted, std::string(s.substr(i + 1, close - i - 1)) });
            i = close + 1;
            continue;
        }
        if (c == '\'')
        {
            std::string value;
            ++i;
            bool closed = false;
            while (i < s.size())
            {
                if (s[i] == '\'')
                {
                    if (i + 1 < s.size() && s[i + 1] == '\'')
                    {
                        value += '\'';
                        i += 2;
                        continue;
                    }
                    closed = true;
                    ++i;
                    break;
                }
                value += s[i++];
            }
            if (!closed)
                syntax_error(value);
            out.push_back({ TokKind::String, value });
            continue;
        }
        if (c == '!' || c == '<' || c == '>')
        {
            if (i + 1 < s.size() && (s[i + 1] == '=' || (c == '<' && s[i + 1] == '>')))
            {
                auto op = std::string(s.substr(i, 2));
                out.push_back({ TokKind::Symbol, op == "<>" ? "!=" : op });
                i += 2;
                continue;
            }
            if (c == '!')
                syntax_error(s.substr(i));
            out.push_back({ TokKind::Symbol, std::string(1, c) });
            ++i;
            continue;
        }
        if (c == '=' || c == ',' || c == '(' || c == ')' || c == '*' || c == ';')
        {
            out.push_back({ TokKind::Symbol, std::string(1, c) });
            ++i;
            continue;
        }
        syntax_error(s.substr(i, 10));
    }
    out.push_back({ TokKind::End, "" });
    return out;
}

enum class Agg
{
    None,
    Count,
    Max,
    Min,
    Sum,
    Avg
};

struct Condition
{
    std::string column;
    std::string op;
    Value literal;
};

struct Statement
{
    StatementKind kind = StatementKind::Select;
    std::string table;
    bool star = false;
    std::vector<std::string> columns;
    Agg agg = Agg::None;
    std::string agg_column;
    std::vector<Condition> where;
    std::optional<std::string> order_column;
    bool order_desc = false;
    std::optional<std::int64_t> limit;
    std::vector<std::vector<Value>> insert_rows;
    std::vector<std::pair<std::string, Value>> assignments;
};

class Parser
{
  public:
    explicit Parser(std::vector<Token> tokens): _t(std::move(tokens)) {}

    Statement parse()
    {
        Statement st;
        if (accept_kw("select"))
            parse_select(st);
        else if (accept_kw("insert"))
            parse_insert(st);
        else if (accept_kw("update"))
            parse_update(st);
        else if (accept_kw("delete"))
            parse_delete(st);
        else
            syntax_error(peek().text);
        accept_sym(";");
        if (peek().kind != TokKind::End)
            syntax_error(peek().text);
        return st;
    }

  private:
    std::vector<Token> _t;
    std::size_t _i = 0;

    const Token& peek() const { return _t[_i]; }
    Token next() { return _t[_i < _t.size() - 1 ? _i++ : _i]; }

    bool is_kw(std::string_view kw) const
    {
        return peek().kind == TokKind::Word && text::to_lower(peek().text) == kw;
    }
    bool accept_kw(std::string_view kw)
    {
        if (!is_kw(kw))
            return false;
        ++_i;
        return true;
    }
    void expect_kw(std::string_view kw)
    {
        if (!accept_kw(kw))
            syntax_error(peek().text);
    }
    bool accept_sym(std::string_view sym)
    {
        if (peek().kind == TokKind::Symbol && peek().text == sym)
        {
            ++_i;
            return true;
        }
        return false;
    }
    void expect_sym(std::string_view sym)
    {
        if (!accept_sym(sym))
            syntax_error(peek().text);
    }

    std::string identifier()
    {
        const auto& tok = peek();
        if (tok.kind == TokKind::Quoted)
            return next().text;
        if (tok.kind == TokKind::Word && !is_reserved(tok.text))
            return next().text;
        syntax_error(tok.text);
    }

    Value literal()
    {
        auto tok = next();
        if (tok.kind == TokKind::String)
            return tok.text;
        if (tok.kind == TokKind::Word && text::to_lower(tok.text) == "null")
            return std::monostate {};
        if (tok.kind == TokKind::Number)
        {
            if (tok.text.find('.') == std::string::npos)
            {
                std::int64_t v = 0;
                auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
                if (ec == std::errc {} && p == tok.text.data() + tok.text.size())
                    return v;
            }
            double d = 0.0;
            auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), d);
            if (ec == std::errc {} && p == tok.text.data() + tok.text.size())
                return d;
        }
        syntax_error(tok.text);
    }

    void parse_where(Statement& st)
    {
        if (!accept_kw("where"))
            return;
        do
        {
            Condition c;
            c.column = identifier();
            if (accept_kw("like"))
                c.op = "like";
            else if (peek().kind == TokKind::Symbol
                     && (peek().text == "=" || peek().text == "!=" || peek().text == "<" || peek().text == ">"
                         || peek().text == "<=" || peek().text == ">="))
                c.op = next().text;
            else
                syntax_error(peek().text);
            c.literal = literal();
            st.where.push_back(std::move(c));
        } while (accept_kw("and"));
    }

    void parse_select(Statement& st)
    {
        static const std::vector<std::pair<std::string_view, Agg>> aggs {
            { "count", Agg::Count }, { "max", Agg::Max }, { "min", Agg::Min }, { "sum", Agg::Sum }, { "avg", Agg::Avg },
        };
        st.kind = StatementKind::Select;
        bool matched_agg = false;
        for (const auto& [kw, agg]: aggs)
        {
            if (!accept_kw(kw))
                continue;
            matched_agg = true;
            st.kind = StatementKind::Aggregate;
            st.agg = agg;
            expect_sym("(");
            if (agg == Agg::Count)
                expect_sym("*");
            else
                st.agg_column = identifier();
            expect_sym(")");
            break;
        }
        if (!matched_agg)
        {
            if (accept_sym("*"))
                st.star = true;
            else
            {
                st.columns.push_back(identifier());
                while (accept_sym(","))
                    st.columns.push_back(identifier());
            }
        }
        expect_kw("from");
        st.table = identifier();
        parse_where(st);
        if (accept_kw("order"))
        {
            expect_kw("by");
            st.order_column = identifier();
            if (accept_kw("desc"))
                st.order_desc = true;
            else
                accept_kw("asc");
        }
        if (accept_kw("limit"))
        {
            auto tok = next();
            std::int64_t n = -1;
            if (tok.kind == TokKind::Number)
                std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), n);
            if (n < 0)
                syntax_error(tok.text);
            st.limit = n;
        }
    }

    void parse_insert(Statement& st)
    {
        st.kind = StatementKind::Insert;
        expect_kw("into");
        st.table = identifier();
        expect_kw("values");
        do
        {
            expect_sym("(");
            std::vector<Value> row;
            row.push_back(literal());
            while (accept_sym(","))
                row.push_back(literal());
            expect_sym(")");
            st.insert_rows.push_back(std::move(row));
        } while (accept_sym(","));
    }

    void parse_update(Statement& st)
    {
        st.kind = StatementKind::Update;
        st.table = identifier();
        expect_kw("set");
        do
        {
            auto col = identifier();
            expect_sym("=");
            st.assignments.emplace_back(col, literal());
        } while (accept_sym(","));
        parse_where(st);
    }

    void parse_delete(Statement& st)
    {
        st.kind = StatementKind::Delete;
        expect_kw("from");
        st.table = identifier();
        parse_where(st);
    }
};

bool is_null(const Value& v)
{
    return std::holds_alternative<std::monostate>(v);
}

std::optional<double> as_number(const Value& v)
{
    if (auto i = std::get_if<std::int64_t>(&v))
        return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&v))
        return *d;
    if (auto s = std::get_if<std::string>(&v))
    {
        auto canon = text::canonical_number(*s);
        if (!canon)
            return std::nullopt;
        double d = 0.0;
        std::from_chars(canon->data(), canon->data() + canon->size(), d);
        return d;
    }
    return std::nullopt;
}

/// Three-way comparison; nullopt when either side is NULL or the types are incomparable.
std::optional<int> compare(const Value& a, const Value& b)
{
    if (is_null(a) || is_null(b))
        return std::nullopt;
    auto sa = std::get_if<std::string>(&a);
    auto sb = std::get_if<std::string>(&b);
    if (sa && sb)
        return *sa < *sb ? -1 : (*sa > *sb ? 1 : 0);
    if (auto ia = std::get_if<std::int64_t>(&a))
        if (auto ib = std::get_if<std::int64_t>(&b))
            return *ia < *ib ? -1 : (*ia > *ib ? 1 : 0);
    auto na = as_number(a);
    auto nb = as_number(b);
    if (!na || !nb)
        return std::nullopt;
    return *na < *nb ? -1 : (*na > *nb ? 1 : 0);
}

bool like_match(std::string_view value, std::string_view pattern)
{
    // Iterative wildcard match with backtracking on the last '%'.
    std::size_t v = 0, p = 0, star = std::string_view::npos, mark = 0;
    auto eq = [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    };
    while (v < value.size())
    {
        if (p < pattern.size() && (pattern[p] == '_' || (pattern[p] != '%' && eq(pattern[p], value[v]))))
        {
            ++v;
            ++p;
        }
        else if (p < pattern.size() && pattern[p] == '%')
        {
            star = p++;
            mark = v;
        }
        else if (star != std::string_view::npos)
        {
            p = star + 1;
            v = ++mark;
        }
        else
            return false;
    }
    while (p < pattern.size() && pattern[p] == '%')
        ++p;
    return p == pattern.size();
}

bool matches(const Condition& c, const Value& v)
{
    if (c.op == "like")
    {
        if (is_null(v) || is_null(c.literal))
            return false;
        return like_match(render_value(v, false), render_value(c.literal, false));
    }
    auto cmp = compare(v, c.literal);
    if (!cmp)
        return false;
    if (c.op == "=")
        return *cmp == 0;
    if (c.op == "!=")
        return *cmp != 0;
    if (c.op == "<")
        return *cmp < 0;
    if (c.op == ">")
        return *cmp > 0;
    if (c.op == "<=")
        return *cmp <= 0;
    return *cmp >= 0;
}

std::size_t require_column(const Table& t, const std::string& name)
{
    auto idx = t.column_index(name);
    if (!idx)
        throw SqlError("Error: Unknown column '" + name + "'.");
    return *idx;
}

Value coerce(const Column& col, const Value& v)
{
    if (is_null(v))
        return v;
    switch (col.type)
    {
        case ColumnType::Integer:
            if (std::holds_alternative<std::int64_t>(v))
                return v;
            break;
        case ColumnType::Real:
            if (auto i = std::get_if<std::int64_t>(&v))
                return static_cast<double>(*i);
            if (std::holds_alternative<double>(v))
                return v;
            break;
        case ColumnType::Text:
            if (std::holds_alternative<std::string>(v))
                return v;
            break;
    }
    throw SqlError("Error: Incorrect value for column '" + col.name + "'.");
}

std::vector<std::size_t> filter_rows(const Table& t, const std::vector<Condition>& where)
{
    std::vector<std::pair<std::size_t, const Condition*>> bound;
    for (const auto& c: where)
        bound.emplace_back(require_column(t, c.column), &c);
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        bool ok = true;
        for (const auto& [idx, cond]: bound)
            ok = ok && matches(*cond, t.rows[r][idx]);
        if (ok)
            out.push_back(r);
    }
    return out;
}

QueryResult run_select(const Table& t, const Statement& st)
{
    QueryResult res;
    res.kind = st.kind;
    auto rows = filter_rows(t, st.where);

    if (st.kind == StatementKind::Aggregate)
    {
        Value out;
        if (st.agg == Agg::Count)
        {
            res.columns = { "COUNT(*)" };
            out = static_cast<std::int64_t>(rows.size());
        }
        else
        {
            auto idx = require_column(t, st.agg_column);
            const auto& col = t.columns[idx];
            static const char* names[] = { "", "COUNT", "MAX", "MIN", "SUM", "AVG" };
            res.columns = { std::string(names[static_cast<int>(st.agg)]) + "(" + col.name + ")" };
            if ((st.agg == Agg::Sum || st.agg == Agg::Avg) && col.type == ColumnType::Text)
                throw SqlError("Error: " + res.columns[0] + " requires a numeric column.");
            std::vector<Value> values;
            for (auto r: rows)
                if (!is_null(t.rows[r][idx]))
                    values.push_back(t.rows[r][idx]);
            if (!values.empty())
            {
                if (st.agg == Agg::Max || st.agg == Agg::Min)
                {
                    out = values.front();
                    for (const auto& v: values)
                    {
                        auto c = compare(v, out);
                        if (c && ((st.agg == Agg::Max && *c > 0) || (st.agg == Agg::Min && *c < 0)))
                            out = v;
                    }
                }
                else if (st.agg == Agg::Sum && col.type == ColumnType::Integer)
                {
                    std::int64_t sum = 0;
                    for (const auto& v: values)
                        sum += std::get<std::int64_t>(v);
                    out = sum;
                }
                else
                {
                    double sum = 0.0;
                    for (const auto& v: values)
                        sum += *as_number(v);
                    out = st.agg == Agg::Sum ? sum : sum / static_cast<double>(values.size());
                }
            }
        }
        res.rows = { { out } };
        res.ok = true;
        return res;
    }

    std::vector<std::size_t> cols;
    if (st.star)
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            cols.push_back(i);
    else
        for (const auto& c: st.columns)
            cols.push_back(require_column(t, c));
    for (auto c: cols)
        res.columns.push_back(t.columns[c].name);

    if (st.order_column)
    {
        auto idx = require_column(t, *st.order_column);
        std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            const auto& va = t.rows[a][idx];
            const auto& vb = t.rows[b][idx];
            // NULL sorts first ascending.
            int c = 0;
            if (is_null(va) || is_null(vb))
                c = is_null(va) == is_null(vb) ? 0 : (is_null(va) ? -1 : 1);
            else
                c = compare(va, vb).value_or(0);
            return st.order_desc ? c > 0 : c < 0;
        });
    }
    if (st.limit && rows.size() > static_cast<std::size_t>(*st.limit))
        rows.resize(static_cast<std::size_t>(*st.limit));
    for (auto r: rows)
    {
        std::vector<Value> out;
        for (auto c: cols)
            out.push_back(t.rows[r][c]);
        res.rows.push_back(std::move(out));
    }
    res.ok = true;
    return res;
}

QueryResult run(Database& db, const Statement& st, bool allow_mutation)
{
    Table* table = db.find(st.table);
    if (!table)
        throw SqlError("Error: Table '" + st.table + "' doesn't exist.");
    if (st.kind == StatementKind::Select || st.kind == StatementKind::Aggregate)
        return run_select(*table, st);
    if (!allow_mutation)
        throw SqlError("Error: read-only connection.");

    QueryResult res;
    res.kind = st.kind;
    Table staged = *table;
    if (st.kind == StatementKind::Insert)
    {
        for (const auto& row: st.insert_rows)
        {
            if (row.size() != staged.columns.size())
                throw SqlError("Error: Column count doesn't match value count.");
            std::vector<Value> coerced;
            for (std::size_t i = 0; i < row.size(); ++i)
                coerced.push_back(coerce(staged.columns[i], row[i]));
            staged.rows.push_back(std::move(coerced));
        }
        res.affected = st.insert_rows.size();
    }
    else if (st.kind == StatementKind::Update)
    {
        std::vector<std::pair<std::size_t, Value>> sets;
        for (const auto& [col, v]: st.assignments)
        {
            auto idx = require_column(staged, col);
            sets.emplace_back(idx, coerce(staged.columns[idx], v));
        }
        auto rows = filter_rows(staged, st.where);
        for (auto r: rows)
            for (const auto& [idx, v]: sets)
                staged.rows[r][idx] = v;
        res.affected = rows.size();
    }
    else
    {
        auto rows = filter_rows(staged, st.where);
        std::vector<bool> drop(staged.rows.size(), false);
        for (auto r: rows)
            drop[r] = true;
        std::vector<std::vector<Value>> kept;
        for (std::size_t r = 0; r < staged.rows.size(); ++r)
            if (!drop[r])
                kept.push_back(std::move(staged.rows[r]));
        staged.rows = std::move(kept);
        res.affected = rows.size();
    }
    *table = std::move(staged);
    res.ok = true;
    return res;
}

QueryResult execute_impl(Database& db, std::string_view statement, bool allow_mutation)
{
    try
    {
        Parser parser(lex(statement));
        auto st = parser.parse();
        return run(db, st, allow_mutation);
    }
    catch (const SqlError& e)
    {
        QueryResult res;
        res.ok = false;
        res.error = e.what();
        return res;
    }
}

} // namespace

QueryResult execute(Database& db, std::string_view statement)
{
    return execute_impl(db, statement, true);
}

bool parses(std::string_view statement)
{
    try
    {
        Parser parser(lex(statement));
        parser.parse();
        return true;
    }
    catch (const SqlError&)
    {
        return false;
    }
}

QueryResult query(const Database& db, std::string_view statement)
{
    auto copy = db;
    return execute_impl(copy, statement, false);
}

std::string render_value(const Value& v, bool quote_text)
{
    if (is_null(v))
        return "NULL";
    if (auto i = std::get_if<std::int64_t>(&v))
        return std::to_string(*i);
    if (auto d = std::get_if<double>(&v))
    {
        auto s = text::format_real(*d);
        if (std::isfinite(*d) && s.find_first_of(".e") == std::string::npos)
            s += ".0";
        return s;
    }
    const auto& s = std::get<std::string>(v);
    if (!quote_text)
        return s;
    std::string out = "'";
    for (char c: s)
    {
        if (c == '\'' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + "'";
}

std::string render_result(const QueryResult& result)
{
    if (!result.ok)
        return result.error;
    if (result.is_mutation())
        return "Query OK, " + std::to_string(result.affected) + " rows affected.";
    if (result.rows.size() == 1 && result.rows[0].size() == 1)
        return render_value(result.rows[0][0], false);
    std::string out = "[";
    for (std::size_t r = 0; r < result.rows.size(); ++r)
    {
        if (r > 0)
            out += ", ";
        out += "(";
        const auto& row = result.rows[r];
        for (std::size_t c = 0; c < row.size(); ++c)
        {
            if (c > 0)
                out += ", ";
            out += render_value(row[c], true);
        }
        if (row.size() == 1)
            out += ",";
        out += ")";
    }
    return out + "]";
}

} // namespace harness::sql
