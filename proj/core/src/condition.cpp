// SPDX-License-Identifier: Apache-2.0
#include <harness/condition.hpp>
#include <harness/errors.hpp>
#include <harness/text.hpp>

#include <algorithm>
#include <cctype>
#include <regex>
#include <variant>

namespace harness
{

std::string Bindings::scalar(const std::string& name) const
{
    auto it = scalars.find(name);
    return it == scalars.end() ? std::string {} : it->second;
}

struct Condition::Node
{
    enum class Kind
    {
        Or,
        And,
        Not,
        Truthy,
        Equal,
        NotEqual,
        In,
        NotIn,
        Matches,
        Contains,
        Constant
    };
    Kind kind = Kind::Constant;
    std::vector<std::shared_ptr<const Node>> children;
    std::string field;
    std::string literal;
    std::vector<std::string> list;
    std::string set_field;
    std::shared_ptr<const std::regex> pattern;
    bool constant = true;
};

namespace
{

using Node = Condition::Node;
using NodePtr = std::shared_ptr<const Node>;

struct Token
{
    enum class Type
    {
        Word,
        String,
        Symbol,
        End
    };
    Type type;
    std::string text;
};

std::vector<Token> lex(const std::string& s)
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
        if (c == '\'' || c == '"')
        {
            std::string lit;
            ++i;
            bool closed = false;
            while (i < s.size())
            {
                if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == c || s[i + 1] == '\\'))
                {
                    lit += s[i + 1];
                    i += 2;
                    continue;
                }
                if (s[i] == c)
                {
                    closed = true;
                    ++i;
                    break;
                }
                lit += s[i++];
            }
            if (!closed)
                throw ConditionSyntaxError("unterminated string literal in: " + s);
            out.push_back({ Token::Type::String, lit });
            continue;
        }
        if (c == '=' || c == '!')
        {
            if (i + 1 < s.size() && s[i + 1] == '=')
            {
                out.push_back({ Token::Type::Symbol, s.substr(i, 2) });
                i += 2;
                continue;
            }
            throw ConditionSyntaxError("unexpected '" + std::string(1, c) + "' in: " + s);
        }
        if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',')
        {
            out.push_back({ Token::Type::Symbol, std::string(1, c) });
            ++i;
            continue;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')
        {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.'))
                ++j;
            out.push_back({ Token::Type::Word, s.substr(i, j - i) });
            i = j;
            continue;
        }
        throw ConditionSyntaxError("unexpected character '" + std::string(1, c) + "' in: " + s);
    }
    out.push_back({ Token::Type::End, {} });
    return out;
}

const std::vector<std::string>& scalar_fields()
{
    static const std::vector<std::string> fields { "raw",       "tool",           "action",        "parsed",
                                                   "known_tool", "missing_required", "has_admissible", "blocked_before" };
    return fields;
}

bool is_scalar_field(const std::string& name)
{
    if (name.rfind("arg.", 0) == 0 || name.rfind("fact.", 0) == 0)
        return name.find('.') + 1 < name.size();
    const auto& f = scalar_fields();
    return std::find(f.begin(), f.end(), name) != f.end();
}

bool is_set_field(const std::string& name)
{
    return name == "admissible" || name == "tools";
}

class Parser
{
  public:
    Parser(const std::string& source): _source(source), _tokens(lex(source)) {}

    NodePtr parse()
    {
        auto n = expr();
        if (peek().type != Token::Type::End)
            fail("trailing input '" + peek().text + "'");
        return n;
    }

  private:
    const Token& peek() const { return _tokens[_pos]; }
    Token next() { return _tokens[_pos++]; }
    bool is_word(const char* w) const { return peek().type == Token::Type::Word && peek().text == w; }
    bool is_symbol(const char* s) const { return peek().type == Token::Type::Symbol && peek().text == s; }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConditionSyntaxError(msg + " in condition: " + _source);
    }

    NodePtr expr()
    {
        auto left = term();
        if (!is_word("or"))
            return left;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Or;
        n->children.push_back(left);
        while (is_word("or"))
        {
            next();
            n->children.push_back(term());
        }
        return n;
    }

    NodePtr term()
    {
        auto left = factor();
        if (!is_word("and"))
            return left;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::And;
        n->children.push_back(left);
        while (is_word("and"))
        {
            next();
            n->children.push_back(factor());
        }
        return n;
    }

    NodePtr factor()
    {
        if (is_word("not"))
        {
            next();
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Not;
            n->children.push_back(factor());
            return n;
        }
        if (is_symbol("("))
        {
            next();
            auto n = expr();
            if (!is_symbol(")"))
                fail("expected ')'");
            next();
            return n;
        }
        if (is_word("true") || is_word("false"))
        {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Constant;
            n->constant = next().text == "true";
            return n;
        }
        if (peek().type != Token::Type::Word)
            fail("expected a field");
        auto field = next().text;
        if (!is_scalar_field(field))
            fail("unknown field '" + field + "'");
        auto n = std::make_shared<Node>();
        n->field = field;
        if (is_symbol("=="))
        {
            next();
            n->kind = Node::Kind::Equal;
            n->literal = literal();
        }
        else if (is_symbol("!="))
        {
            next();
            n->kind = Node::Kind::NotEqual;
            n->literal = literal();
        }
        else if (is_word("matches"))
        {
            next();
            n->kind = Node::Kind::Matches;
            n->literal = literal();
            try
            {
                n->pattern = std::make_shared<const std::regex>(n->literal, std::regex::icase | std::regex::ECMAScript);
            }
            catch (const std::regex_error&)
            {
                fail("bad regular expression '" + n->literal + "'");
            }
        }
        else if (is_word("contains"))
        {
            next();
            n->kind = Node::Kind::Contains;
            n->literal = literal();
        }
        else if (is_word("in") || is_word("not"))
        {
            bool negated = next().text == "not";
            if (negated)
            {
                if (!is_word("in"))
                    fail("expected 'in' after 'not'");
                next();
            }
            n->kind = negated ? Node::Kind::NotIn : Node::Kind::In;
            set_operand(*n);
        }
        else
            n->kind = Node::Kind::Truthy;
        return n;
    }

    std::string literal()
    {
        if (peek().type != Token::Type::String)
            fail("expected a quoted literal");
        return next().text;
    }

    void set_operand(Node& n)
    {
        if (is_symbol("["))
        {
            next();
            if (is_symbol("]"))
            {
                next();
                return;
            }
            while (true)
            {
                n.list.push_back(literal());
                if (is_symbol(","))
                {
                    next();
                    continue;
                }
                if (is_symbol("]"))
                {
                    next();
                    return;
                }
                fail("expected ',' or ']'");
            }
        }
        if (peek().type == Token::Type::Word && is_set_field(peek().text))
        {
            n.set_field = next().text;
            return;
        }
        fail("expected a list or a set field after 'in'");
    }

    const std::string& _source;
    std::vector<Token> _tokens;
    std::size_t _pos = 0;
};

bool eval(const Node& n, const Bindings& b)
{
    switch (n.kind)
    {
    case Node::Kind::Constant:
        return n.constant;
    case Node::Kind::Or:
        return std::any_of(n.children.begin(), n.children.end(), [&](const NodePtr& c) { return eval(*c, b); });
    case Node::Kind::And:
        return std::all_of(n.children.begin(), n.children.end(), [&](const NodePtr& c) { return eval(*c, b); });
    case Node::Kind::Not:
        return !eval(*n.children.front(), b);
    case Node::Kind::Truthy:
        return b.scalar(n.field) == "true";
    case Node::Kind::Equal:
        return b.scalar(n.field) == n.literal;
    case Node::Kind::NotEqual:
        return b.scalar(n.field) != n.literal;
    case Node::Kind::Matches:
        return std::regex_search(b.scalar(n.field), *n.pattern);
    case Node::Kind::Contains:
        return text::contains_icase(b.scalar(n.field), n.literal);
    case Node::Kind::In:
    case Node::Kind::NotIn: {
        auto v = b.scalar(n.field);
        bool found = false;
        if (!n.set_field.empty())
        {
            auto it = b.sets.find(n.set_field);
            found = it != b.sets.end() && std::find(it->second.begin(), it->second.end(), v) != it->second.end();
        }
        else
            found = std::find(n.list.begin(), n.list.end(), v) != n.list.end();
        return n.kind == Node::Kind::In ? found : !found;
    }
    }
    return false;
}

} // namespace

Condition::Condition(): _source("true"), _root(std::make_shared<Node>()) {}

Condition Condition::parse(const std::string& source)
{
    Condition c;
    c._source = source;
    c._root = Parser(source).parse();
    return c;
}

bool Condition::evaluate(const Bindings& bindings) const
{
    return eval(*_root, bindings);
}

} // namespace harness
