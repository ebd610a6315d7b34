// Recursive-descent parser and canonical formatter for the .cfr format.

#include "cfr/dsl.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <optional>
#include <set>

namespace cfr {

namespace {

enum class TokenKind {
    Ident,
    Number,
    KwRule,
    KwIf,
    KwThen,
    KwFact,
    KwAnd,
    KwOr,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Equals,
    End,
    Bad, // unlexable byte
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string lexeme;
    double number = 0.0;
    SourceSpan span;
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) != 0; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source) {}

    Token next() {
        skip_trivia();
        Token tok;
        tok.span = {line_, column_, 1};
        if (pos_ >= src_.size()) {
            tok.kind = TokenKind::End;
            tok.lexeme = "end of input";
            return tok;
        }

        const unsigned char c = static_cast<unsigned char>(src_[pos_]);
        if (is_ident_start(c)) return lex_ident(tok);
        if (std::isdigit(c) || ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
                                 std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return lex_number(tok);
        }

        tok.lexeme = std::string(1, src_[pos_]);
        switch (c) {
        case '{': tok.kind = TokenKind::LBrace; break;
        case '}': tok.kind = TokenKind::RBrace; break;
        case '(': tok.kind = TokenKind::LParen; break;
        case ')': tok.kind = TokenKind::RParen; break;
        case ',': tok.kind = TokenKind::Comma; break;
        case '=': tok.kind = TokenKind::Equals; break;
        default: tok.kind = TokenKind::Bad; break;
        }
        advance();
        return tok;
    }

private:
    void skip_trivia() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    Token lex_ident(Token tok) {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) {
            advance();
        }
        tok.lexeme = std::string(src_.substr(start, pos_ - start));
        tok.span.length = static_cast<int>(tok.lexeme.size());
        const std::string lowered = to_lower(tok.lexeme);
        if (lowered == "rule") tok.kind = TokenKind::KwRule;
        else if (lowered == "if") tok.kind = TokenKind::KwIf;
        else if (lowered == "then") tok.kind = TokenKind::KwThen;
        else if (lowered == "fact") tok.kind = TokenKind::KwFact;
        else if (lowered == "and") tok.kind = TokenKind::KwAnd;
        else if (lowered == "or") tok.kind = TokenKind::KwOr;
        else tok.kind = TokenKind::Ident;
        return tok;
    }

    Token lex_number(Token tok) {
        const std::size_t start = pos_;
        if (src_[pos_] == '-' || src_[pos_] == '+') advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            advance();
        }
        // Consume the point only when a digit follows; "1." leaves the dot
        // behind as an unexpected token.
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            advance();
            while (pos_ < src_.size() &&
                   std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                advance();
            }
        }
        tok.lexeme = std::string(src_.substr(start, pos_ - start));
        tok.span.length = static_cast<int>(tok.lexeme.size());
        tok.kind = TokenKind::Number;

        std::string_view digits = tok.lexeme;
        if (digits.front() == '+') digits.remove_prefix(1);
        const auto [ptr, ec] =
            std::from_chars(digits.data(), digits.data() + digits.size(), tok.number);
        if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
            // Overflowing literals are still numbers, just far out of range.
            tok.number = std::numeric_limits<double>::infinity();
        }
        return tok;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view source) : lexer_(source) { shift(); }

    std::variant<Rulebase, ParseError> parse() {
        Rulebase rb;
        std::set<std::string> rule_ids;
        while (!error_) {
            if (current_.kind == TokenKind::End) break;
            if (current_.kind == TokenKind::KwRule) {
                if (auto rule = parse_rule(rule_ids)) rb.rules.push_back(std::move(*rule));
            } else if (current_.kind == TokenKind::KwFact) {
                if (auto fact = parse_fact()) rb.facts.push_back(std::move(*fact));
            } else {
                fail_unexpected("'rule' or 'fact'");
            }
        }
        if (error_) return *error_;
        return rb;
    }

private:
    void shift() { current_ = lexer_.next(); }

    void fail(ParseErrorKind kind, std::string message) {
        if (!error_) error_ = ParseError{current_.span, kind, std::move(message)};
    }

    void fail_unexpected(const std::string& expected) {
        fail(ParseErrorKind::UnexpectedToken,
             "expected " + expected + ", found '" + current_.lexeme + "'");
    }

    bool expect(TokenKind kind, const std::string& what) {
        if (current_.kind != kind) {
            fail_unexpected(what);
            return false;
        }
        shift();
        return true;
    }

    std::optional<std::string> parse_ident(const std::string& what) {
        if (current_.kind != TokenKind::Ident) {
            fail_unexpected(what);
            return std::nullopt;
        }
        std::string name = current_.lexeme;
        shift();
        return name;
    }

    std::optional<CertaintyFactor> parse_cf() {
        if (current_.kind != TokenKind::Number) {
            fail_unexpected("a number");
            return std::nullopt;
        }
        if (current_.number < -1.0 || current_.number > 1.0) {
            fail(ParseErrorKind::BadNumber,
                 "number '" + current_.lexeme + "' outside [-1, 1]");
            return std::nullopt;
        }
        const CertaintyFactor cf{current_.number};
        shift();
        return cf;
    }

    // atom := IDENT | "(" expr ")"
    std::optional<AntecedentExpr> parse_atom() {
        if (current_.kind == TokenKind::Ident) {
            auto e = AntecedentExpr::leaf(current_.lexeme);
            shift();
            return e;
        }
        if (current_.kind == TokenKind::LParen) {
            if (depth_ >= kMaxNesting) {
                fail(ParseErrorKind::UnexpectedToken, "group nesting too deep");
                return std::nullopt;
            }
            const SourceSpan open = current_.span;
            shift();
            if (current_.kind == TokenKind::RParen) {
                error_ = ParseError{open, ParseErrorKind::EmptyGroup, "empty group '()'"};
                return std::nullopt;
            }
            ++depth_;
            auto inner = parse_expr();
            --depth_;
            if (!inner) return std::nullopt;
            if (!expect(TokenKind::RParen, "')'")) return std::nullopt;
            return inner;
        }
        fail_unexpected("a proposition or '('");
        return std::nullopt;
    }

    // term := atom { "and" atom }
    std::optional<AntecedentExpr> parse_term() {
        auto first = parse_atom();
        if (!first) return std::nullopt;
        std::vector<AntecedentExpr> parts;
        parts.push_back(std::move(*first));
        while (current_.kind == TokenKind::KwAnd) {
            shift();
            auto next = parse_atom();
            if (!next) return std::nullopt;
            parts.push_back(std::move(*next));
        }
        if (parts.size() == 1) return std::move(parts.front());
        return AntecedentExpr::conjunction(std::move(parts));
    }

    // expr := term { "or" term }
    std::optional<AntecedentExpr> parse_expr() {
        auto first = parse_term();
        if (!first) return std::nullopt;
        std::vector<AntecedentExpr> parts;
        parts.push_back(std::move(*first));
        while (current_.kind == TokenKind::KwOr) {
            shift();
            auto next = parse_term();
            if (!next) return std::nullopt;
            parts.push_back(std::move(*next));
        }
        if (parts.size() == 1) return std::move(parts.front());
        return AntecedentExpr::disjunction(std::move(parts));
    }

    // conclusion := IDENT "(" NUMBER ")"
    std::optional<Conclusion> parse_conclusion() {
        auto prop = parse_ident("a conclusion proposition");
        if (!prop) return std::nullopt;
        if (!expect(TokenKind::LParen, "'('")) return std::nullopt;
        auto cf = parse_cf();
        if (!cf) return std::nullopt;
        if (!expect(TokenKind::RParen, "')'")) return std::nullopt;
        return Conclusion{std::move(*prop), *cf};
    }

    std::optional<Rule> parse_rule(std::set<std::string>& rule_ids) {
        shift(); // "rule"
        const SourceSpan id_span = current_.span;
        auto id = parse_ident("a rule id");
        if (!id) return std::nullopt;
        if (!rule_ids.insert(*id).second) {
            error_ = ParseError{id_span, ParseErrorKind::DuplicateRuleId,
                                "duplicate rule id '" + *id + "'"};
            return std::nullopt;
        }
        if (!expect(TokenKind::LBrace, "'{'")) return std::nullopt;
        if (!expect(TokenKind::KwIf, "'if'")) return std::nullopt;
        auto antecedent = parse_expr();
        if (!antecedent) return std::nullopt;
        if (!expect(TokenKind::KwThen, "'then'")) return std::nullopt;

        std::vector<Conclusion> conclusions;
        std::set<std::string> concluded;
        while (true) {
            const SourceSpan prop_span = current_.span;
            auto conclusion = parse_conclusion();
            if (!conclusion) return std::nullopt;
            if (!concluded.insert(conclusion->proposition).second) {
                error_ = ParseError{prop_span, ParseErrorKind::DuplicateConclusion,
                                    "rule '" + *id + "' concludes '" +
                                        conclusion->proposition + "' twice"};
                return std::nullopt;
            }
            conclusions.push_back(std::move(*conclusion));
            if (current_.kind != TokenKind::Comma) break;
            shift();
        }
        if (!expect(TokenKind::RBrace, "'}'")) return std::nullopt;
        return Rule(std::move(*id), std::move(*antecedent), std::move(conclusions));
    }

    std::optional<Fact> parse_fact() {
        shift(); // "fact"
        auto prop = parse_ident("a proposition");
        if (!prop) return std::nullopt;
        if (!expect(TokenKind::Equals, "'='")) return std::nullopt;
        auto cf = parse_cf();
        if (!cf) return std::nullopt;
        return Fact{std::move(*prop), *cf};
    }

    static constexpr int kMaxNesting = 200;

    Lexer lexer_;
    Token current_;
    std::optional<ParseError> error_;
    int depth_ = 0;
};

std::string format_number(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, result.ptr);
}

void format_expr(const AntecedentExpr& expr, std::string& out) {
    switch (expr.kind()) {
    case AntecedentExpr::Kind::Leaf:
        out += expr.proposition();
        return;
    case AntecedentExpr::Kind::And:
    case AntecedentExpr::Kind::Or: {
        const char* joiner = expr.kind() == AntecedentExpr::Kind::And ? " and " : " or ";
        bool first = true;
        for (const auto& child : expr.children()) {
            if (!first) out += joiner;
            first = false;
            if (child.kind() == AntecedentExpr::Kind::Leaf) {
                format_expr(child, out);
            } else {
                out += '(';
                format_expr(child, out);
                out += ')';
            }
        }
        return;
    }
    }
}

} // namespace

std::variant<Rulebase, ParseError> parse_rulebase(std::string_view source) {
    return Parser(source).parse();
}

std::string format_rulebase(const Rulebase& rulebase) {
    std::string out;
    for (const auto& rule : rulebase.rules) {
        out += "rule " + rule.id() + " { if ";
        format_expr(rule.antecedent(), out);
        out += " then ";
        bool first = true;
        for (const auto& conclusion : rule.conclusions()) {
            if (!first) out += ", ";
            first = false;
            out += conclusion.proposition + " (" + format_number(conclusion.max_cf.value()) + ")";
        }
        out += " }\n";
    }
    for (const auto& fact : rulebase.facts) {
        out += "fact " + fact.proposition + " = " + format_number(fact.cf.value()) + "\n";
    }
    return out;
}

const char* to_string(ParseErrorKind kind) noexcept {
    switch (kind) {
    case ParseErrorKind::UnexpectedToken: return "unexpected token";
    case ParseErrorKind::BadNumber: return "bad number";
    case ParseErrorKind::DuplicateRuleId: return "duplicate rule id";
    case ParseErrorKind::EmptyGroup: return "empty group";
    case ParseErrorKind::DuplicateConclusion: return "duplicate conclusion";
    }
    return "?";
}

} // namespace cfr
