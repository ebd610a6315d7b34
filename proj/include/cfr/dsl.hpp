// dsl.hpp — the `.cfr` text format for rulebases and fact sets.
//
// Grammar (keywords case-insensitive, `#` comments to end of line):
//
//   rulebase   := { statement }
//   statement  := rule | fact
//   rule       := "rule" IDENT "{" "if" expr "then" conclusion { "," conclusion } "}"
//   expr       := term { "or" term }          -- "and" binds tighter than "or"
//   term       := atom { "and" atom }
//   atom       := IDENT | "(" expr ")"
//   conclusion := IDENT "(" NUMBER ")"        -- NUMBER in [-1, 1], decimal
//   fact       := "fact" IDENT "=" NUMBER
//
// IDENT is a letter followed by letters, digits, or underscores. Numbers
// accept a leading sign and require a digit before any decimal point.

#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cfr/engine.hpp"

namespace cfr {

struct SourceSpan {
    int line = 1;   // 1-based
    int column = 1; // 1-based
    int length = 1;

    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ParseErrorKind {
    UnexpectedToken,
    BadNumber,      // malformed or outside [-1, 1]
    DuplicateRuleId,
    EmptyGroup,           // "()"
    DuplicateConclusion,  // one rule concluding the same proposition twice
};

struct ParseError {
    SourceSpan span;
    ParseErrorKind kind = ParseErrorKind::UnexpectedToken;
    std::string message; // names the offending lexeme
};

struct Fact {
    std::string proposition;
    CertaintyFactor cf;

    friend bool operator==(const Fact&, const Fact&) = default;
};

struct Rulebase {
    std::vector<Rule> rules;
    std::vector<Fact> facts;

    friend bool operator==(const Rulebase&, const Rulebase&) = default;
};

/// Parses a whole source text. First error wins; the parser never throws on
/// any byte input.
std::variant<Rulebase, ParseError> parse_rulebase(std::string_view source);

/// Canonical text: one statement per line, nested groups parenthesized.
/// parse_rulebase(format_rulebase(x)) is structurally equal to x.
std::string format_rulebase(const Rulebase& rulebase);

const char* to_string(ParseErrorKind kind) noexcept;

} // namespace cfr
