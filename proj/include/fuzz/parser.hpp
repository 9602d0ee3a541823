#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fuzz/ast.hpp"
#include "fuzz/diagnostics.hpp"

namespace fuzz {

// A parsed .fuzz file: type definitions, free-variable declarations, and the
// main expression.
struct Program {
  DefEnv typedefs;
  std::vector<std::pair<std::string, TypePtr>> freevars;
  TermPtr main;

  [[nodiscard]] const TypePtr* freevar_type(std::string_view name) const;
};

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;

  [[nodiscard]] bool ok() const { return program.has_value(); }
};

// Parses UTF-8 text in the .fuzz grammar; `#` starts a line comment.
// First-error reporting: on failure, diagnostics holds one entry whose span
// points into the input.
ParseResult parse_program(std::string_view text);

// Canonical concrete syntax. parse_program(pretty(p)) yields a Program
// structurally equal to p (modulo spans).
std::string pretty(const Program& program);
std::string pretty_type(const TypeExpr& type);
std::string pretty_type(const TypePtr& type);
std::string pretty_term(const Term& term);

// Shortest decimal that round-trips through the lexer.
std::string format_real(double value);

bool program_equal(const Program& a, const Program& b);

// First-order value literals for CLI --input and reports:
//   vlit := DECIMAL | "()" | "(" vlit "," vlit ")" | "<" vlit "," vlit ">"
//         | "!" vlit | "inl" vlit | "inr" vlit | "fold" vlit
// Returns null and sets *error on malformed input.
ValuePtr parse_value_literal(std::string_view text, std::string* error);

// Inverse of parse_value_literal; closures print as "<closure>".
std::string value_to_string(const ValuePtr& value);

}  // namespace fuzz
