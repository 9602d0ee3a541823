#pragma once

#include <string>
#include <string_view>

namespace fuzz {

// Source position, 1-based.
struct Span {
  int line = 1;
  int col = 1;
};

enum class DiagKind {
  Lex,
  Syntax,
  Type,
  Sensitivity,
  Unbound,
};

std::string_view diag_kind_name(DiagKind kind);

struct Diagnostic {
  Span span;
  DiagKind kind = DiagKind::Syntax;
  std::string message;

  // "file:line:col: kind: message"
  [[nodiscard]] std::string render(std::string_view file) const;
};

}  // namespace fuzz
