#pragma once

#include <map>
#include <optional>
#include <string>

#include "fuzz/ast.hpp"
#include "fuzz/diagnostics.hpp"
#include "fuzz/parser.hpp"

namespace fuzz {

// Result of bottom-up inference: the term's type and the pointwise-minimal
// sensitivity environment over the variables it actually uses.
struct TypingResult {
  TypePtr type;
  SensEnv env;
};

struct CheckOptions {
  // When false, the lambda and fix sensitivity bounds are not enforced.
  // Exists solely so tests can demonstrate that the metric harness detects
  // the resulting violations (CLI --unsafe).
  bool enforce_sensitivity_bounds = true;
};

using Scope = std::map<std::string, TypePtr>;

struct InferOutcome {
  std::optional<TypingResult> result;
  std::optional<Diagnostic> error;

  [[nodiscard]] bool ok() const { return result.has_value(); }
};

// Algorithmic reading of the declarative rules: every clause returns the
// result type and the minimal environment. Precondition: all types in scope
// and in annotations are well-formed under phi.
InferOutcome infer(const DefEnv& phi, const Scope& scope, const Term& term,
                   const CheckOptions& options = {});

// Checks the main expression of a parsed program under its declarations.
InferOutcome check_program(const Program& program,
                           const CheckOptions& options = {});

// Structural check of a closed value against a type. Closures are checked
// against their parameter annotation; a closure body with no captured
// variables is additionally re-checked end to end.
bool value_checks(const DefEnv& phi, const ValuePtr& value,
                  const TypeExpr& type);

}  // namespace fuzz
