#pragma once

#include <string>

#include "fuzz/ast.hpp"

namespace fuzz {

// Result of fuel-bounded evaluation. Stuck never occurs for terms accepted
// by the checker; reaching it from typed code indicates a checker bug.
struct Outcome {
  enum class Kind { Terminated, FuelExhausted, Stuck };

  Kind kind = Kind::Stuck;
  ValuePtr value;            // set when Terminated
  long fuel_used = 0;
  std::string stuck_reason;  // set when Stuck

  static Outcome terminated(ValuePtr v, long fuel_used);
  static Outcome fuel_exhausted(long fuel_used);
  static Outcome stuck(std::string reason, long fuel_used);

  [[nodiscard]] bool is_terminated() const {
    return kind == Kind::Terminated;
  }
};

// Deterministic call-by-value big-step evaluation, left to right. Each rule
// application consumes one fuel unit; reaching fuel 0 yields FuelExhausted.
// Tail positions (closure entry, let and case bodies) run in constant stack.
// phi is unused at runtime (fold/unfold are pure casts) but kept so the
// signature matches the checker's.
Outcome eval(const DefEnv& phi, const ValueEnv& env, const Term& term,
             long fuel);

// Applies a closure value to an argument; used by function-space probing.
Outcome apply_closure(const ValuePtr& fn, const ValuePtr& arg, long fuel);

}  // namespace fuzz
