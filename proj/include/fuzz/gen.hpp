#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "fuzz/ast.hpp"

namespace fuzz {

// Size bounds for generated values.
struct GenLimits {
  double real_lo = -10.0;
  double real_hi = 10.0;
  int max_list_depth = 6;  // fold-nesting budget
};

// Deterministic stream derivation: same (seed, salt) gives the same stream
// on every platform.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

// Uniform draw in [lo, hi), independent of the standard library's
// distribution implementation.
double uniform_real(std::mt19937_64& rng, double lo, double hi);

// Fewest fold layers any value of the type needs; INT_MAX/2 when no finite
// value exists (e.g. `type a = a`).
int min_fold_depth(const DefEnv& phi, const TypeExpr& type);

// Generates a checker-valid value of the given first-order type; recursive
// types are bounded by max_list_depth fold layers. Throws
// std::invalid_argument on function types or when the depth budget cannot
// accommodate the type.
ValuePtr gen_value(const DefEnv& phi, const TypeExpr& type,
                   std::mt19937_64& rng, const GenLimits& limits);

// Structurally identical pair (same injections, same fold depth) whose reals
// differ by at most delta each, hence at finite distance.
std::pair<ValuePtr, ValuePtr> gen_nearby_pair(const DefEnv& phi,
                                              const TypeExpr& type,
                                              std::mt19937_64& rng,
                                              double delta,
                                              const GenLimits& limits);

}  // namespace fuzz
