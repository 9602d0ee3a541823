#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fuzz/ast.hpp"
#include "fuzz/extreal.hpp"

namespace fuzz {

// A distance, tagged exact or lower-bound. Lower bounds arise only from
// sampled function-space distances: the true distance is a supremum over the
// whole domain, so a finite probe set can only undershoot it.
struct DistanceResult {
  ExtReal value;
  bool exact = true;

  [[nodiscard]] const char* mode() const {
    return exact ? "exact" : "lower_bound";
  }
};

struct MetricConfig {
  int samples = 8;            // function-space probe arguments
  long probe_fuel = 100000;   // fuel per probe application
  std::uint64_t rng_seed = 0;
};

using ValueSubst = std::map<std::string, ValuePtr>;

// Per-type distance between two closed values:
//   real: |a - b|          unit: 0            ![r] s: r * d_s
//   s * t: sum             s & t: max         s + t: same injection or inf
//   identifiers unfold through phi once per fold layer
//   s -o t: sampled lower bound over cfg.samples generated arguments; a
//   diverging/non-diverging probe pair contributes inf, both diverging
//   (fuel-censored) contributes 0
// Throws std::logic_error on a value/type shape mismatch.
DistanceResult value_distance(const DefEnv& phi, const TypeExpr& type,
                              const ValuePtr& a, const ValuePtr& b,
                              const MetricConfig& cfg);

// Distance between substitutions under the tensor-of-scaled reading of an
// environment: the sum over variables of mul(sens, distance at the declared
// type). Throws std::invalid_argument on a missing binding.
DistanceResult env_distance(const DefEnv& phi, const SensEnv& declared,
                            const ValueSubst& s1, const ValueSubst& s2,
                            const MetricConfig& cfg);

}  // namespace fuzz
