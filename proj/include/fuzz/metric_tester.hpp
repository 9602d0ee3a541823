#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fuzz/ast.hpp"
#include "fuzz/checker.hpp"
#include "fuzz/evaluator.hpp"
#include "fuzz/parser.hpp"
#include "fuzz/value_metrics.hpp"

namespace fuzz {

struct GenConfig {
  double real_lo = -10.0;
  double real_hi = 10.0;
  double perturb_delta = 0.5;
  int max_list_depth = 6;
  int trials = 1000;
  long fuel = 100000;
  double tolerance = 1e-9;  // relative, over the input distance
  std::uint64_t seed = 0;
};

enum class Verdict { Pass, Violation, Inconclusive };

const char* verdict_name(Verdict verdict);

struct TrialInput {
  std::string variable;
  std::string left;   // serialized value
  std::string right;
};

struct TrialReport {
  int trial = 0;
  std::vector<TrialInput> inputs;
  DistanceResult input_distance;
  Outcome::Kind outcome_left = Outcome::Kind::Stuck;
  Outcome::Kind outcome_right = Outcome::Kind::Stuck;
  std::optional<DistanceResult> output_distance;
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;
};

// Runs cfg.trials metric-preservation trials: draws a nearby substitution
// pair per declared variable, compares the output distance at the result
// type against the environment distance under the inferred sensitivities.
// Trial i is fully determined by (cfg.seed, i). Throws std::invalid_argument
// before any trial when the program does not check or a declared type is not
// first-order.
std::vector<TrialReport> check_metric_preservation(
    const Program& program, const GenConfig& cfg,
    const CheckOptions& check_options = {});

struct HarnessSummary {
  int passes = 0;
  int violations = 0;
  int inconclusive = 0;
};

HarnessSummary summarize(const std::vector<TrialReport>& reports);

// JSON report (violations listed in full; infinity serialized as "inf").
std::string harness_report_json(const std::string& program_name,
                                const GenConfig& cfg,
                                const std::vector<TrialReport>& reports);

// Fixed-point sensitivity bound fixture: runs `map f1 l` vs `map f2 l` over
// a decaying list (element scaling r), where f1 = id and f2 shifts by delta,
// and checks output distance <= delta / (1 - r).
struct FixBoundReport {
  ExtReal r;
  double delta = 0.0;
  int list_len = 0;
  DistanceResult output_distance;
  ExtReal bound;
  bool ok = false;
};

// Precondition: r < 1.
FixBoundReport check_fix_bound(ExtReal r, int list_len, double delta,
                               const GenConfig& cfg);

std::string fix_bound_report_json(const FixBoundReport& report);

// The decaying-list map program used by the fix-bound fixture; exposed so
// tests and the CLI can check it directly.
std::string decaying_map_source(ExtReal r);

}  // namespace fuzz
