#include "fuzz/metric_tester.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "fuzz/gen.hpp"

namespace fuzz {

namespace {

constexpr int kProbeSamples = 8;

// Output distance strictly above the scaled input distance, outside the
// relative tolerance band. Infinite input passes everything.
bool exceeds(ExtReal output, ExtReal input, double tolerance) {
  if (input.is_infinite()) return false;
  if (output.is_infinite()) return true;
  return output.raw() > input.raw() * (1.0 + tolerance);
}

nlohmann::json extreal_json(ExtReal v) {
  if (v.is_infinite()) return "inf";
  return v.raw();
}

nlohmann::json distance_json(const DistanceResult& d) {
  return {{"value", extreal_json(d.value)}, {"mode", d.mode()}};
}

const char* outcome_name(Outcome::Kind kind) {
  switch (kind) {
    case Outcome::Kind::Terminated:
      return "terminated";
    case Outcome::Kind::FuelExhausted:
      return "fuel_exhausted";
    case Outcome::Kind::Stuck:
      return "stuck";
  }
  return "unknown";
}

}  // namespace

const char* verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Violation:
      return "violation";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

std::vector<TrialReport> check_metric_preservation(
    const Program& program, const GenConfig& cfg,
    const CheckOptions& check_options) {
  if (cfg.trials < 1) {
    throw std::invalid_argument("check_metric_preservation: trials must be >= 1");
  }
  InferOutcome checked = check_program(program, check_options);
  if (!checked.ok()) {
    throw std::invalid_argument("check_metric_preservation: program rejected: " +
                                checked.error->message);
  }
  for (const auto& [name, type] : program.freevars) {
    if (mentions_lolli(program.typedefs, *type)) {
      throw std::invalid_argument(
          "check_metric_preservation: declared variable '" + name +
          "' has a function type; substitution generation needs first-order types");
    }
    if (min_fold_depth(program.typedefs, *type) > cfg.max_list_depth) {
      throw std::invalid_argument(
          "check_metric_preservation: no value of the type of '" + name +
          "' fits in max_list_depth " + std::to_string(cfg.max_list_depth));
    }
  }

  // Environment distance uses the inferred minimal sensitivities over the
  // declared variables; unused variables sit at sensitivity 0.
  SensEnv declared;
  for (const auto& [name, type] : program.freevars) {
    declared.set(name, {checked.result->env.sens_or_zero(name), type});
  }
  const TypeExpr& result_type = *checked.result->type;
  GenLimits limits{cfg.real_lo, cfg.real_hi, cfg.max_list_depth};

  std::vector<TrialReport> reports;
  reports.reserve(static_cast<std::size_t>(cfg.trials));
  for (int trial = 0; trial < cfg.trials; ++trial) {
    TrialReport report;
    report.trial = trial;

    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
    ValueSubst left, right;
    ValueEnv env_left, env_right;
    for (const auto& [name, type] : program.freevars) {
      auto [v1, v2] =
          gen_nearby_pair(program.typedefs, *type, rng, cfg.perturb_delta, limits);
      report.inputs.push_back({name, value_to_string(v1), value_to_string(v2)});
      left.emplace(name, v1);
      right.emplace(name, v2);
      env_left = env_left.extend(name, std::move(v1));
      env_right = env_right.extend(name, std::move(v2));
    }

    MetricConfig metric_cfg{kProbeSamples, cfg.fuel,
                            derive_seed(cfg.seed, 0x70726f6265ULL + trial)};
    report.input_distance =
        env_distance(program.typedefs, declared, left, right, metric_cfg);

    Outcome out_left = eval(program.typedefs, env_left, *program.main, cfg.fuel);
    Outcome out_right = eval(program.typedefs, env_right, *program.main, cfg.fuel);
    report.outcome_left = out_left.kind;
    report.outcome_right = out_right.kind;

    if (out_left.kind == Outcome::Kind::Stuck ||
        out_right.kind == Outcome::Kind::Stuck) {
      report.verdict = Verdict::Violation;
      report.reason = "evaluation got stuck (implementation bug): " +
                      (out_left.kind == Outcome::Kind::Stuck
                           ? out_left.stuck_reason
                           : out_right.stuck_reason);
    } else if (out_left.is_terminated() && out_right.is_terminated()) {
      report.output_distance = value_distance(
          program.typedefs, result_type, out_left.value, out_right.value,
          metric_cfg);
      if (report.input_distance.exact &&
          exceeds(report.output_distance->value, report.input_distance.value,
                  cfg.tolerance)) {
        report.verdict = Verdict::Violation;
        report.reason = "output distance " +
                        report.output_distance->value.to_string() +
                        " exceeds input distance " +
                        report.input_distance.value.to_string();
      } else {
        report.verdict = Verdict::Pass;
      }
    } else if (!out_left.is_terminated() && !out_right.is_terminated()) {
      report.verdict = Verdict::Inconclusive;
      report.reason = "fuel exhausted on both sides";
    } else if (report.input_distance.exact &&
               !report.input_distance.value.is_infinite()) {
      // Inputs at finite distance must agree on termination.
      report.verdict = Verdict::Violation;
      report.reason = "termination disagreement at finite input distance";
    } else {
      report.verdict = Verdict::Pass;
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

HarnessSummary summarize(const std::vector<TrialReport>& reports) {
  HarnessSummary summary;
  for (const auto& report : reports) {
    switch (report.verdict) {
      case Verdict::Pass:
        ++summary.passes;
        break;
      case Verdict::Violation:
        ++summary.violations;
        break;
      case Verdict::Inconclusive:
        ++summary.inconclusive;
        break;
    }
  }
  return summary;
}

std::string harness_report_json(const std::string& program_name,
                                const GenConfig& cfg,
                                const std::vector<TrialReport>& reports) {
  HarnessSummary summary = summarize(reports);
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& report : reports) {
    if (report.verdict != Verdict::Violation) continue;
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& input : report.inputs) {
      inputs.push_back({{"var", input.variable},
                        {"left", input.left},
                        {"right", input.right}});
    }
    nlohmann::json entry = {
        {"trial", report.trial},
        {"inputs", std::move(inputs)},
        {"input_distance", distance_json(report.input_distance)},
        {"outcomes", {outcome_name(report.outcome_left),
                      outcome_name(report.outcome_right)}},
        {"verdict", verdict_name(report.verdict)},
        {"reason", report.reason},
    };
    if (report.output_distance) {
      entry["output_distance"] = distance_json(*report.output_distance);
    }
    violations.push_back(std::move(entry));
  }
  nlohmann::json doc = {
      {"program", program_name},
      {"seed", cfg.seed},
      {"trials", static_cast<int>(reports.size())},
      {"passes", summary.passes},
      {"violations", std::move(violations)},
      {"inconclusive", summary.inconclusive},
      {"config",
       {{"real_range", {cfg.real_lo, cfg.real_hi}},
        {"perturb_delta", cfg.perturb_delta},
        {"max_list_depth", cfg.max_list_depth},
        {"trials", cfg.trials},
        {"fuel", cfg.fuel},
        {"tolerance", cfg.tolerance},
        {"seed", cfg.seed}}},
  };
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Fixed-point bound fixture

std::string decaying_map_source(ExtReal r) {
  if (r.is_infinite() || r.raw() >= 1.0) {
    throw std::invalid_argument("decaying_map_source: r must be < 1");
  }
  // The checker compares the box index against the fix scaling bitwise, so
  // the declared index must be exactly the double the checker computes.
  ExtReal s(1.0 / (1.0 - r.raw()));
  std::string rs = r.to_string();
  std::string src;
  src += "type dlist = unit + real * ![" + rs + "] dlist\n";
  src += "var fb : ![" + s.to_string() + "] (real -o real)\n";
  src += "var l : dlist\n";
  src += "(let !f = fb in\n";
  src += " fix[" + rs + "] m (xs : dlist) : dlist =>\n";
  src += "   case unfold xs of\n";
  src += "     inl u => fold[dlist] (inl[real * ![" + rs + "] dlist] ())\n";
  src += "   | inr p => let (x, t) = p in\n";
  src += "              let !rest = t in\n";
  src += "              fold[dlist] (inr[unit] ((f x, ![" + rs +
         "] (m rest))))) l\n";
  return src;
}

namespace {

ValuePtr nil_list() { return make_value(FoldV{make_value(InjV{true, make_value(UnitV{})})}); }

ValuePtr cons_list(double head, ValuePtr tail) {
  return make_value(FoldV{make_value(InjV{
      false, make_value(TensorV{make_value(RealV{head}),
                                make_value(BoxV{std::move(tail)})})})});
}

}  // namespace

FixBoundReport check_fix_bound(ExtReal r, int list_len, double delta,
                               const GenConfig& cfg) {
  if (r.is_infinite() || r.raw() >= 1.0) {
    throw std::invalid_argument("check_fix_bound: r must be < 1");
  }
  if (list_len < 0) {
    throw std::invalid_argument("check_fix_bound: negative list length");
  }
  ParseResult parsed = parse_program(decaying_map_source(r));
  if (!parsed.ok()) {
    throw std::logic_error("check_fix_bound: internal program failed to parse: " +
                           parsed.diagnostics.front().message);
  }
  const Program& program = *parsed.program;
  InferOutcome checked = check_program(program);
  if (!checked.ok()) {
    throw std::logic_error("check_fix_bound: internal program rejected: " +
                           checked.error->message);
  }

  // f1 = id, f2 = shift by delta; both 1-sensitive.
  ParseResult f1 = parse_program("fun (x : real) => x");
  ParseResult f2 = parse_program("fun (x : real) => x + " + format_real(delta));
  Outcome c1 = eval(program.typedefs, ValueEnv(), *f1.program->main, 10);
  Outcome c2 = eval(program.typedefs, ValueEnv(), *f2.program->main, 10);

  std::mt19937_64 rng(derive_seed(cfg.seed, 0x666978ULL));
  ValuePtr list = nil_list();
  for (int i = 0; i < list_len; ++i) {
    list = cons_list(uniform_real(rng, cfg.real_lo, cfg.real_hi), list);
  }

  ValueEnv env_left =
      ValueEnv().extend("fb", make_value(BoxV{c1.value})).extend("l", list);
  ValueEnv env_right =
      ValueEnv().extend("fb", make_value(BoxV{c2.value})).extend("l", list);
  Outcome out_left = eval(program.typedefs, env_left, *program.main, cfg.fuel);
  Outcome out_right = eval(program.typedefs, env_right, *program.main, cfg.fuel);
  if (!out_left.is_terminated() || !out_right.is_terminated()) {
    throw std::logic_error("check_fix_bound: map did not terminate in fuel");
  }

  MetricConfig metric_cfg{kProbeSamples, cfg.fuel, cfg.seed};
  const TypeExpr& dlist = *checked.result->type;  // dlist (map result type)
  FixBoundReport report;
  report.r = r;
  report.delta = delta;
  report.list_len = list_len;
  report.output_distance = value_distance(program.typedefs, dlist,
                                          out_left.value, out_right.value,
                                          metric_cfg);
  report.bound = mul(ExtReal(1.0 / (1.0 - r.raw())), ExtReal(std::fabs(delta)));
  report.ok = !exceeds(report.output_distance.value, report.bound, cfg.tolerance);
  return report;
}

std::string fix_bound_report_json(const FixBoundReport& report) {
  nlohmann::json doc = {
      {"r", extreal_json(report.r)},
      {"delta", report.delta},
      {"list_len", report.list_len},
      {"output_distance", distance_json(report.output_distance)},
      {"bound", extreal_json(report.bound)},
      {"ok", report.ok},
  };
  return doc.dump(2);
}

}  // namespace fuzz
