#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuzz/checker.hpp"
#include "fuzz/evaluator.hpp"
#include "fuzz/metric_tester.hpp"
#include "fuzz/parser.hpp"
#include "fuzz/value_metrics.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTypeError = 1;
constexpr int kExitParseError = 2;
constexpr int kExitFuelExhausted = 3;
constexpr int kExitViolation = 4;
constexpr int kExitUsage = 64;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct LoadedProgram {
  fuzz::Program program;
  fuzz::TypingResult typing;
};

// Parses and checks; on failure prints the diagnostic and returns the exit
// code through `code` (and the diagnostic through `out_diag` when non-null).
std::optional<LoadedProgram> load_program(const std::string& path,
                                          const fuzz::CheckOptions& options,
                                          int& code,
                                          fuzz::Diagnostic* out_diag = nullptr) {
  std::optional<std::string> text = read_file(path);
  if (!text) {
    std::cerr << path << ": cannot read file\n";
    code = kExitUsage;
    return std::nullopt;
  }
  fuzz::ParseResult parsed = fuzz::parse_program(*text);
  if (!parsed.ok()) {
    std::cerr << parsed.diagnostics.front().render(path) << '\n';
    if (out_diag != nullptr) *out_diag = parsed.diagnostics.front();
    code = kExitParseError;
    return std::nullopt;
  }
  fuzz::InferOutcome checked = fuzz::check_program(*parsed.program, options);
  if (!checked.ok()) {
    std::cerr << checked.error->render(path) << '\n';
    if (out_diag != nullptr) *out_diag = *checked.error;
    code = kExitTypeError;
    return std::nullopt;
  }
  return LoadedProgram{std::move(*parsed.program), std::move(*checked.result)};
}

void print_sens(const LoadedProgram& loaded, bool with_type) {
  if (with_type) {
    std::cout << "type: " << fuzz::pretty_type(loaded.typing.type) << '\n';
  }
  for (const auto& [name, type] : loaded.program.freevars) {
    std::cout << name << " = "
              << loaded.typing.env.sens_or_zero(name).to_string() << '\n';
  }
}

nlohmann::json extreal_json(fuzz::ExtReal v) {
  if (v.is_infinite()) return "inf";
  return v.raw();
}

bool write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << path << ": cannot write report\n";
    return false;
  }
  out << doc.dump(2) << '\n';
  return true;
}

int cmd_check(const std::string& path, const fuzz::CheckOptions& options,
              bool sens_only, const std::string& json_out) {
  int code = kExitOk;
  fuzz::Diagnostic diag;
  std::optional<LoadedProgram> loaded =
      load_program(path, options, code, &diag);
  if (!json_out.empty() && code != kExitUsage) {
    nlohmann::json doc;
    if (loaded) {
      nlohmann::json env = nlohmann::json::object();
      for (const auto& [name, type] : loaded->program.freevars) {
        env[name] = extreal_json(loaded->typing.env.sens_or_zero(name));
      }
      doc = {{"ok", true},
             {"type", fuzz::pretty_type(loaded->typing.type)},
             {"env", std::move(env)}};
    } else {
      doc = {{"ok", false},
             {"error",
              {{"file", path},
               {"line", diag.span.line},
               {"col", diag.span.col},
               {"kind", fuzz::diag_kind_name(diag.kind)},
               {"message", diag.message}}}};
    }
    if (!write_json(json_out, doc)) return kExitUsage;
  }
  if (!loaded) return code;
  print_sens(*loaded, /*with_type=*/!sens_only);
  return kExitOk;
}

int cmd_run(const std::string& path, const std::vector<std::string>& inputs,
            long fuel, const fuzz::CheckOptions& options) {
  int code = kExitOk;
  std::optional<LoadedProgram> loaded = load_program(path, options, code);
  if (!loaded) return code;

  fuzz::ValueEnv env;
  std::vector<std::string> bound;
  for (const std::string& binding : inputs) {
    std::size_t eq = binding.find('=');
    if (eq == std::string::npos) {
      std::cerr << "--input expects NAME=VALUE, got '" << binding << "'\n";
      return kExitUsage;
    }
    std::string name = binding.substr(0, eq);
    const fuzz::TypePtr* declared = loaded->program.freevar_type(name);
    if (declared == nullptr) {
      std::cerr << "--input names undeclared variable '" << name << "'\n";
      return kExitUsage;
    }
    std::string error;
    fuzz::ValuePtr value = fuzz::parse_value_literal(binding.substr(eq + 1), &error);
    if (!value) {
      std::cerr << "invalid value for '" << name << "': " << error << '\n';
      return kExitTypeError;
    }
    if (!fuzz::value_checks(loaded->program.typedefs, value, **declared)) {
      std::cerr << "input '" << name << "' does not have declared type "
                << fuzz::pretty_type(*declared) << '\n';
      return kExitTypeError;
    }
    env = env.extend(name, std::move(value));
    bound.push_back(name);
  }
  for (const auto& [name, type] : loaded->program.freevars) {
    if (std::find(bound.begin(), bound.end(), name) == bound.end()) {
      std::cerr << "missing --input for declared variable '" << name << "'\n";
      return kExitUsage;
    }
  }

  fuzz::Outcome outcome =
      fuzz::eval(loaded->program.typedefs, env, *loaded->program.main, fuel);
  switch (outcome.kind) {
    case fuzz::Outcome::Kind::Terminated:
      std::cout << fuzz::value_to_string(outcome.value) << '\n';
      return kExitOk;
    case fuzz::Outcome::Kind::FuelExhausted:
      std::cerr << "fuel exhausted after " << outcome.fuel_used << " steps\n";
      return kExitFuelExhausted;
    case fuzz::Outcome::Kind::Stuck:
      std::cerr << "evaluation got stuck (checker bug?): "
                << outcome.stuck_reason << '\n';
      return kExitTypeError;
  }
  return kExitTypeError;
}

int cmd_test(const std::string& path, const fuzz::GenConfig& cfg,
             const std::string& json_out, const fuzz::CheckOptions& options) {
  int code = kExitOk;
  std::optional<LoadedProgram> loaded = load_program(path, options, code);
  if (!loaded) return code;

  std::vector<fuzz::TrialReport> reports;
  try {
    reports = fuzz::check_metric_preservation(loaded->program, cfg, options);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kExitTypeError;
  }
  fuzz::HarnessSummary summary = fuzz::summarize(reports);
  std::cout << "trials=" << reports.size() << " passes=" << summary.passes
            << " violations=" << summary.violations
            << " inconclusive=" << summary.inconclusive << '\n';
  for (const auto& report : reports) {
    if (report.verdict != fuzz::Verdict::Violation) continue;
    std::cout << "violation at trial " << report.trial << ": " << report.reason
              << '\n';
  }
  if (!json_out.empty()) {
    std::ofstream out(json_out, std::ios::binary);
    if (!out) {
      std::cerr << json_out << ": cannot write report\n";
      return kExitUsage;
    }
    out << fuzz::harness_report_json(path, cfg, reports) << '\n';
  }
  return summary.violations == 0 ? kExitOk : kExitViolation;
}

int cmd_fixbound(double r, int len, double delta, const fuzz::GenConfig& cfg,
                 const std::string& json_out) {
  fuzz::FixBoundReport report;
  try {
    report = fuzz::check_fix_bound(fuzz::ExtReal(r), len, delta, cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }
  std::cout << "output_distance=" << report.output_distance.value.to_string()
            << " bound=" << report.bound.to_string() << " ok="
            << (report.ok ? "true" : "false") << '\n';
  if (!json_out.empty()) {
    std::ofstream out(json_out, std::ios::binary);
    if (!out) {
      std::cerr << json_out << ": cannot write report\n";
      return kExitUsage;
    }
    out << fuzz::fix_bound_report_json(report) << '\n';
  }
  return report.ok ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toolchain for the deterministic Fuzz language"};
  app.require_subcommand(1);

  bool unsafe = false;
  app.add_flag("--unsafe", unsafe,
               "disable the lambda/fix sensitivity checks (for harness "
               "falsifiability tests)");

  std::string path;
  std::string json_out;
  auto* check = app.add_subcommand("check", "typecheck and print type + sensitivities");
  check->fallthrough();
  check->add_option("file", path, "input .fuzz file")->required();
  check->add_option("--json", json_out, "write the result to this path as JSON");

  auto* sens = app.add_subcommand("sens", "print inferred sensitivities only");
  sens->fallthrough();
  sens->add_option("file", path, "input .fuzz file")->required();
  sens->add_option("--json", json_out, "write the result to this path as JSON");

  auto* run = app.add_subcommand("run", "evaluate a program");
  run->fallthrough();
  std::vector<std::string> inputs;
  long run_fuel = 100000;
  run->add_option("file", path, "input .fuzz file")->required();
  run->add_option("--input", inputs, "bind a declared variable, NAME=VALUE");
  run->add_option("--fuel", run_fuel, "evaluation fuel")->check(CLI::PositiveNumber);

  auto* test = app.add_subcommand("test", "run metric-preservation trials");
  test->fallthrough();
  fuzz::GenConfig cfg;
  test->add_option("file", path, "input .fuzz file")->required();
  test->add_option("--trials", cfg.trials, "number of trials")
      ->check(CLI::PositiveNumber);
  test->add_option("--fuel", cfg.fuel, "evaluation fuel per trial")
      ->check(CLI::PositiveNumber);
  test->add_option("--delta", cfg.perturb_delta, "perturbation bound")
      ->check(CLI::NonNegativeNumber);
  test->add_option("--seed", cfg.seed, "rng seed");
  test->add_option("--tolerance", cfg.tolerance, "relative tolerance")
      ->check(CLI::NonNegativeNumber);
  test->add_option("--depth", cfg.max_list_depth, "max fold depth of inputs")
      ->check(CLI::PositiveNumber);
  test->add_option("--json", json_out, "write a JSON report to this path");

  auto* fixbound = app.add_subcommand("fixbound", "check the fix scaling bound");
  fixbound->fallthrough();
  double fb_r = 0.5;
  double fb_delta = 1.0;
  int fb_len = 10;
  fixbound->add_option("--r", fb_r, "recursion sensitivity, < 1")
      ->check(CLI::Range(0.0, 1.0));
  fixbound->add_option("--delta", fb_delta, "function perturbation");
  fixbound->add_option("--len", fb_len, "list length")
      ->check(CLI::NonNegativeNumber);
  fixbound->add_option("--seed", cfg.seed, "rng seed");
  fixbound->add_option("--fuel", cfg.fuel, "evaluation fuel")
      ->check(CLI::PositiveNumber);
  fixbound->add_option("--json", json_out, "write a JSON report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return kExitOk;
    }
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  fuzz::CheckOptions options{!unsafe};
  if (check->parsed()) return cmd_check(path, options, /*sens_only=*/false, json_out);
  if (sens->parsed()) return cmd_check(path, options, /*sens_only=*/true, json_out);
  if (run->parsed()) return cmd_run(path, inputs, run_fuel, options);
  if (test->parsed()) return cmd_test(path, cfg, json_out, options);
  if (fixbound->parsed()) return cmd_fixbound(fb_r, fb_len, fb_delta, cfg, json_out);
  return kExitUsage;
}
