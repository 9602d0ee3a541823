#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fuzz/checker.hpp"
#include "fuzz/parser.hpp"
#include "declarative_oracle.hpp"
#include "test_support.hpp"

using namespace fuzz;

namespace {

struct ExpectedSens {
  const char* var;
  double sens;  // raw double; infinity spelled as INFINITY
};

struct AcceptCase {
  const char* path;
  const char* type;
  std::vector<ExpectedSens> env;
};

struct RejectCase {
  const char* path;
  DiagKind kind;
};

const std::vector<AcceptCase>& accept_cases() {
  static const std::vector<AcceptCase> cases = {
      {"accept/identity.fuzz", "real -o real", {}},
      {"accept/const.fuzz", "real", {{"x", 0.0}}},
      {"accept/add_pair.fuzz", "real", {{"p", 1.0}}},
      {"accept/with_sum.fuzz", "real", {{"p", 2.0}}},
      {"accept/letbox.fuzz", "real", {{"b", 2.0 / 3.0}}},
      {"accept/boxed_double.fuzz", "real", {{"x", 1.0}}},
      {"accept/box_scale.fuzz", "![2] real", {{"x", 4.0}}},
      {"accept/case_zero.fuzz", "real", {{"s", 0.0}}},
      {"accept/case_branch.fuzz", "real", {{"s", 2.0}}},
      {"accept/tensor_dup.fuzz", "real * real", {{"x", 2.0}}},
      {"accept/two_vars.fuzz", "real", {{"x", 1.0}, {"y", 2.0}}},
      {"accept/with_dup.fuzz", "real & real", {{"x", 2.0}}},
      {"accept/sum_inj.fuzz", "real + unit", {{"x", 1.0}}},
      {"accept/incr_list.fuzz", "dlist", {{"l", 1.0}}},
      {"accept/nested_box.fuzz", "real", {{"b", 1.0 / 6.0}}},
      {"accept/unit_var.fuzz", "unit", {{"u", 1.0}}},
      {"accept/app_internal.fuzz", "real", {{"x", 1.0}}},
      {"accept/list_cons.fuzz", "dlist", {{"x", 1.0}}},
      {"accept/proj_deep.fuzz", "real & real", {{"p", 2.0}}},
      {"accept/snd_mixed.fuzz", "real + unit", {{"p", 1.0}}},
      {"accept/pair_swap.fuzz", "real * real", {{"p", 1.0}}},
      {"check_only/map_boxed.fuzz", "dlist", {{"fb", 1.0}, {"l", 1.0}}},
      {"check_only/map_free.fuzz", "dlist", {{"f", 2.0}, {"l", 1.0}}},
      {"check_only/map_closed.fuzz",
       "![2] (real -o real) -o dlist -o dlist",
       {}},
  };
  return cases;
}

const std::vector<RejectCase>& reject_cases() {
  static const std::vector<RejectCase> cases = {
      {"reject/lam_two.fuzz", DiagKind::Sensitivity},
      {"reject/double_lambda.fuzz", DiagKind::Sensitivity},
      {"reject/sum_list.fuzz", DiagKind::Sensitivity},
      {"reject/fix_bound.fuzz", DiagKind::Sensitivity},
      {"reject/unbox_zero.fuzz", DiagKind::Sensitivity},
      {"reject/app_mismatch.fuzz", DiagKind::Type},
      {"reject/case_mismatch.fuzz", DiagKind::Type},
      {"reject/proj_non_with.fuzz", DiagKind::Type},
      {"reject/letbox_non_bang.fuzz", DiagKind::Type},
      {"reject/plus_non_real.fuzz", DiagKind::Type},
      {"reject/apply_non_fn.fuzz", DiagKind::Type},
      {"reject/fold_mismatch.fuzz", DiagKind::Type},
      {"reject/unfold_non_ident.fuzz", DiagKind::Type},
      {"reject/unbound_var.fuzz", DiagKind::Unbound},
  };
  return cases;
}

Program load(const std::string& relative) {
  ParseResult parsed = parse_program(test::read_corpus_file(relative));
  if (!parsed.ok()) {
    FAIL("corpus program failed to parse: ", relative, ": ",
         parsed.diagnostics.front().message);
  }
  return std::move(*parsed.program);
}

}  // namespace

TEST_CASE("corpus: accepted programs have the expected types and minimal envs") {
  for (const AcceptCase& c : accept_cases()) {
    CAPTURE(c.path);
    Program program = load(c.path);
    InferOutcome outcome = check_program(program);
    if (!outcome.ok()) {
      FAIL("rejected: ", c.path, ": ", outcome.error->message);
    }
    CHECK(pretty_type(outcome.result->type) == c.type);
    for (const ExpectedSens& e : c.env) {
      CAPTURE(e.var);
      ExtReal got = outcome.result->env.sens_or_zero(e.var);
      if (std::isinf(e.sens)) {
        CHECK(got.is_infinite());
      } else {
        CHECK(got.raw() == doctest::Approx(e.sens).epsilon(1e-12));
      }
    }
    // nothing beyond the declared variables leaks into the env
    for (const auto& [name, binding] : outcome.result->env) {
      CHECK(program.freevar_type(name) != nullptr);
    }
  }
}

TEST_CASE("corpus: rejected programs fail with the expected diagnostic kind") {
  for (const RejectCase& c : reject_cases()) {
    CAPTURE(c.path);
    Program program = load(c.path);
    InferOutcome outcome = check_program(program);
    REQUIRE(!outcome.ok());
    CHECK(outcome.error->kind == c.kind);
    CHECK(outcome.error->span.line >= 1);
  }
}

TEST_CASE("sensitivity diagnostics name the variable and the bound") {
  Program program = load("reject/lam_two.fuzz");
  InferOutcome outcome = check_program(program);
  REQUIRE(!outcome.ok());
  CHECK(outcome.error->message.find("'x'") != std::string::npos);
  CHECK(outcome.error->message.find("2") != std::string::npos);
}

TEST_CASE("--unsafe option admits the mutants") {
  CheckOptions unsafe{false};
  for (const char* path : {"reject/lam_two.fuzz", "reject/double_lambda.fuzz",
                           "reject/sum_list.fuzz", "reject/fix_bound.fuzz"}) {
    CAPTURE(path);
    Program program = load(path);
    CHECK(check_program(program, unsafe).ok());
  }
  // type errors are still type errors
  Program bad = load("reject/app_mismatch.fuzz");
  CHECK(!check_program(bad, unsafe).ok());
}

TEST_CASE("map requires the box index to be exactly 1/(1-r)") {
  std::string source = test::read_corpus_file("check_only/map_closed.fuzz");
  std::string loosened = source;
  auto at = loosened.find("fb : ![2]");
  REQUIRE(at != std::string::npos);
  loosened.replace(at, 9, "fb : ![1.9]");
  ParseResult parsed = parse_program(loosened);
  REQUIRE(parsed.ok());
  InferOutcome outcome = check_program(*parsed.program);
  REQUIRE(!outcome.ok());
  CHECK(outcome.error->kind == DiagKind::Sensitivity);
}

TEST_CASE("weakening: extra unused declarations change nothing") {
  for (const AcceptCase& c : accept_cases()) {
    CAPTURE(c.path);
    Program program = load(c.path);
    InferOutcome before = check_program(program);
    REQUIRE(before.ok());
    program.freevars.emplace_back("extra_unused_var", type_real());
    InferOutcome after = check_program(program);
    REQUIRE(after.ok());
    CHECK(type_equal(before.result->type, after.result->type));
    CHECK(sens_env_equal(before.result->env, after.result->env));
    CHECK(after.result->env.sens_or_zero("extra_unused_var") == ExtReal(0.0));
  }
}

TEST_CASE("declarative derivation search agrees with infer on small terms") {
  std::vector<std::string> small;
  for (const AcceptCase& c : accept_cases()) small.push_back(c.path);
  for (const RejectCase& c : reject_cases()) small.push_back(c.path);

  int checked_terms = 0;
  for (const std::string& path : small) {
    Program program = load(path);
    if (term_size(*program.main) > 8) continue;
    if (program.freevars.size() > 2) continue;
    CAPTURE(path);
    ++checked_terms;

    Scope scope;
    for (const auto& [name, type] : program.freevars) scope.emplace(name, type);
    InferOutcome outcome = infer(program.typedefs, scope, *program.main);

    test::DeclarativeOracle oracle(program.typedefs, scope);
    // Every candidate assignment of grid sensitivities to the declared
    // variables: derivable declaratively iff it dominates the inferred env.
    std::vector<test::DeclarativeOracle::Env> candidates = {{}};
    for (const auto& [name, type] : program.freevars) {
      std::vector<test::DeclarativeOracle::Env> next;
      for (const auto& base : candidates) {
        for (ExtReal g : test::oracle_grid()) {
          auto extended = base;
          extended[name] = g;
          next.push_back(std::move(extended));
        }
      }
      candidates = std::move(next);
    }
    for (const auto& candidate : candidates) {
      bool declarative = oracle.derivable(candidate, *program.main);
      bool algorithmic = outcome.ok();
      if (algorithmic) {
        for (const auto& [name, sens] : candidate) {
          if (!leq(outcome.result->env.sens_or_zero(name), sens)) {
            algorithmic = false;
            break;
          }
        }
      }
      CAPTURE(candidate.empty() ? "{}" : candidate.begin()->first);
      CHECK(declarative == algorithmic);
    }
  }
  // the filter must leave a meaningful corpus slice
  CHECK(checked_terms >= 15);
}
