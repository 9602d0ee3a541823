#include <doctest.h>

#include <vector>

#include "fuzz/ast.hpp"

using namespace fuzz;

namespace {

const ExtReal kInf = ExtReal::infinity();

SensEnv env_of(std::initializer_list<std::pair<const char*, SensBinding>> init) {
  SensEnv env;
  for (const auto& [name, binding] : init) env.set(name, binding);
  return env;
}

SensEnv must(std::variant<SensEnv, EnvTypeMismatch> merged) {
  REQUIRE(std::holds_alternative<SensEnv>(merged));
  return std::get<SensEnv>(std::move(merged));
}

std::vector<ExtReal> sens_grid() {
  return {ExtReal(0.0), ExtReal(0.5), ExtReal(1.0), ExtReal(2.0), kInf};
}

std::vector<SensEnv> env_grid() {
  std::vector<SensEnv> out;
  for (ExtReal x : sens_grid()) {
    for (ExtReal y : sens_grid()) {
      out.push_back(env_of({{"x", {x, type_real()}}, {"y", {y, type_unit()}}}));
    }
    out.push_back(env_of({{"x", {x, type_real()}}}));
  }
  out.push_back(SensEnv());
  return out;
}

}  // namespace

TEST_CASE("type equality is syntactic") {
  CHECK(type_equal(type_real(), type_real()));
  CHECK(!type_equal(type_real(), type_unit()));
  CHECK(type_equal(type_bang(ExtReal(2.0), type_real()),
                   type_bang(ExtReal(2.0), type_real())));
  CHECK(!type_equal(type_bang(ExtReal(2.0), type_real()),
                    type_bang(ExtReal(3.0), type_real())));
  CHECK(type_equal(type_ident("list"), type_ident("list")));
  CHECK(!type_equal(type_ident("list"), type_ident("tree")));
  CHECK(!type_equal(type_tensor(type_real(), type_unit()),
                    type_with(type_real(), type_unit())));
}

TEST_CASE("well_formed finds unbound identifiers") {
  DefEnv empty;
  CHECK(well_formed(empty, *type_real()));
  CHECK(unbound_ident(empty, *type_ident("list")) == "list");

  DefEnv phi;
  TypePtr dlist_def = type_sum(
      type_unit(),
      type_tensor(type_real(), type_bang(ExtReal(0.5), type_ident("dlist"))));
  REQUIRE(phi.define("dlist", dlist_def));
  CHECK(well_formed(phi, *type_ident("dlist")));
  CHECK(well_formed(phi, *dlist_def));
  CHECK(!phi.define("dlist", type_real()));  // duplicate
}

TEST_CASE("mentions_lolli looks through the definition environment") {
  DefEnv phi;
  REQUIRE(phi.define("a", type_sum(type_unit(), type_ident("a"))));
  REQUIRE(phi.define("f", type_lolli(type_real(), type_real())));
  CHECK(!mentions_lolli(phi, *type_ident("a")));
  CHECK(mentions_lolli(phi, *type_ident("f")));
  CHECK(mentions_lolli(phi, *type_tensor(type_unit(), type_ident("f"))));
  CHECK(!mentions_lolli(phi, *type_bang(ExtReal(1.0), type_ident("a"))));
}

TEST_CASE("scale_env multiplies sensitivities, keeping types") {
  SensEnv env = env_of({{"x", {ExtReal(1.0), type_real()}}});
  SensEnv scaled = scale_env(ExtReal(2.0), env);
  CHECK(scaled.lookup("x")->sens == ExtReal(2.0));
  CHECK(type_equal(scaled.lookup("x")->type, type_real()));

  // 0 * inf = inf survives environment scaling
  SensEnv top = env_of({{"x", {kInf, type_real()}}});
  CHECK(scale_env(ExtReal(0.0), top).lookup("x")->sens == kInf);

  CHECK(scale_env(ExtReal(3.0), SensEnv()).empty());
}

TEST_CASE("add_env and join_env examples") {
  SensEnv one = env_of({{"x", {ExtReal(1.0), type_real()}}});
  SensEnv both = must(add_env(one, one));
  CHECK(both.lookup("x")->sens == ExtReal(2.0));

  // missing entries count as sensitivity 0
  CHECK(must(add_env(one, SensEnv())).lookup("x")->sens == ExtReal(1.0));

  auto mismatch = add_env(one, env_of({{"x", {ExtReal(1.0), type_unit()}}}));
  REQUIRE(std::holds_alternative<EnvTypeMismatch>(mismatch));
  CHECK(std::get<EnvTypeMismatch>(mismatch).variable == "x");

  SensEnv three = env_of({{"x", {ExtReal(3.0), type_real()}}});
  CHECK(must(join_env(one, three)).lookup("x")->sens == ExtReal(3.0));
  CHECK(sens_env_equal(must(join_env(one, one)), one));

  SensEnv disjoint = must(join_env(env_of({{"x", {ExtReal(2.0), type_real()}}}),
                                   env_of({{"y", {ExtReal(1.0), type_unit()}}})));
  CHECK(disjoint.lookup("x")->sens == ExtReal(2.0));
  CHECK(disjoint.lookup("y")->sens == ExtReal(1.0));
}

TEST_CASE("environment algebra identities over the grid") {
  for (const SensEnv& a : env_grid()) {
    for (ExtReal r : sens_grid()) {
      for (ExtReal s : sens_grid()) {
        CHECK(sens_env_equal(scale_env(r, scale_env(s, a)),
                             scale_env(mul(r, s), a)));
      }
    }
    for (const SensEnv& b : env_grid()) {
      CHECK(sens_env_equal(must(add_env(a, b)), must(add_env(b, a))));
      CHECK(sens_env_equal(must(join_env(a, b)), must(join_env(b, a))));
      CHECK(sens_env_equal(must(add_env(a, SensEnv())), a));
      for (ExtReal r : sens_grid()) {
        CHECK(sens_env_equal(scale_env(r, must(add_env(a, b))),
                             must(add_env(scale_env(r, a), scale_env(r, b)))));
      }
      // join upper-bounds both operands pointwise
      SensEnv joined = must(join_env(a, b));
      for (const auto& [name, binding] : a) {
        CHECK(leq(binding.sens, joined.lookup(name)->sens));
      }
      for (const SensEnv& c : env_grid()) {
        CHECK(sens_env_equal(must(add_env(must(add_env(a, b)), c)),
                             must(add_env(a, must(add_env(b, c))))));
        CHECK(sens_env_equal(must(join_env(must(join_env(a, b)), c)),
                             must(join_env(a, must(join_env(b, c))))));
      }
    }
  }
}

TEST_CASE("value environment lookup respects shadowing") {
  ValueEnv env;
  CHECK(env.lookup("x") == nullptr);
  env = env.extend("x", make_value(RealV{1.0}));
  ValueEnv inner = env.extend("x", make_value(RealV{2.0}));
  CHECK(std::get<RealV>((*env.lookup("x"))->node).value == 1.0);
  CHECK(std::get<RealV>((*inner.lookup("x"))->node).value == 2.0);
}

TEST_CASE("free_term_vars respects binders") {
  // fun (x : real) => x + y
  TermPtr body = make_term(PlusE{make_term(VarE{"x"}), make_term(VarE{"y"})});
  TermPtr lam = make_term(LamE{"x", type_real(), body});
  auto free = free_term_vars(*lam);
  REQUIRE(free.size() == 1);
  CHECK(free[0] == "y");
  CHECK(term_size(*lam) == 4);
}
