#include "fuzz/evaluator.hpp"

#include <utility>

namespace fuzz {

Outcome Outcome::terminated(ValuePtr v, long fuel_used) {
  return {Kind::Terminated, std::move(v), fuel_used, {}};
}

Outcome Outcome::fuel_exhausted(long fuel_used) {
  return {Kind::FuelExhausted, nullptr, fuel_used, {}};
}

Outcome Outcome::stuck(std::string reason, long fuel_used) {
  return {Kind::Stuck, nullptr, fuel_used, std::move(reason)};
}

namespace {

class Machine {
 public:
  explicit Machine(long fuel) : initial_(fuel), remaining_(fuel) {}

  // Null when evaluation did not terminate; outcome() has the reason.
  ValuePtr run(const Term* term, ValueEnv env) {
    TermPtr spine_owner;  // keeps a tail-entered closure body alive
    while (true) {
      if (failed_) return nullptr;
      if (remaining_ <= 0) {
        failed_ = true;
        fuel_exhausted_ = true;
        return nullptr;
      }
      --remaining_;

      if (const auto* var = std::get_if<VarE>(&term->node)) {
        const ValuePtr* v = env.lookup(var->name);
        if (v == nullptr) {
          return fail_stuck("unbound variable '" + var->name + "'",
                            term->span);
        }
        return *v;
      }
      if (const auto* k = std::get_if<ConstE>(&term->node)) {
        return make_value(RealV{k->value});
      }
      if (std::holds_alternative<UnitE>(term->node)) {
        return make_value(UnitV{});
      }
      if (const auto* plus = std::get_if<PlusE>(&term->node)) {
        ValuePtr lhs = run(plus->lhs.get(), env);
        if (!lhs) return nullptr;
        const auto* a = std::get_if<RealV>(&lhs->node);
        if (a == nullptr) return fail_stuck("+ on a non-real", term->span);
        ValuePtr rhs = run(plus->rhs.get(), env);
        if (!rhs) return nullptr;
        const auto* b = std::get_if<RealV>(&rhs->node);
        if (b == nullptr) return fail_stuck("+ on a non-real", term->span);
        return make_value(RealV{a->value + b->value});
      }
      if (const auto* lam = std::get_if<LamE>(&term->node)) {
        return make_value(ClosureV{lam->param, lam->annot, lam->body, env,
                                   std::nullopt, nullptr});
      }
      if (const auto* fix = std::get_if<FixE>(&term->node)) {
        return make_value(ClosureV{
            fix->param, fix->annot_in, fix->body, env, fix->self_name,
            type_lolli(fix->annot_in, fix->annot_out)});
      }
      if (const auto* app = std::get_if<AppE>(&term->node)) {
        ValuePtr fn = run(app->fn.get(), env);
        if (!fn) return nullptr;
        const auto* closure = std::get_if<ClosureV>(&fn->node);
        if (closure == nullptr) {
          return fail_stuck("applied a non-function", term->span);
        }
        ValuePtr arg = run(app->arg.get(), env);
        if (!arg) return nullptr;
        ValueEnv entered = closure->captured;
        if (closure->self_name) {
          entered = entered.extend(*closure->self_name, fn);
        }
        entered = entered.extend(closure->param, std::move(arg));
        spine_owner = closure->body;
        term = spine_owner.get();
        env = std::move(entered);
        continue;
      }
      if (const auto* pair = std::get_if<TensorPairE>(&term->node)) {
        ValuePtr first = run(pair->first.get(), env);
        if (!first) return nullptr;
        ValuePtr second = run(pair->second.get(), env);
        if (!second) return nullptr;
        return make_value(TensorV{std::move(first), std::move(second)});
      }
      if (const auto* pair = std::get_if<WithPairE>(&term->node)) {
        ValuePtr first = run(pair->first.get(), env);
        if (!first) return nullptr;
        ValuePtr second = run(pair->second.get(), env);
        if (!second) return nullptr;
        return make_value(WithV{std::move(first), std::move(second)});
      }
      if (const auto* let = std::get_if<LetPairE>(&term->node)) {
        ValuePtr pair = run(let->pair.get(), env);
        if (!pair) return nullptr;
        const auto* tensor = std::get_if<TensorV>(&pair->node);
        if (tensor == nullptr) {
          return fail_stuck("let (x, y) on a non-pair", term->span);
        }
        env = env.extend(let->first_name, tensor->first)
                  .extend(let->second_name, tensor->second);
        term = let->body.get();
        continue;
      }
      if (const auto* proj = std::get_if<ProjE>(&term->node)) {
        ValuePtr pair = run(proj->pair.get(), env);
        if (!pair) return nullptr;
        const auto* with = std::get_if<WithV>(&pair->node);
        if (with == nullptr) {
          return fail_stuck("projection from a non-&-pair", term->span);
        }
        return proj->index == 1 ? with->first : with->second;
      }
      if (const auto* box = std::get_if<BoxE>(&term->node)) {
        ValuePtr body = run(box->body.get(), env);
        if (!body) return nullptr;
        return make_value(BoxV{std::move(body)});
      }
      if (const auto* let = std::get_if<LetBoxE>(&term->node)) {
        ValuePtr boxed = run(let->boxed.get(), env);
        if (!boxed) return nullptr;
        const auto* box = std::get_if<BoxV>(&boxed->node);
        if (box == nullptr) {
          return fail_stuck("let ! on a non-box", term->span);
        }
        env = env.extend(let->name, box->body);
        term = let->body.get();
        continue;
      }
      if (const auto* inj = std::get_if<InjE>(&term->node)) {
        ValuePtr body = run(inj->body.get(), env);
        if (!body) return nullptr;
        return make_value(InjV{inj->left, std::move(body)});
      }
      if (const auto* kase = std::get_if<CaseE>(&term->node)) {
        ValuePtr scrutinee = run(kase->scrutinee.get(), env);
        if (!scrutinee) return nullptr;
        const auto* inj = std::get_if<InjV>(&scrutinee->node);
        if (inj == nullptr) {
          return fail_stuck("case on a non-injection", term->span);
        }
        if (inj->left) {
          env = env.extend(kase->left_name, inj->body);
          term = kase->left_body.get();
        } else {
          env = env.extend(kase->right_name, inj->body);
          term = kase->right_body.get();
        }
        continue;
      }
      if (const auto* fold = std::get_if<FoldE>(&term->node)) {
        ValuePtr body = run(fold->body.get(), env);
        if (!body) return nullptr;
        return make_value(FoldV{std::move(body)});
      }
      const auto& unfold = std::get<UnfoldE>(term->node);
      ValuePtr body = run(unfold.body.get(), env);
      if (!body) return nullptr;
      const auto* folded = std::get_if<FoldV>(&body->node);
      if (folded == nullptr) {
        return fail_stuck("unfold of a non-fold value", term->span);
      }
      return folded->body;
    }
  }

  Outcome outcome(ValuePtr result) const {
    long used = initial_ - remaining_;
    if (result) return Outcome::terminated(std::move(result), used);
    if (fuel_exhausted_) return Outcome::fuel_exhausted(used);
    return Outcome::stuck(stuck_reason_, used);
  }

 private:
  ValuePtr fail_stuck(std::string reason, Span span) {
    failed_ = true;
    stuck_reason_ = std::move(reason) + " (at " + std::to_string(span.line) +
                    ":" + std::to_string(span.col) + ")";
    return nullptr;
  }

  long initial_;
  long remaining_;
  bool failed_ = false;
  bool fuel_exhausted_ = false;
  std::string stuck_reason_;
};

}  // namespace

Outcome eval(const DefEnv& /*phi*/, const ValueEnv& env, const Term& term,
             long fuel) {
  Machine machine(fuel);
  ValuePtr result = machine.run(&term, env);
  return machine.outcome(std::move(result));
}

Outcome apply_closure(const ValuePtr& fn, const ValuePtr& arg, long fuel) {
  const auto* closure = std::get_if<ClosureV>(&fn->node);
  if (closure == nullptr) {
    return Outcome::stuck("applied a non-function value", 0);
  }
  ValueEnv env = closure->captured;
  if (closure->self_name) env = env.extend(*closure->self_name, fn);
  env = env.extend(closure->param, arg);
  Machine machine(fuel);
  ValuePtr result = machine.run(closure->body.get(), std::move(env));
  return machine.outcome(std::move(result));
}

}  // namespace fuzz
