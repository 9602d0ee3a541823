#include "fuzz/checker.hpp"

#include <utility>

namespace fuzz {

namespace {

struct CheckError {
  Diagnostic diag;
};

[[noreturn]] void reject(Span span, DiagKind kind, std::string message) {
  throw CheckError{{span, kind, std::move(message)}};
}

class Checker {
 public:
  Checker(const DefEnv& phi, Scope scope, const CheckOptions& options)
      : phi_(phi), scope_(std::move(scope)), options_(options) {}

  TypingResult infer_term(const Term& term) {
    return std::visit([&](const auto& node) { return infer_node(node, term.span); },
                      term.node);
  }

 private:
  // RAII scope binding with shadowing support.
  class Binding {
   public:
    Binding(Checker& checker, std::string name, TypePtr type)
        : checker_(checker), name_(std::move(name)) {
      auto it = checker_.scope_.find(name_);
      if (it != checker_.scope_.end()) previous_ = it->second;
      checker_.scope_[name_] = std::move(type);
    }
    ~Binding() {
      if (previous_) {
        checker_.scope_[name_] = previous_;
      } else {
        checker_.scope_.erase(name_);
      }
    }
    Binding(const Binding&) = delete;
    Binding& operator=(const Binding&) = delete;

   private:
    Checker& checker_;
    std::string name_;
    TypePtr previous_;
  };

  SensEnv add_envs(SensEnv a, const SensEnv& b, Span span) {
    auto merged = add_env(a, b);
    if (auto* mismatch = std::get_if<EnvTypeMismatch>(&merged)) {
      reject(span, DiagKind::Type,
             "internal: variable '" + mismatch->variable +
                 "' carries conflicting types");
    }
    return std::get<SensEnv>(std::move(merged));
  }

  SensEnv join_envs(SensEnv a, const SensEnv& b, Span span) {
    auto merged = join_env(a, b);
    if (auto* mismatch = std::get_if<EnvTypeMismatch>(&merged)) {
      reject(span, DiagKind::Type,
             "internal: variable '" + mismatch->variable +
                 "' carries conflicting types");
    }
    return std::get<SensEnv>(std::move(merged));
  }

  void require_type(const TypePtr& expected, const TypePtr& actual,
                    Span span, std::string_view context) {
    if (!type_equal(expected, actual)) {
      reject(span, DiagKind::Type,
             std::string(context) + ": expected " + pretty_type(expected) +
                 ", got " + pretty_type(actual));
    }
  }

  // Enforced lambda discipline: the binder must be used at sensitivity <= 1.
  void require_one_sensitive(const std::string& name, ExtReal sens,
                             Span span) {
    if (!options_.enforce_sensitivity_bounds) return;
    if (!leq(sens, ExtReal(1.0))) {
      reject(span, DiagKind::Sensitivity,
             "variable '" + name + "' must be at most 1-sensitive, inferred " +
                 sens.to_string());
    }
  }

  TypingResult infer_node(const VarE& node, Span span) {
    auto it = scope_.find(node.name);
    if (it == scope_.end()) {
      reject(span, DiagKind::Unbound, "unbound variable '" + node.name + "'");
    }
    SensEnv env;
    env.set(node.name, {ExtReal(1.0), it->second});
    return {it->second, std::move(env)};
  }

  TypingResult infer_node(const ConstE&, Span) {
    return {type_real(), SensEnv()};
  }

  TypingResult infer_node(const UnitE&, Span) {
    return {type_unit(), SensEnv()};
  }

  TypingResult infer_node(const PlusE& node, Span span) {
    TypingResult lhs = infer_term(*node.lhs);
    require_type(type_real(), lhs.type, node.lhs->span, "left operand of +");
    TypingResult rhs = infer_term(*node.rhs);
    require_type(type_real(), rhs.type, node.rhs->span, "right operand of +");
    return {type_real(), add_envs(std::move(lhs.env), rhs.env, span)};
  }

  TypingResult infer_node(const LamE& node, Span span) {
    TypingResult body;
    {
      Binding bind(*this, node.param, node.annot);
      body = infer_term(*node.body);
    }
    require_one_sensitive(node.param, body.env.sens_or_zero(node.param), span);
    body.env.erase(node.param);
    return {type_lolli(node.annot, body.type), std::move(body.env)};
  }

  TypingResult infer_node(const AppE& node, Span span) {
    TypingResult fn = infer_term(*node.fn);
    if (fn.type->kind != TypeKind::Lolli) {
      reject(node.fn->span, DiagKind::Type,
             "applied a non-function of type " + pretty_type(fn.type));
    }
    TypingResult arg = infer_term(*node.arg);
    require_type(fn.type->left, arg.type, node.arg->span, "argument");
    return {fn.type->right, add_envs(std::move(fn.env), arg.env, span)};
  }

  TypingResult infer_node(const TensorPairE& node, Span span) {
    TypingResult first = infer_term(*node.first);
    TypingResult second = infer_term(*node.second);
    return {type_tensor(first.type, second.type),
            add_envs(std::move(first.env), second.env, span)};
  }

  TypingResult infer_node(const WithPairE& node, Span span) {
    TypingResult first = infer_term(*node.first);
    TypingResult second = infer_term(*node.second);
    return {type_with(first.type, second.type),
            join_envs(std::move(first.env), second.env, span)};
  }

  TypingResult infer_node(const ProjE& node, Span) {
    TypingResult pair = infer_term(*node.pair);
    if (pair.type->kind != TypeKind::With) {
      reject(node.pair->span, DiagKind::Type,
             "projection from a non-& value of type " + pretty_type(pair.type));
    }
    TypePtr component = node.index == 1 ? pair.type->left : pair.type->right;
    return {std::move(component), std::move(pair.env)};
  }

  TypingResult infer_node(const LetPairE& node, Span span) {
    TypingResult pair = infer_term(*node.pair);
    if (pair.type->kind != TypeKind::Tensor) {
      reject(node.pair->span, DiagKind::Type,
             "let (x, y) scrutinee has non-tensor type " +
                 pretty_type(pair.type));
    }
    TypingResult body;
    {
      Binding bind_first(*this, node.first_name, pair.type->left);
      Binding bind_second(*this, node.second_name, pair.type->right);
      body = infer_term(*node.body);
    }
    ExtReal r = max(body.env.sens_or_zero(node.first_name),
                    body.env.sens_or_zero(node.second_name));
    body.env.erase(node.first_name);
    body.env.erase(node.second_name);
    return {body.type,
            add_envs(scale_env(r, pair.env), body.env, span)};
  }

  TypingResult infer_node(const BoxE& node, Span) {
    TypingResult body = infer_term(*node.body);
    return {type_bang(node.index, body.type),
            scale_env(node.index, body.env)};
  }

  TypingResult infer_node(const LetBoxE& node, Span span) {
    TypingResult boxed = infer_term(*node.boxed);
    if (boxed.type->kind != TypeKind::Bang) {
      reject(node.boxed->span, DiagKind::Type,
             "let ! scrutinee has non-! type " + pretty_type(boxed.type));
    }
    ExtReal s = boxed.type->index;
    TypingResult body;
    {
      Binding bind(*this, node.name, boxed.type->left);
      body = infer_term(*node.body);
    }
    ExtReal demand = body.env.sens_or_zero(node.name);
    std::optional<ExtReal> r = div_ceil(demand, s);
    if (!r) {
      reject(span, DiagKind::Sensitivity,
             "cannot unbox '" + node.name + "': demand " + demand.to_string() +
                 " cannot be met by a ![" + s.to_string() + "] box");
    }
    body.env.erase(node.name);
    return {body.type, add_envs(scale_env(*r, boxed.env), body.env, span)};
  }

  TypingResult infer_node(const InjE& node, Span) {
    TypingResult body = infer_term(*node.body);
    TypePtr type = node.left ? type_sum(body.type, node.other)
                             : type_sum(node.other, body.type);
    return {std::move(type), std::move(body.env)};
  }

  TypingResult infer_node(const CaseE& node, Span span) {
    TypingResult scrutinee = infer_term(*node.scrutinee);
    if (scrutinee.type->kind != TypeKind::Sum) {
      reject(node.scrutinee->span, DiagKind::Type,
             "case scrutinee has non-sum type " + pretty_type(scrutinee.type));
    }
    TypingResult left;
    {
      Binding bind(*this, node.left_name, scrutinee.type->left);
      left = infer_term(*node.left_body);
    }
    TypingResult right;
    {
      Binding bind(*this, node.right_name, scrutinee.type->right);
      right = infer_term(*node.right_body);
    }
    if (!type_equal(left.type, right.type)) {
      reject(node.right_body->span, DiagKind::Type,
             "case branches disagree: " + pretty_type(left.type) + " vs " +
                 pretty_type(right.type));
    }
    ExtReal r = max(left.env.sens_or_zero(node.left_name),
                    right.env.sens_or_zero(node.right_name));
    left.env.erase(node.left_name);
    right.env.erase(node.right_name);
    SensEnv branches = join_envs(std::move(left.env), right.env, span);
    return {left.type,
            add_envs(scale_env(r, scrutinee.env), branches, span)};
  }

  TypingResult infer_node(const FoldE& node, Span span) {
    const TypePtr* unfolding = phi_.lookup(node.ident);
    if (unfolding == nullptr) {
      reject(span, DiagKind::Unbound,
             "unbound type identifier '" + node.ident + "'");
    }
    TypingResult body = infer_term(*node.body);
    require_type(*unfolding, body.type, node.body->span,
                 "fold[" + node.ident + "] body");
    return {type_ident(node.ident), std::move(body.env)};
  }

  TypingResult infer_node(const UnfoldE& node, Span) {
    TypingResult body = infer_term(*node.body);
    if (body.type->kind != TypeKind::Ident) {
      reject(node.body->span, DiagKind::Type,
             "unfold of non-identifier type " + pretty_type(body.type));
    }
    const TypePtr* unfolding = phi_.lookup(body.type->name);
    if (unfolding == nullptr) {
      reject(node.body->span, DiagKind::Unbound,
             "unbound type identifier '" + body.type->name + "'");
    }
    return {*unfolding, std::move(body.env)};
  }

  TypingResult infer_node(const FixE& node, Span span) {
    TypePtr fn_type = type_lolli(node.annot_in, node.annot_out);
    TypingResult body;
    {
      Binding bind_self(*this, node.self_name, fn_type);
      Binding bind_param(*this, node.param, node.annot_in);
      body = infer_term(*node.body);
    }
    require_type(node.annot_out, body.type, node.body->span,
                 "fix body result");
    require_one_sensitive(node.param, body.env.sens_or_zero(node.param), span);
    body.env.erase(node.param);
    ExtReal self_sens = body.env.sens_or_zero(node.self_name);
    if (options_.enforce_sensitivity_bounds && !leq(self_sens, node.index)) {
      reject(span, DiagKind::Sensitivity,
             "recursive name '" + node.self_name + "' bound by fix[" +
                 node.index.to_string() + "] but inferred at " +
                 self_sens.to_string());
    }
    body.env.erase(node.self_name);
    // Scaling factor 1/(1 - r) for r < 1; infinity otherwise.
    ExtReal scale = !node.index.is_infinite() && node.index.raw() < 1.0
                        ? ExtReal(1.0 / (1.0 - node.index.raw()))
                        : ExtReal::infinity();
    return {std::move(fn_type), scale_env(scale, body.env)};
  }

  const DefEnv& phi_;
  Scope scope_;
  CheckOptions options_;
};

}  // namespace

InferOutcome infer(const DefEnv& phi, const Scope& scope, const Term& term,
                   const CheckOptions& options) {
  try {
    Checker checker(phi, scope, options);
    return {checker.infer_term(term), std::nullopt};
  } catch (const CheckError& e) {
    return {std::nullopt, e.diag};
  }
}

InferOutcome check_program(const Program& program,
                           const CheckOptions& options) {
  Scope scope;
  for (const auto& [name, type] : program.freevars) {
    scope.emplace(name, type);
  }
  return infer(program.typedefs, scope, *program.main, options);
}

bool value_checks(const DefEnv& phi, const ValuePtr& value,
                  const TypeExpr& type) {
  switch (type.kind) {
    case TypeKind::Real:
      return std::holds_alternative<RealV>(value->node);
    case TypeKind::Unit:
      return std::holds_alternative<UnitV>(value->node);
    case TypeKind::Tensor: {
      const auto* v = std::get_if<TensorV>(&value->node);
      return v != nullptr && value_checks(phi, v->first, *type.left) &&
             value_checks(phi, v->second, *type.right);
    }
    case TypeKind::With: {
      const auto* v = std::get_if<WithV>(&value->node);
      return v != nullptr && value_checks(phi, v->first, *type.left) &&
             value_checks(phi, v->second, *type.right);
    }
    case TypeKind::Bang: {
      const auto* v = std::get_if<BoxV>(&value->node);
      return v != nullptr && value_checks(phi, v->body, *type.left);
    }
    case TypeKind::Sum: {
      const auto* v = std::get_if<InjV>(&value->node);
      if (v == nullptr) return false;
      return value_checks(phi, v->body, v->left ? *type.left : *type.right);
    }
    case TypeKind::Ident: {
      const auto* v = std::get_if<FoldV>(&value->node);
      if (v == nullptr) return false;
      const TypePtr* unfolding = phi.lookup(type.name);
      return unfolding != nullptr && value_checks(phi, v->body, **unfolding);
    }
    case TypeKind::Lolli: {
      const auto* v = std::get_if<ClosureV>(&value->node);
      if (v == nullptr) return false;
      if (!type_equal(v->param_annot, type.left)) return false;
      if (v->self_annot != nullptr &&
          !type_equal(*v->self_annot,
                      TypeExpr{TypeKind::Lolli, type.left, type.right, {}, {}})) {
        return false;
      }
      // A body without captures can be re-checked end to end; closures over
      // captured bindings are accepted after the annotation checks above.
      std::vector<std::string> free = free_term_vars(*v->body);
      bool closed = true;
      for (const auto& name : free) {
        if (name != v->param && (!v->self_name || name != *v->self_name)) {
          closed = false;
          break;
        }
      }
      if (!closed) return true;
      Scope scope;
      scope.emplace(v->param, v->param_annot);
      if (v->self_name) scope.emplace(*v->self_name, v->self_annot);
      InferOutcome outcome = infer(phi, scope, *v->body);
      if (!outcome.ok()) return false;
      if (!type_equal(*outcome.result->type, *type.right)) return false;
      return leq(outcome.result->env.sens_or_zero(v->param), ExtReal(1.0));
    }
  }
  return false;
}

}  // namespace fuzz
