#pragma once

// Brute-force search for declarative typing derivations, independent of the
// algorithmic checker. The rules are applied literally: environments are
// split nondeterministically, with every split component, scrutinee scaling
// factor, and binder sensitivity drawn from a fixed finite grid. Arithmetic
// over {0, 0.5, 1, 2, 3, inf} is exact in doubles, so comparisons are exact.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fuzz/ast.hpp"
#include "fuzz/checker.hpp"

namespace fuzz::test {

inline const std::vector<ExtReal>& oracle_grid() {
  static const std::vector<ExtReal> grid = {
      ExtReal(0.0), ExtReal(0.5), ExtReal(1.0),
      ExtReal(2.0), ExtReal(3.0), ExtReal::infinity()};
  return grid;
}

class DeclarativeOracle {
 public:
  using Env = std::map<std::string, ExtReal>;

  DeclarativeOracle(const DefEnv& phi, const Scope& scope)
      : phi_(phi), scope_(scope) {}

  // Is there a derivation env |- term : sigma? The result type, when one
  // exists, is determined by the annotations.
  bool derivable(const Env& env, const Term& term) {
    return derive(env, term) != nullptr;
  }

 private:
  using SplitChoices = std::vector<std::vector<std::pair<ExtReal, ExtReal>>>;

  TypePtr derive(const Env& env, const Term& term) {
    std::string key = memo_key(env, &term);
    auto hit = memo_.find(key);
    if (hit != memo_.end()) return hit->second;
    TypePtr result = derive_uncached(env, term);
    memo_.emplace(std::move(key), result);
    return result;
  }

  TypePtr derive_uncached(const Env& env, const Term& term) {
    if (const auto* var = std::get_if<VarE>(&term.node)) {
      auto binding = env.find(var->name);
      if (binding == env.end() || !leq(ExtReal(1.0), binding->second)) {
        return nullptr;
      }
      return type_of(var->name);
    }
    if (std::get_if<ConstE>(&term.node) != nullptr) return type_real();
    if (std::get_if<UnitE>(&term.node) != nullptr) return type_unit();

    if (const auto* plus = std::get_if<PlusE>(&term.node)) {
      TypePtr found;
      for_each_split(env, [&](const Env& a, const Env& b) {
        TypePtr l = derive(a, *plus->lhs);
        if (l == nullptr || l->kind != TypeKind::Real) return false;
        TypePtr r = derive(b, *plus->rhs);
        if (r == nullptr || r->kind != TypeKind::Real) return false;
        found = type_real();
        return true;
      });
      return found;
    }
    if (const auto* lam = std::get_if<LamE>(&term.node)) {
      TypePtr body;
      with_binding(lam->param, lam->annot, [&] {
        Env inner = env;
        inner[lam->param] = ExtReal(1.0);
        body = derive(inner, *lam->body);
      });
      return body == nullptr ? nullptr : type_lolli(lam->annot, body);
    }
    if (const auto* app = std::get_if<AppE>(&term.node)) {
      TypePtr found;
      for_each_split(env, [&](const Env& a, const Env& b) {
        TypePtr fn = derive(a, *app->fn);
        if (fn == nullptr || fn->kind != TypeKind::Lolli) return false;
        TypePtr arg = derive(b, *app->arg);
        if (arg == nullptr || !type_equal(fn->left, arg)) return false;
        found = fn->right;
        return true;
      });
      return found;
    }
    if (const auto* pair = std::get_if<TensorPairE>(&term.node)) {
      TypePtr found;
      for_each_split(env, [&](const Env& a, const Env& b) {
        TypePtr l = derive(a, *pair->first);
        if (l == nullptr) return false;
        TypePtr r = derive(b, *pair->second);
        if (r == nullptr) return false;
        found = type_tensor(l, r);
        return true;
      });
      return found;
    }
    if (const auto* pair = std::get_if<WithPairE>(&term.node)) {
      // &I shares one environment between the components.
      TypePtr l = derive(env, *pair->first);
      if (l == nullptr) return nullptr;
      TypePtr r = derive(env, *pair->second);
      if (r == nullptr) return nullptr;
      return type_with(l, r);
    }
    if (const auto* proj = std::get_if<ProjE>(&term.node)) {
      TypePtr pair = derive(env, *proj->pair);
      if (pair == nullptr || pair->kind != TypeKind::With) return nullptr;
      return proj->index == 1 ? pair->left : pair->right;
    }
    if (const auto* let = std::get_if<LetPairE>(&term.node)) {
      for (ExtReal r : oracle_grid()) {
        TypePtr found;
        for_each_scaled_split(env, r, [&](const Env& scaled, const Env& rest) {
          TypePtr pair = derive(scaled, *let->pair);
          if (pair == nullptr || pair->kind != TypeKind::Tensor) return false;
          TypePtr body;
          with_binding(let->first_name, pair->left, [&] {
            with_binding(let->second_name, pair->right, [&] {
              Env inner = rest;
              inner[let->first_name] = r;
              inner[let->second_name] = r;
              body = derive(inner, *let->body);
            });
          });
          if (body == nullptr) return false;
          found = body;
          return true;
        });
        if (found != nullptr) return found;
      }
      return nullptr;
    }
    if (const auto* box = std::get_if<BoxE>(&term.node)) {
      TypePtr found;
      for_each_scaling(env, box->index, [&](const Env& inner) {
        TypePtr body = derive(inner, *box->body);
        if (body == nullptr) return false;
        found = type_bang(box->index, body);
        return true;
      });
      return found;
    }
    if (const auto* let = std::get_if<LetBoxE>(&term.node)) {
      for (ExtReal r : oracle_grid()) {
        TypePtr found;
        for_each_scaled_split(env, r, [&](const Env& scaled, const Env& rest) {
          TypePtr boxed = derive(scaled, *let->boxed);
          if (boxed == nullptr || boxed->kind != TypeKind::Bang) return false;
          TypePtr body;
          with_binding(let->name, boxed->left, [&] {
            Env inner = rest;
            inner[let->name] = mul(r, boxed->index);
            body = derive(inner, *let->body);
          });
          if (body == nullptr) return false;
          found = body;
          return true;
        });
        if (found != nullptr) return found;
      }
      return nullptr;
    }
    if (const auto* inj = std::get_if<InjE>(&term.node)) {
      TypePtr body = derive(env, *inj->body);
      if (body == nullptr) return nullptr;
      return inj->left ? type_sum(body, inj->other)
                       : type_sum(inj->other, body);
    }
    if (const auto* kase = std::get_if<CaseE>(&term.node)) {
      for (ExtReal r : oracle_grid()) {
        TypePtr found;
        for_each_scaled_split(env, r, [&](const Env& scaled, const Env& rest) {
          TypePtr sum = derive(scaled, *kase->scrutinee);
          if (sum == nullptr || sum->kind != TypeKind::Sum) return false;
          TypePtr left, right;
          with_binding(kase->left_name, sum->left, [&] {
            Env inner = rest;
            inner[kase->left_name] = r;
            left = derive(inner, *kase->left_body);
          });
          if (left == nullptr) return false;
          with_binding(kase->right_name, sum->right, [&] {
            Env inner = rest;
            inner[kase->right_name] = r;
            right = derive(inner, *kase->right_body);
          });
          if (right == nullptr || !type_equal(left, right)) return false;
          found = left;
          return true;
        });
        if (found != nullptr) return found;
      }
      return nullptr;
    }
    if (const auto* fold = std::get_if<FoldE>(&term.node)) {
      const TypePtr* unfolding = phi_.lookup(fold->ident);
      if (unfolding == nullptr) return nullptr;
      TypePtr body = derive(env, *fold->body);
      if (body == nullptr || !type_equal(body, *unfolding)) return nullptr;
      return type_ident(fold->ident);
    }
    if (const auto* unfold = std::get_if<UnfoldE>(&term.node)) {
      TypePtr body = derive(env, *unfold->body);
      if (body == nullptr || body->kind != TypeKind::Ident) return nullptr;
      const TypePtr* unfolding = phi_.lookup(body->name);
      return unfolding == nullptr ? nullptr : *unfolding;
    }
    const auto& fix = std::get<FixE>(term.node);
    ExtReal scale = !fix.index.is_infinite() && fix.index.raw() < 1.0
                        ? ExtReal(1.0 / (1.0 - fix.index.raw()))
                        : ExtReal::infinity();
    TypePtr fn_type = type_lolli(fix.annot_in, fix.annot_out);
    TypePtr found;
    for_each_scaling(env, scale, [&](const Env& inner_env) {
      TypePtr body;
      with_binding(fix.self_name, fn_type, [&] {
        with_binding(fix.param, fix.annot_in, [&] {
          Env inner = inner_env;
          inner[fix.self_name] = fix.index;
          inner[fix.param] = ExtReal(1.0);
          body = derive(inner, *fix.body);
        });
      });
      if (body == nullptr || !type_equal(body, fix.annot_out)) return false;
      found = fn_type;
      return true;
    });
    return found;
  }

  // Enumerate all env pairs (a, b) with add(a(v), b(v)) = env(v) pointwise,
  // components drawn from the grid. Visit returns true to stop.
  void for_each_split(const Env& env,
                      const std::function<bool(const Env&, const Env&)>& visit) {
    std::vector<std::string> names;
    SplitChoices choices;
    for (const auto& [name, target] : env) {
      names.push_back(name);
      std::vector<std::pair<ExtReal, ExtReal>> options;
      for (ExtReal a : oracle_grid()) {
        for (ExtReal b : oracle_grid()) {
          if (add(a, b) == target) options.emplace_back(a, b);
        }
      }
      if (options.empty()) return;
      choices.push_back(std::move(options));
    }
    Env a, b;
    walk(names, choices, 0, a, b,
         [&](const Env& left, const Env& right) { return visit(left, right); });
  }

  // Enumerate env pairs (g, d) with add(mul(r, g(v)), d(v)) = env(v).
  void for_each_scaled_split(
      const Env& env, ExtReal r,
      const std::function<bool(const Env&, const Env&)>& visit) {
    std::vector<std::string> names;
    SplitChoices choices;
    for (const auto& [name, target] : env) {
      names.push_back(name);
      std::vector<std::pair<ExtReal, ExtReal>> options;
      for (ExtReal g : oracle_grid()) {
        for (ExtReal d : oracle_grid()) {
          if (add(mul(r, g), d) == target) options.emplace_back(g, d);
        }
      }
      if (options.empty()) return;
      choices.push_back(std::move(options));
    }
    Env a, b;
    walk(names, choices, 0, a, b,
         [&](const Env& left, const Env& right) { return visit(left, right); });
  }

  // Enumerate envs g with mul(r, g(v)) = env(v).
  void for_each_scaling(const Env& env, ExtReal r,
                        const std::function<bool(const Env&)>& visit) {
    for_each_scaled_split(env, r, [&](const Env& g, const Env& d) {
      for (const auto& [name, sens] : d) {
        if (!(sens == ExtReal(0.0))) return false;
      }
      return visit(g);
    });
  }

  bool walk(const std::vector<std::string>& names, const SplitChoices& choices,
            std::size_t i, Env& a, Env& b,
            const std::function<bool(const Env&, const Env&)>& visit) {
    if (i == names.size()) return visit(a, b);
    for (const auto& [ga, gb] : choices[i]) {
      a[names[i]] = ga;
      b[names[i]] = gb;
      if (walk(names, choices, i + 1, a, b, visit)) return true;
    }
    a.erase(names[i]);
    b.erase(names[i]);
    return false;
  }

  TypePtr type_of(const std::string& name) {
    for (auto it = binders_.rbegin(); it != binders_.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    auto it = scope_.find(name);
    return it == scope_.end() ? nullptr : it->second;
  }

  void with_binding(const std::string& name, TypePtr type,
                    const std::function<void()>& body) {
    binders_.emplace_back(name, std::move(type));
    body();
    binders_.pop_back();
  }

  std::string memo_key(const Env& env, const Term* term) {
    std::string key = std::to_string(reinterpret_cast<std::uintptr_t>(term));
    for (const auto& [name, sens] : env) {
      key += ';';
      key += name;
      key += '=';
      key += sens.to_string();
    }
    // Binder types can differ between visits of the same node only through
    // shadowing, which the corpus avoids; the env values pin the rest.
    return key;
  }

  const DefEnv& phi_;
  Scope scope_;
  std::vector<std::pair<std::string, TypePtr>> binders_;
  std::unordered_map<std::string, TypePtr> memo_;
};

}  // namespace fuzz::test
