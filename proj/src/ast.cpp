#include "fuzz/ast.hpp"

#include <algorithm>
#include <unordered_set>

namespace fuzz {

namespace {

TypePtr make_type(TypeExpr t) {
  return std::make_shared<const TypeExpr>(std::move(t));
}

}  // namespace

TypePtr type_real() {
  static const TypePtr t = make_type({TypeKind::Real, {}, {}, {}, {}});
  return t;
}

TypePtr type_unit() {
  static const TypePtr t = make_type({TypeKind::Unit, {}, {}, {}, {}});
  return t;
}

TypePtr type_lolli(TypePtr domain, TypePtr codomain) {
  return make_type(
      {TypeKind::Lolli, std::move(domain), std::move(codomain), {}, {}});
}

TypePtr type_tensor(TypePtr left, TypePtr right) {
  return make_type(
      {TypeKind::Tensor, std::move(left), std::move(right), {}, {}});
}

TypePtr type_with(TypePtr left, TypePtr right) {
  return make_type({TypeKind::With, std::move(left), std::move(right), {}, {}});
}

TypePtr type_sum(TypePtr left, TypePtr right) {
  return make_type({TypeKind::Sum, std::move(left), std::move(right), {}, {}});
}

TypePtr type_bang(ExtReal index, TypePtr body) {
  return make_type({TypeKind::Bang, std::move(body), {}, index, {}});
}

TypePtr type_ident(std::string name) {
  return make_type({TypeKind::Ident, {}, {}, {}, std::move(name)});
}

bool type_equal(const TypeExpr& a, const TypeExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TypeKind::Real:
    case TypeKind::Unit:
      return true;
    case TypeKind::Lolli:
    case TypeKind::Tensor:
    case TypeKind::With:
    case TypeKind::Sum:
      return type_equal(*a.left, *b.left) && type_equal(*a.right, *b.right);
    case TypeKind::Bang:
      return a.index == b.index && type_equal(*a.left, *b.left);
    case TypeKind::Ident:
      return a.name == b.name;
  }
  return false;
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return type_equal(*a, *b);
}

bool DefEnv::define(std::string name, TypePtr type) {
  if (index_.count(name) != 0) return false;
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(type));
  return true;
}

const TypePtr* DefEnv::lookup(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return nullptr;
  return &entries_[it->second].second;
}

bool DefEnv::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

std::optional<std::string> unbound_ident(const DefEnv& phi,
                                         const TypeExpr& type) {
  switch (type.kind) {
    case TypeKind::Real:
    case TypeKind::Unit:
      return std::nullopt;
    case TypeKind::Ident:
      if (!phi.contains(type.name)) return type.name;
      return std::nullopt;
    case TypeKind::Bang:
      return unbound_ident(phi, *type.left);
    case TypeKind::Lolli:
    case TypeKind::Tensor:
    case TypeKind::With:
    case TypeKind::Sum:
      if (auto bad = unbound_ident(phi, *type.left)) return bad;
      return unbound_ident(phi, *type.right);
  }
  return std::nullopt;
}

namespace {

bool mentions_lolli_rec(const DefEnv& phi, const TypeExpr& type,
                        std::unordered_set<std::string>& visiting) {
  switch (type.kind) {
    case TypeKind::Real:
    case TypeKind::Unit:
      return false;
    case TypeKind::Lolli:
      return true;
    case TypeKind::Bang:
      return mentions_lolli_rec(phi, *type.left, visiting);
    case TypeKind::Tensor:
    case TypeKind::With:
    case TypeKind::Sum:
      return mentions_lolli_rec(phi, *type.left, visiting) ||
             mentions_lolli_rec(phi, *type.right, visiting);
    case TypeKind::Ident: {
      if (!visiting.insert(type.name).second) return false;
      const TypePtr* def = phi.lookup(type.name);
      return def != nullptr && mentions_lolli_rec(phi, **def, visiting);
    }
  }
  return false;
}

}  // namespace

bool mentions_lolli(const DefEnv& phi, const TypeExpr& type) {
  std::unordered_set<std::string> visiting;
  return mentions_lolli_rec(phi, type, visiting);
}

// ---------------------------------------------------------------------------
// Terms

TermPtr make_term(TermNode node, Span span) {
  return std::make_shared<const Term>(Term{std::move(node), span});
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return term_equal(*a, *b);
}

bool term_equal(const Term& a, const Term& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& na) {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, VarE>) {
          return na.name == nb.name;
        } else if constexpr (std::is_same_v<T, ConstE>) {
          return na.value == nb.value;
        } else if constexpr (std::is_same_v<T, PlusE>) {
          return term_equal(na.lhs, nb.lhs) && term_equal(na.rhs, nb.rhs);
        } else if constexpr (std::is_same_v<T, UnitE>) {
          return true;
        } else if constexpr (std::is_same_v<T, LamE>) {
          return na.param == nb.param && type_equal(na.annot, nb.annot) &&
                 term_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, AppE>) {
          return term_equal(na.fn, nb.fn) && term_equal(na.arg, nb.arg);
        } else if constexpr (std::is_same_v<T, TensorPairE>) {
          return term_equal(na.first, nb.first) &&
                 term_equal(na.second, nb.second);
        } else if constexpr (std::is_same_v<T, LetPairE>) {
          return na.first_name == nb.first_name &&
                 na.second_name == nb.second_name &&
                 term_equal(na.pair, nb.pair) && term_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, WithPairE>) {
          return term_equal(na.first, nb.first) &&
                 term_equal(na.second, nb.second);
        } else if constexpr (std::is_same_v<T, ProjE>) {
          return na.index == nb.index && term_equal(na.pair, nb.pair);
        } else if constexpr (std::is_same_v<T, BoxE>) {
          return na.index == nb.index && term_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, LetBoxE>) {
          return na.name == nb.name && term_equal(na.boxed, nb.boxed) &&
                 term_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, InjE>) {
          return na.left == nb.left && type_equal(na.other, nb.other) &&
                 term_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, CaseE>) {
          return term_equal(na.scrutinee, nb.scrutinee) &&
                 na.left_name == nb.left_name &&
                 term_equal(na.left_body, nb.left_body) &&
                 na.right_name == nb.right_name &&
                 term_equal(na.right_body, nb.right_body);
        } else if constexpr (std::is_same_v<T, FoldE>) {
          return na.ident == nb.ident && term_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, UnfoldE>) {
          return term_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, FixE>) {
          return na.index == nb.index && na.self_name == nb.self_name &&
                 na.param == nb.param &&
                 type_equal(na.annot_in, nb.annot_in) &&
                 type_equal(na.annot_out, nb.annot_out) &&
                 term_equal(na.body, nb.body);
        }
      },
      a.node);
}

namespace {

void collect_free_vars(const Term& term,
                       std::unordered_set<std::string>& bound,
                       std::vector<std::string>& out,
                       std::unordered_set<std::string>& seen) {
  auto visit_bound = [&](const std::vector<std::string>& names,
                         const Term& body) {
    std::vector<std::string> fresh;
    for (const auto& n : names) {
      if (bound.insert(n).second) fresh.push_back(n);
    }
    collect_free_vars(body, bound, out, seen);
    for (const auto& n : fresh) bound.erase(n);
  };
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, VarE>) {
          if (bound.count(node.name) == 0 && seen.insert(node.name).second) {
            out.push_back(node.name);
          }
        } else if constexpr (std::is_same_v<T, PlusE>) {
          collect_free_vars(*node.lhs, bound, out, seen);
          collect_free_vars(*node.rhs, bound, out, seen);
        } else if constexpr (std::is_same_v<T, LamE>) {
          visit_bound({node.param}, *node.body);
        } else if constexpr (std::is_same_v<T, AppE>) {
          collect_free_vars(*node.fn, bound, out, seen);
          collect_free_vars(*node.arg, bound, out, seen);
        } else if constexpr (std::is_same_v<T, TensorPairE> ||
                             std::is_same_v<T, WithPairE>) {
          collect_free_vars(*node.first, bound, out, seen);
          collect_free_vars(*node.second, bound, out, seen);
        } else if constexpr (std::is_same_v<T, LetPairE>) {
          collect_free_vars(*node.pair, bound, out, seen);
          visit_bound({node.first_name, node.second_name}, *node.body);
        } else if constexpr (std::is_same_v<T, ProjE>) {
          collect_free_vars(*node.pair, bound, out, seen);
        } else if constexpr (std::is_same_v<T, BoxE>) {
          collect_free_vars(*node.body, bound, out, seen);
        } else if constexpr (std::is_same_v<T, LetBoxE>) {
          collect_free_vars(*node.boxed, bound, out, seen);
          visit_bound({node.name}, *node.body);
        } else if constexpr (std::is_same_v<T, InjE>) {
          collect_free_vars(*node.body, bound, out, seen);
        } else if constexpr (std::is_same_v<T, CaseE>) {
          collect_free_vars(*node.scrutinee, bound, out, seen);
          visit_bound({node.left_name}, *node.left_body);
          visit_bound({node.right_name}, *node.right_body);
        } else if constexpr (std::is_same_v<T, FoldE> ||
                             std::is_same_v<T, UnfoldE>) {
          collect_free_vars(*node.body, bound, out, seen);
        } else if constexpr (std::is_same_v<T, FixE>) {
          visit_bound({node.self_name, node.param}, *node.body);
        }
      },
      term.node);
}

}  // namespace

std::vector<std::string> free_term_vars(const Term& term) {
  std::unordered_set<std::string> bound;
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  collect_free_vars(term, bound, out, seen);
  return out;
}

std::size_t term_size(const Term& term) {
  std::size_t n = 1;
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, PlusE>) {
          n += term_size(*node.lhs) + term_size(*node.rhs);
        } else if constexpr (std::is_same_v<T, LamE>) {
          n += term_size(*node.body);
        } else if constexpr (std::is_same_v<T, AppE>) {
          n += term_size(*node.fn) + term_size(*node.arg);
        } else if constexpr (std::is_same_v<T, TensorPairE> ||
                             std::is_same_v<T, WithPairE>) {
          n += term_size(*node.first) + term_size(*node.second);
        } else if constexpr (std::is_same_v<T, LetPairE>) {
          n += term_size(*node.pair) + term_size(*node.body);
        } else if constexpr (std::is_same_v<T, ProjE>) {
          n += term_size(*node.pair);
        } else if constexpr (std::is_same_v<T, BoxE> ||
                             std::is_same_v<T, InjE> ||
                             std::is_same_v<T, FoldE> ||
                             std::is_same_v<T, UnfoldE>) {
          n += term_size(*node.body);
        } else if constexpr (std::is_same_v<T, LetBoxE>) {
          n += term_size(*node.boxed) + term_size(*node.body);
        } else if constexpr (std::is_same_v<T, CaseE>) {
          n += term_size(*node.scrutinee) + term_size(*node.left_body) +
               term_size(*node.right_body);
        } else if constexpr (std::is_same_v<T, FixE>) {
          n += term_size(*node.body);
        }
      },
      term.node);
  return n;
}

// ---------------------------------------------------------------------------
// Values

ValueEnv ValueEnv::extend(std::string name, ValuePtr value) const {
  ValueEnv env;
  env.head_ = std::make_shared<const Node>(
      Node{std::move(name), std::move(value), head_});
  return env;
}

const ValuePtr* ValueEnv::lookup(std::string_view name) const {
  for (const Node* n = head_.get(); n != nullptr; n = n->next.get()) {
    if (n->name == name) return &n->value;
  }
  return nullptr;
}

namespace {

void harvest_unique_children(ValueNode& node, std::vector<ValuePtr>& out) {
  auto take = [&out](ValuePtr& child) {
    if (child && child.use_count() == 1) {
      out.push_back(std::move(child));
    } else {
      child.reset();
    }
  };
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TensorV> || std::is_same_v<T, WithV>) {
          take(n.first);
          take(n.second);
        } else if constexpr (std::is_same_v<T, BoxV> ||
                             std::is_same_v<T, InjV> ||
                             std::is_same_v<T, FoldV>) {
          take(n.body);
        }
        // Closure captures are environment nodes, which unlink themselves.
      },
      node);
}

}  // namespace

Value::~Value() {
  std::vector<ValuePtr> pending;
  harvest_unique_children(node, pending);
  while (!pending.empty()) {
    ValuePtr current = std::move(pending.back());
    pending.pop_back();
    // Sole owner: stripping the children first keeps the upcoming
    // destructor call flat.
    harvest_unique_children(const_cast<Value&>(*current).node, pending);
  }
}

ValuePtr make_value(ValueNode node) {
  return std::make_shared<const Value>(std::move(node));
}

bool value_equal(const ValuePtr& a, const ValuePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& na) {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, RealV>) {
          return na.value == nb.value;
        } else if constexpr (std::is_same_v<T, UnitV>) {
          return true;
        } else if constexpr (std::is_same_v<T, TensorV> ||
                             std::is_same_v<T, WithV>) {
          return value_equal(na.first, nb.first) &&
                 value_equal(na.second, nb.second);
        } else if constexpr (std::is_same_v<T, BoxV> ||
                             std::is_same_v<T, FoldV>) {
          return value_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, InjV>) {
          return na.left == nb.left && value_equal(na.body, nb.body);
        } else if constexpr (std::is_same_v<T, ClosureV>) {
          if (na.param != nb.param || na.self_name != nb.self_name ||
              !term_equal(na.body, nb.body)) {
            return false;
          }
          for (const auto& v : free_term_vars(*na.body)) {
            if (v == na.param) continue;
            if (na.self_name && v == *na.self_name) continue;
            const ValuePtr* va = na.captured.lookup(v);
            const ValuePtr* vb = nb.captured.lookup(v);
            if (!va || !vb || !value_equal(*va, *vb)) return false;
          }
          return true;
        }
      },
      a->node);
}

// ---------------------------------------------------------------------------
// Sensitivity environments

const SensBinding* SensEnv::lookup(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

ExtReal SensEnv::sens_or_zero(const std::string& name) const {
  const SensBinding* b = lookup(name);
  return b == nullptr ? ExtReal() : b->sens;
}

void SensEnv::set(std::string name, SensBinding binding) {
  entries_.insert_or_assign(std::move(name), std::move(binding));
}

void SensEnv::erase(const std::string& name) { entries_.erase(name); }

SensEnv scale_env(ExtReal r, const SensEnv& env) {
  SensEnv out;
  for (const auto& [name, binding] : env) {
    out.set(name, {mul(r, binding.sens), binding.type});
  }
  return out;
}

namespace {

// Shared shape of add_env and join_env: combine sensitivities pointwise with
// absent entries at 0, fail on conflicting types.
template <typename Combine>
std::variant<SensEnv, EnvTypeMismatch> merge_env(const SensEnv& a,
                                                 const SensEnv& b,
                                                 Combine combine) {
  SensEnv out;
  for (const auto& [name, binding] : a) {
    const SensBinding* other = b.lookup(name);
    if (other != nullptr && !type_equal(binding.type, other->type)) {
      return EnvTypeMismatch{name, binding.type, other->type};
    }
    ExtReal rhs = other != nullptr ? other->sens : ExtReal();
    out.set(name, {combine(binding.sens, rhs), binding.type});
  }
  for (const auto& [name, binding] : b) {
    if (a.lookup(name) != nullptr) continue;
    out.set(name, {combine(ExtReal(), binding.sens), binding.type});
  }
  return out;
}

}  // namespace

std::variant<SensEnv, EnvTypeMismatch> add_env(const SensEnv& a,
                                               const SensEnv& b) {
  return merge_env(a, b, [](ExtReal x, ExtReal y) { return add(x, y); });
}

std::variant<SensEnv, EnvTypeMismatch> join_env(const SensEnv& a,
                                                const SensEnv& b) {
  return merge_env(a, b, [](ExtReal x, ExtReal y) { return max(x, y); });
}

bool sens_env_equal(const SensEnv& a, const SensEnv& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [name, binding] : a) {
    const SensBinding* other = b.lookup(name);
    if (other == nullptr || binding.sens != other->sens ||
        !type_equal(binding.type, other->type)) {
      return false;
    }
  }
  return true;
}

}  // namespace fuzz
