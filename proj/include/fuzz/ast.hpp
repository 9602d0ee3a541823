#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "fuzz/diagnostics.hpp"
#include "fuzz/extreal.hpp"

namespace fuzz {

// ---------------------------------------------------------------------------
// Types

struct TypeExpr;
using TypePtr = std::shared_ptr<const TypeExpr>;

enum class TypeKind { Real, Unit, Lolli, Tensor, With, Sum, Bang, Ident };

struct TypeExpr {
  TypeKind kind;
  TypePtr left;       // Lolli domain; Tensor/With/Sum left; Bang body
  TypePtr right;      // Lolli codomain; Tensor/With/Sum right
  ExtReal index;      // Bang scaling factor
  std::string name;   // Ident
};

TypePtr type_real();
TypePtr type_unit();
TypePtr type_lolli(TypePtr domain, TypePtr codomain);
TypePtr type_tensor(TypePtr left, TypePtr right);
TypePtr type_with(TypePtr left, TypePtr right);
TypePtr type_sum(TypePtr left, TypePtr right);
TypePtr type_bang(ExtReal index, TypePtr body);
TypePtr type_ident(std::string name);

// Syntactic equality: identifiers compare by name, Bang indices by ExtReal
// equality. No subtyping.
bool type_equal(const TypeExpr& a, const TypeExpr& b);
bool type_equal(const TypePtr& a, const TypePtr& b);

// Global definition environment for iso-recursive type identifiers.
class DefEnv {
 public:
  // Returns false if the name is already defined.
  bool define(std::string name, TypePtr type);
  [[nodiscard]] const TypePtr* lookup(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const;
  [[nodiscard]] const std::vector<std::pair<std::string, TypePtr>>& entries()
      const {
    return entries_;
  }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

 private:
  std::vector<std::pair<std::string, TypePtr>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// First identifier in `type` that is not bound in `phi`, if any.
std::optional<std::string> unbound_ident(const DefEnv& phi,
                                         const TypeExpr& type);

inline bool well_formed(const DefEnv& phi, const TypeExpr& type) {
  return !unbound_ident(phi, type).has_value();
}

// True if the type mentions a function space, directly or through phi.
bool mentions_lolli(const DefEnv& phi, const TypeExpr& type);

// ---------------------------------------------------------------------------
// Terms

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct VarE {
  std::string name;
};
struct ConstE {
  double value;
};
struct PlusE {
  TermPtr lhs, rhs;
};
struct UnitE {};
struct LamE {
  std::string param;
  TypePtr annot;
  TermPtr body;
};
struct AppE {
  TermPtr fn, arg;
};
struct TensorPairE {
  TermPtr first, second;
};
struct LetPairE {
  std::string first_name, second_name;
  TermPtr pair, body;
};
struct WithPairE {
  TermPtr first, second;
};
struct ProjE {
  int index;  // 1 or 2
  TermPtr pair;
};
struct BoxE {
  ExtReal index;
  TermPtr body;
};
struct LetBoxE {
  std::string name;
  TermPtr boxed, body;
};
struct InjE {
  bool left;      // inl when true, inr otherwise
  TypePtr other;  // the absent summand
  TermPtr body;
};
struct CaseE {
  TermPtr scrutinee;
  std::string left_name;
  TermPtr left_body;
  std::string right_name;
  TermPtr right_body;
};
struct FoldE {
  std::string ident;
  TermPtr body;
};
struct UnfoldE {
  TermPtr body;
};
struct FixE {
  ExtReal index;  // bound on the recursive name's sensitivity
  std::string self_name;
  std::string param;
  TypePtr annot_in, annot_out;
  TermPtr body;
};

using TermNode =
    std::variant<VarE, ConstE, PlusE, UnitE, LamE, AppE, TensorPairE,
                 LetPairE, WithPairE, ProjE, BoxE, LetBoxE, InjE, CaseE,
                 FoldE, UnfoldE, FixE>;

struct Term {
  TermNode node;
  Span span;
};

TermPtr make_term(TermNode node, Span span = {});

// Structural equality modulo spans.
bool term_equal(const Term& a, const Term& b);
bool term_equal(const TermPtr& a, const TermPtr& b);

// Free variables in order of first occurrence.
std::vector<std::string> free_term_vars(const Term& term);

std::size_t term_size(const Term& term);

// ---------------------------------------------------------------------------
// Values

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

// Persistent binding list; extension shares the tail.
class ValueEnv {
 public:
  ValueEnv() = default;
  [[nodiscard]] ValueEnv extend(std::string name, ValuePtr value) const;
  [[nodiscard]] const ValuePtr* lookup(std::string_view name) const;
  [[nodiscard]] bool empty() const { return head_ == nullptr; }

 private:
  struct Node {
    std::string name;
    ValuePtr value;
    std::shared_ptr<const Node> next;

    // Long chains are unlinked iteratively while this node is the sole
    // owner of the tail; per-node recursive destruction would overflow the
    // stack on deep environments.
    ~Node() {
      std::shared_ptr<const Node> tail = std::move(next);
      while (tail && tail.use_count() == 1) {
        std::shared_ptr<const Node> rest =
            std::move(const_cast<Node&>(*tail).next);
        tail = std::move(rest);
      }
    }
  };
  std::shared_ptr<const Node> head_;
};

struct RealV {
  double value;
};
struct UnitV {};
struct TensorV {
  ValuePtr first, second;
};
struct WithV {
  ValuePtr first, second;
};
struct BoxV {
  ValuePtr body;
};
struct InjV {
  bool left;
  ValuePtr body;
};
struct FoldV {
  ValuePtr body;
};
struct ClosureV {
  std::string param;
  TypePtr param_annot;
  TermPtr body;
  ValueEnv captured;
  std::optional<std::string> self_name;  // recursive binding for fix
  TypePtr self_annot;                    // in -o out for fix closures
};

using ValueNode =
    std::variant<RealV, UnitV, TensorV, WithV, BoxV, InjV, FoldV, ClosureV>;

struct Value {
  ValueNode node;

  explicit Value(ValueNode n) : node(std::move(n)) {}
  Value(Value&&) noexcept = default;
  Value(const Value&) = delete;
  Value& operator=(const Value&) = delete;
  // Tears down uniquely-owned descendants iteratively; fold chains can be
  // tens of thousands of layers deep.
  ~Value();
};

ValuePtr make_value(ValueNode node);

// Structural equality; closures compare by parameter, body (modulo spans),
// self name and captured bindings of the body's free variables.
bool value_equal(const ValuePtr& a, const ValuePtr& b);

// ---------------------------------------------------------------------------
// Sensitivity environments

struct SensBinding {
  ExtReal sens;
  TypePtr type;
};

class SensEnv {
 public:
  [[nodiscard]] const SensBinding* lookup(const std::string& name) const;
  [[nodiscard]] ExtReal sens_or_zero(const std::string& name) const;
  void set(std::string name, SensBinding binding);
  void erase(const std::string& name);
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] auto begin() const { return entries_.begin(); }
  [[nodiscard]] auto end() const { return entries_.end(); }

 private:
  std::map<std::string, SensBinding> entries_;
};

// A shared variable bound at different types in the two operands.
struct EnvTypeMismatch {
  std::string variable;
  TypePtr left_type, right_type;
};

// Every sensitivity becomes mul(r, s); types unchanged.
SensEnv scale_env(ExtReal r, const SensEnv& env);

// Pointwise addition; a variable present on one side only counts as present
// at sensitivity 0 on the other.
std::variant<SensEnv, EnvTypeMismatch> add_env(const SensEnv& a,
                                               const SensEnv& b);

// Pointwise maximum, absent entries treated as 0.
std::variant<SensEnv, EnvTypeMismatch> join_env(const SensEnv& a,
                                                const SensEnv& b);

bool sens_env_equal(const SensEnv& a, const SensEnv& b);

}  // namespace fuzz
