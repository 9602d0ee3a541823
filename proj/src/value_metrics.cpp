#include "fuzz/value_metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "fuzz/evaluator.hpp"
#include "fuzz/gen.hpp"

namespace fuzz {

namespace {

// Probe arguments live in a fixed box; any distribution yields a valid lower
// bound, so the range only affects how quickly probes separate functions.
constexpr GenLimits kProbeLimits{-100.0, 100.0, 4};

[[noreturn]] void shape_mismatch(const TypeExpr& type) {
  throw std::logic_error("value_distance: value does not inhabit type kind " +
                         std::to_string(static_cast<int>(type.kind)));
}

DistanceResult distance_rec(const DefEnv& phi, const TypeExpr& type,
                            const ValuePtr& a, const ValuePtr& b,
                            const MetricConfig& cfg) {
  switch (type.kind) {
    case TypeKind::Real: {
      const auto* ra = std::get_if<RealV>(&a->node);
      const auto* rb = std::get_if<RealV>(&b->node);
      if (ra == nullptr || rb == nullptr) shape_mismatch(type);
      return {ExtReal(std::fabs(ra->value - rb->value)), true};
    }
    case TypeKind::Unit: {
      if (!std::holds_alternative<UnitV>(a->node) ||
          !std::holds_alternative<UnitV>(b->node)) {
        shape_mismatch(type);
      }
      return {ExtReal(0.0), true};
    }
    case TypeKind::Bang: {
      const auto* ba = std::get_if<BoxV>(&a->node);
      const auto* bb = std::get_if<BoxV>(&b->node);
      if (ba == nullptr || bb == nullptr) shape_mismatch(type);
      DistanceResult inner = distance_rec(phi, *type.left, ba->body, bb->body, cfg);
      return {mul(type.index, inner.value), inner.exact};
    }
    case TypeKind::Tensor: {
      const auto* ta = std::get_if<TensorV>(&a->node);
      const auto* tb = std::get_if<TensorV>(&b->node);
      if (ta == nullptr || tb == nullptr) shape_mismatch(type);
      DistanceResult l = distance_rec(phi, *type.left, ta->first, tb->first, cfg);
      DistanceResult r =
          distance_rec(phi, *type.right, ta->second, tb->second, cfg);
      return {add(l.value, r.value), l.exact && r.exact};
    }
    case TypeKind::With: {
      const auto* wa = std::get_if<WithV>(&a->node);
      const auto* wb = std::get_if<WithV>(&b->node);
      if (wa == nullptr || wb == nullptr) shape_mismatch(type);
      DistanceResult l = distance_rec(phi, *type.left, wa->first, wb->first, cfg);
      DistanceResult r =
          distance_rec(phi, *type.right, wa->second, wb->second, cfg);
      return {max(l.value, r.value), l.exact && r.exact};
    }
    case TypeKind::Sum: {
      const auto* ia = std::get_if<InjV>(&a->node);
      const auto* ib = std::get_if<InjV>(&b->node);
      if (ia == nullptr || ib == nullptr) shape_mismatch(type);
      if (ia->left != ib->left) return {ExtReal::infinity(), true};
      return distance_rec(phi, ia->left ? *type.left : *type.right, ia->body,
                          ib->body, cfg);
    }
    case TypeKind::Ident: {
      const auto* fa = std::get_if<FoldV>(&a->node);
      const auto* fb = std::get_if<FoldV>(&b->node);
      if (fa == nullptr || fb == nullptr) shape_mismatch(type);
      const TypePtr* unfolding = phi.lookup(type.name);
      if (unfolding == nullptr) shape_mismatch(type);
      // Values are finite, so unfolding once per fold layer terminates.
      return distance_rec(phi, **unfolding, fa->body, fb->body, cfg);
    }
    case TypeKind::Lolli: {
      if (!std::holds_alternative<ClosureV>(a->node) ||
          !std::holds_alternative<ClosureV>(b->node)) {
        shape_mismatch(type);
      }
      // The true distance is sup over the whole domain; report the max over
      // sampled arguments as an explicit lower bound. Domains that are
      // themselves function spaces admit no generated probes.
      if (mentions_lolli(phi, *type.left)) return {ExtReal(0.0), false};
      ExtReal best(0.0);
      for (int i = 0; i < cfg.samples; ++i) {
        std::mt19937_64 rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(i)));
        ValuePtr arg = gen_value(phi, *type.left, rng, kProbeLimits);
        Outcome oa = apply_closure(a, arg, cfg.probe_fuel);
        Outcome ob = apply_closure(b, arg, cfg.probe_fuel);
        if (oa.kind == Outcome::Kind::Stuck || ob.kind == Outcome::Kind::Stuck) {
          throw std::logic_error("value_distance: probe application got stuck: " +
                                 (oa.kind == Outcome::Kind::Stuck
                                      ? oa.stuck_reason
                                      : ob.stuck_reason));
        }
        if (oa.is_terminated() != ob.is_terminated()) {
          best = ExtReal::infinity();
          break;
        }
        if (!oa.is_terminated()) continue;  // both censored: d(bot, bot) = 0
        DistanceResult probe =
            distance_rec(phi, *type.right, oa.value, ob.value, cfg);
        best = max(best, probe.value);
      }
      return {best, false};
    }
  }
  shape_mismatch(type);
}

}  // namespace

DistanceResult value_distance(const DefEnv& phi, const TypeExpr& type,
                              const ValuePtr& a, const ValuePtr& b,
                              const MetricConfig& cfg) {
  return distance_rec(phi, type, a, b, cfg);
}

DistanceResult env_distance(const DefEnv& phi, const SensEnv& declared,
                            const ValueSubst& s1, const ValueSubst& s2,
                            const MetricConfig& cfg) {
  DistanceResult total{ExtReal(0.0), true};
  for (const auto& [name, binding] : declared) {
    auto it1 = s1.find(name);
    auto it2 = s2.find(name);
    if (it1 == s1.end() || it2 == s2.end()) {
      throw std::invalid_argument("env_distance: missing binding for '" +
                                  name + "'");
    }
    DistanceResult d =
        distance_rec(phi, *binding.type, it1->second, it2->second, cfg);
    total.value = add(total.value, mul(binding.sens, d.value));
    total.exact = total.exact && d.exact;
  }
  return total;
}

}  // namespace fuzz
