#include "fuzz/gen.hpp"

#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace fuzz {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + unit * (hi - lo);
}

namespace {

constexpr int kUnreachable = std::numeric_limits<int>::max() / 2;

// Minimal number of fold layers needed to build a value of each identifier,
// computed as a least fixed point over the definition environment.
class DepthOracle {
 public:
  explicit DepthOracle(const DefEnv& phi) {
    for (const auto& [name, type] : phi.entries()) {
      depths_[name] = kUnreachable;
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [name, type] : phi.entries()) {
        int d = depth_of(*type);
        int candidate = d >= kUnreachable ? kUnreachable : d + 1;
        if (candidate < depths_[name]) {
          depths_[name] = candidate;
          changed = true;
        }
      }
    }
  }

  int depth_of(const TypeExpr& type) const {
    switch (type.kind) {
      case TypeKind::Real:
      case TypeKind::Unit:
      case TypeKind::Lolli:
        return 0;
      case TypeKind::Bang:
        return depth_of(*type.left);
      case TypeKind::Tensor:
      case TypeKind::With: {
        int l = depth_of(*type.left);
        int r = depth_of(*type.right);
        return l > r ? l : r;
      }
      case TypeKind::Sum: {
        int l = depth_of(*type.left);
        int r = depth_of(*type.right);
        return l < r ? l : r;
      }
      case TypeKind::Ident: {
        auto it = depths_.find(type.name);
        return it == depths_.end() ? kUnreachable : it->second;
      }
    }
    return kUnreachable;
  }

 private:
  std::unordered_map<std::string, int> depths_;
};

// Generates one value or a structurally identical perturbed pair in a single
// walk, so both modes draw from the rng in the same order.
class Generator {
 public:
  Generator(const DefEnv& phi, std::mt19937_64& rng, const GenLimits& limits,
            double delta)
      : oracle_(phi), phi_(phi), rng_(rng), limits_(limits), delta_(delta) {}

  std::pair<ValuePtr, ValuePtr> gen(const TypeExpr& type, int budget) {
    switch (type.kind) {
      case TypeKind::Real: {
        double k = uniform_real(rng_, limits_.real_lo, limits_.real_hi);
        double offset =
            delta_ == 0.0 ? 0.0 : uniform_real(rng_, -delta_, delta_);
        return {make_value(RealV{k}), make_value(RealV{k + offset})};
      }
      case TypeKind::Unit:
        return {make_value(UnitV{}), make_value(UnitV{})};
      case TypeKind::Tensor: {
        auto first = gen(*type.left, budget);
        auto second = gen(*type.right, budget);
        return {make_value(TensorV{first.first, second.first}),
                make_value(TensorV{first.second, second.second})};
      }
      case TypeKind::With: {
        auto first = gen(*type.left, budget);
        auto second = gen(*type.right, budget);
        return {make_value(WithV{first.first, second.first}),
                make_value(WithV{first.second, second.second})};
      }
      case TypeKind::Bang: {
        auto body = gen(*type.left, budget);
        return {make_value(BoxV{body.first}), make_value(BoxV{body.second})};
      }
      case TypeKind::Sum: {
        bool left_ok = oracle_.depth_of(*type.left) <= budget;
        bool right_ok = oracle_.depth_of(*type.right) <= budget;
        if (!left_ok && !right_ok) {
          throw std::invalid_argument(
              "gen_value: max_list_depth too small for type");
        }
        bool go_left =
            left_ok && (!right_ok || uniform_real(rng_, 0.0, 1.0) < 0.5);
        auto body = gen(go_left ? *type.left : *type.right, budget);
        return {make_value(InjV{go_left, body.first}),
                make_value(InjV{go_left, body.second})};
      }
      case TypeKind::Ident: {
        const TypePtr* unfolding = phi_.lookup(type.name);
        if (unfolding == nullptr || budget < oracle_.depth_of(type)) {
          throw std::invalid_argument(
              "gen_value: max_list_depth too small for type '" + type.name +
              "'");
        }
        auto body = gen(**unfolding, budget - 1);
        return {make_value(FoldV{body.first}), make_value(FoldV{body.second})};
      }
      case TypeKind::Lolli:
        throw std::invalid_argument(
            "gen_value: function types are not supported");
    }
    throw std::invalid_argument("gen_value: unexpected type");
  }

 private:
  DepthOracle oracle_;
  const DefEnv& phi_;
  std::mt19937_64& rng_;
  GenLimits limits_;
  double delta_;
};

}  // namespace

int min_fold_depth(const DefEnv& phi, const TypeExpr& type) {
  return DepthOracle(phi).depth_of(type);
}

ValuePtr gen_value(const DefEnv& phi, const TypeExpr& type,
                   std::mt19937_64& rng, const GenLimits& limits) {
  Generator generator(phi, rng, limits, 0.0);
  return generator.gen(type, limits.max_list_depth).first;
}

std::pair<ValuePtr, ValuePtr> gen_nearby_pair(const DefEnv& phi,
                                              const TypeExpr& type,
                                              std::mt19937_64& rng,
                                              double delta,
                                              const GenLimits& limits) {
  Generator generator(phi, rng, limits, delta);
  return generator.gen(type, limits.max_list_depth);
}

}  // namespace fuzz
