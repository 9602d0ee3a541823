#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fuzz {

// Extended nonnegative real: either a finite value >= 0 or infinity.
// This is the carrier for all sensitivities and distances. Addition is
// infinity-absorbing; multiplication is *non-commutative* at infinity:
//
//   mul(r, inf) = inf   for every r, including r = 0
//   mul(inf, r) = 0     if r = 0, inf otherwise
//
// The first argument of mul is always the scaling factor.
class ExtReal {
 public:
  constexpr ExtReal() : value_(0.0) {}

  // Throws std::invalid_argument on NaN or negative input. Infinite input
  // is accepted and normalized to the unique infinity representation.
  explicit ExtReal(double value);

  static ExtReal infinity();

  [[nodiscard]] bool is_infinite() const;
  [[nodiscard]] bool is_zero() const { return value_ == 0.0; }

  // Underlying double; +inf encodes infinity.
  [[nodiscard]] double raw() const { return value_; }

  // "inf" for infinity, otherwise the shortest decimal that round-trips.
  [[nodiscard]] std::string to_string() const;

  // Accepts "inf" or a nonnegative decimal literal; rejects everything else.
  static std::optional<ExtReal> parse(std::string_view text);

  friend bool operator==(ExtReal a, ExtReal b) { return a.value_ == b.value_; }
  friend bool operator!=(ExtReal a, ExtReal b) { return a.value_ != b.value_; }

 private:
  double value_;
};

ExtReal add(ExtReal a, ExtReal b);

// Non-commutative product; `factor` is the scaling factor.
ExtReal mul(ExtReal factor, ExtReal x);

// Total order with infinity on top.
bool leq(ExtReal a, ExtReal b);

ExtReal max(ExtReal a, ExtReal b);

// Least r such that mul(r, s) >= t, or nullopt when no such r exists
// (t > 0 with s = 0). Minimality is with respect to the IEEE semantics of
// mul, so mul(div_ceil(t, s), s) >= t holds exactly.
std::optional<ExtReal> div_ceil(ExtReal t, ExtReal s);

}  // namespace fuzz
