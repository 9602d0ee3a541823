#include "fuzz/extreal.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fuzz {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ExtReal::ExtReal(double value) : value_(value) {
  if (std::isnan(value)) {
    throw std::invalid_argument("ExtReal: NaN is not a valid sensitivity");
  }
  if (value < 0.0) {
    throw std::invalid_argument("ExtReal: negative value " +
                                std::to_string(value));
  }
}

ExtReal ExtReal::infinity() { return ExtReal(kInf); }

bool ExtReal::is_infinite() const { return std::isinf(value_); }

std::string ExtReal::to_string() const {
  if (is_infinite()) return "inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value_);
  return std::string(buf, ptr);
}

std::optional<ExtReal> ExtReal::parse(std::string_view text) {
  if (text == "inf") return ExtReal::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  if (std::isnan(v) || v < 0.0) return std::nullopt;
  return ExtReal(v);
}

ExtReal add(ExtReal a, ExtReal b) {
  if (a.is_infinite() || b.is_infinite()) return ExtReal::infinity();
  return ExtReal(a.raw() + b.raw());
}

ExtReal mul(ExtReal factor, ExtReal x) {
  if (x.is_infinite()) return ExtReal::infinity();
  if (factor.is_infinite()) {
    return x.is_zero() ? ExtReal(0.0) : ExtReal::infinity();
  }
  return ExtReal(factor.raw() * x.raw());
}

bool leq(ExtReal a, ExtReal b) { return a.raw() <= b.raw(); }

ExtReal max(ExtReal a, ExtReal b) { return leq(a, b) ? b : a; }

std::optional<ExtReal> div_ceil(ExtReal t, ExtReal s) {
  if (t.is_zero()) return ExtReal(0.0);
  if (s.is_infinite()) return ExtReal(0.0);
  if (s.is_zero()) return std::nullopt;  // mul(r, 0) is 0 for every r
  if (t.is_infinite()) return ExtReal::infinity();
  // Finite t > 0, finite s > 0: start from the rounded quotient and walk
  // ulps until mul(r, s) >= t holds and is minimal under IEEE rounding.
  double r = t.raw() / s.raw();
  while (r * s.raw() < t.raw()) r = std::nextafter(r, kInf);
  while (r > 0.0) {
    double down = std::nextafter(r, 0.0);
    if (down * s.raw() >= t.raw()) {
      r = down;
    } else {
      break;
    }
  }
  return ExtReal(r);
}

}  // namespace fuzz
