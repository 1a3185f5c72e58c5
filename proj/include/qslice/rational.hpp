#pragma once

#include <cstdint>

namespace qslice {

/// Exact ratio num/den with den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  /// Recovers the shortest fraction (denominator <= max_den) that rounds to
  /// exactly `x`. Decimal inputs such as 1.01 come back as 101/100.
  static Rational from_double(double x, std::int64_t max_den = 1'000'000'000);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational minus_one() const { return {num - den, den}; }
};

/// Decides `excess * scale_a > threshold * scale_b` style inequalities for
/// integer left/right operands without rounding:
///   lhs * a.num * b.den  >  rhs * b.num * a.den
bool exact_greater(std::int64_t lhs, Rational a, std::int64_t rhs, Rational b);

/// Largest integer q with q * a.num * b.den <= rhs * b.num * a.den, i.e. the
/// threshold such that `exact_greater(m, a, rhs, b)` holds iff m > q.
/// Requires a.num > 0.
std::int64_t exact_floor_ratio(std::int64_t rhs, Rational b, Rational a);

}  // namespace qslice
