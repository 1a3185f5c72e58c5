#include "qslice/rational.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qslice/errors.hpp"

namespace qslice {

namespace {

using Wide = __int128;

Wide floor_div(Wide n, Wide d) {
  Wide q = n / d;
  if ((n % d != 0) && ((n < 0) != (d < 0))) --q;
  return q;
}

}  // namespace

Rational Rational::from_double(double x, std::int64_t max_den) {
  if (!std::isfinite(x) || std::fabs(x) > 1e15) {
    throw InvalidInput("ratio out of representable range: " + std::to_string(x));
  }
  const bool negative = x < 0;
  const double target = std::fabs(x);

  // Continued-fraction convergents h/k.
  Wide h_prev = 0, h = 1;
  Wide k_prev = 1, k = 0;
  double y = target;
  Rational best{static_cast<std::int64_t>(std::llround(target)), 1};
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(y);
    const Wide h_next = static_cast<Wide>(a) * h + h_prev;
    const Wide k_next = static_cast<Wide>(a) * k + k_prev;
    if (k_next > max_den || h_next > std::numeric_limits<std::int64_t>::max() / 4) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    best = {static_cast<std::int64_t>(h), static_cast<std::int64_t>(k)};
    if (static_cast<double>(h) / static_cast<double>(k) == target) break;
    const double frac = y - a;
    if (frac <= 0.0) break;
    y = 1.0 / frac;
  }
  if (negative) best.num = -best.num;
  return best;
}

bool exact_greater(std::int64_t lhs, Rational a, std::int64_t rhs, Rational b) {
  const Wide left = static_cast<Wide>(lhs) * a.num * b.den;
  const Wide right = static_cast<Wide>(rhs) * b.num * a.den;
  return left > right;
}

std::int64_t exact_floor_ratio(std::int64_t rhs, Rational b, Rational a) {
  const Wide n = static_cast<Wide>(rhs) * b.num * a.den;
  const Wide d = static_cast<Wide>(a.num) * b.den;
  const Wide q = floor_div(n, d);
  constexpr Wide hi = std::numeric_limits<std::int64_t>::max();
  constexpr Wide lo = std::numeric_limits<std::int64_t>::min();
  return static_cast<std::int64_t>(q > hi ? hi : (q < lo ? lo : q));
}

}  // namespace qslice
