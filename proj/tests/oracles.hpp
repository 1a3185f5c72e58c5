#pragma once

// Reference computations written directly from the closed forms, sharing no
// code with the library. Small n only.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

inline double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

inline double ipow(double b, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

/// Probability that a flow of n devices holds at least one malicious one.
inline double p_b(int n, double pm) { return 1.0 - ipow(1.0 - pm, n); }

/// Four-type scenario with integer rates (bit/s), integer f_m and a
/// threshold ratio given in thousandths (t_r = tr_milli / 1000).
struct Scenario {
  int n;
  double pm;
  std::int64_t fm;
  std::int64_t tr_milli;
  double pt[4];
  std::int64_t rate[4];
};

/// Literal appendix evaluation: group legitimate compositions by their
/// threshold headroom x, then for every x sum the malicious compositions
/// whose excess beats it. Comparisons are exact integers:
///   excess * (f_m - 1) > load * (t_r - 1)
/// is evaluated as  M (f_m - 1) 1000 > L (tr_milli - 1000).
inline double literal_p_detect(const Scenario& s) {
  const int n = s.n;
  // x is kept as L * (tr_milli - 1000), i.e. 1000 times the headroom.
  std::map<std::int64_t, double> p_excess_level;
  for (int n0 = 0; n0 <= n; ++n0)
    for (int n1 = 0; n1 <= n - n0; ++n1)
      for (int n2 = 0; n2 <= n - n0 - n1; ++n2) {
        const int n3 = n - n0 - n1 - n2;
        const double w = binomial(n, n0) * binomial(n - n0, n1) * binomial(n - n0 - n1, n2) * ipow(s.pt[0], n0) *
                         ipow(s.pt[1], n1) * ipow(s.pt[2], n2) * ipow(s.pt[3], n3);
        const std::int64_t load = n0 * s.rate[0] + n1 * s.rate[1] + n2 * s.rate[2] + n3 * s.rate[3];
        p_excess_level[load * (s.tr_milli - 1000)] += w;
      }

  double total = 0.0;
  for (const auto& [x, p_ex] : p_excess_level) {
    double p_a_given_x = 0.0;
    for (int m0 = 0; m0 <= n; ++m0)
      for (int m1 = 0; m1 <= n - m0; ++m1)
        for (int m2 = 0; m2 <= n - m0 - m1; ++m2)
          for (int m3 = 0; m3 <= n - m0 - m1 - m2; ++m3) {
            const int m = m0 + m1 + m2 + m3;
            const std::int64_t excess = m0 * s.rate[0] + m1 * s.rate[1] + m2 * s.rate[2] + m3 * s.rate[3];
            if (!(excess * (s.fm - 1) * 1000 > x)) continue;
            p_a_given_x += binomial(n, m0) * binomial(n - m0, m1) * binomial(n - m0 - m1, m2) *
                           binomial(n - m0 - m1 - m2, m3) * ipow(s.pm, m) * ipow(1.0 - s.pm, n - m) *
                           ipow(s.pt[0], m0) * ipow(s.pt[1], m1) * ipow(s.pt[2], m2) * ipow(s.pt[3], m3);
          }
    total += p_a_given_x * p_ex;
  }
  return total / p_b(n, s.pm);
}

/// Exact detection probability under the per-device model: each device is
/// of type i with probability pt[i] and malicious with probability pm, a
/// malicious device adds rate (f_m - 1) r(i) on top of its own r(i).
/// Enumerates every device assignment (8^n states), so n <= 6.
inline double joint_p_detect(const Scenario& s) {
  const int n = s.n;
  std::int64_t states = 1;
  for (int i = 0; i < n; ++i) states *= 8;
  double detected = 0.0;
  for (std::int64_t code = 0; code < states; ++code) {
    std::int64_t c = code, load = 0, excess = 0;
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const int state = static_cast<int>(c % 8);
      c /= 8;
      const int type = state % 4;
      const bool bad = state >= 4;
      w *= s.pt[type] * (bad ? s.pm : 1.0 - s.pm);
      load += s.rate[type];
      if (bad) excess += s.rate[type];
    }
    if (excess > 0 && excess * (s.fm - 1) * 1000 > load * (s.tr_milli - 1000)) detected += w;
  }
  return detected / p_b(n, s.pm);
}

/// Threshold above which a single attacker of a given rate is lost in a flow
/// of n devices with mean rate `mean`.
inline double detection_limit(double rate, double fm, int n, double mean) {
  return 1.0 + rate * (fm - 1.0) / (n * mean);
}

/// Arrival count of a periodic source inside [0, window): the number of
/// integers k >= 0 with phase + k period < window, by direct counting.
inline std::uint64_t count_arrivals(double period, double phase, double window) {
  std::uint64_t k = 0;
  while (phase + static_cast<double>(k) * period < window) ++k;
  return k;
}

}  // namespace oracle
