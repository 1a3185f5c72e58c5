#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qslice/analytics.hpp"
#include "qslice/errors.hpp"

using namespace qslice;

namespace {

oracle::Scenario to_oracle(const AnalyticScenario& s, std::int64_t tr_milli) {
  oracle::Scenario o{static_cast<int>(s.devices_per_flow), s.malicious_probability,
                     static_cast<std::int64_t>(s.attack_frequency_ratio), tr_milli, {}, {}};
  for (int i = 0; i < 4; ++i) {
    o.pt[i] = s.catalog.probability(i);
    o.rate[i] = static_cast<std::int64_t>(s.catalog.rate(i));
  }
  return o;
}

AnalyticScenario random_scenario(std::mt19937_64& gen, int max_n, std::int64_t& tr_milli) {
  AnalyticScenario s;
  s.devices_per_flow = std::uniform_int_distribution<int>(1, max_n)(gen);
  s.malicious_probability = std::uniform_real_distribution<double>(0.05, 0.95)(gen);
  s.attack_frequency_ratio = std::uniform_int_distribution<int>(2, 20)(gen);
  tr_milli = std::uniform_int_distribution<std::int64_t>(1001, 3000)(gen);
  s.threshold_ratio = static_cast<double>(tr_milli) / 1000.0;
  std::vector<double> w(4);
  double sum = 0.0;
  for (auto& x : w) sum += (x = std::uniform_real_distribution<double>(0.05, 1.0)(gen));
  for (auto& x : w) x /= sum;
  w[3] = 1.0 - w[0] - w[1] - w[2];
  s.catalog = s.catalog.with_probabilities(w);
  return s;
}

}  // namespace

TEST_CASE("builtin rates share an 800 bit/s unit") {
  const auto r = scale_rates(builtin_factory_catalog());
  CHECK(r.unit_bps == 800.0);
  CHECK(r.multiples == std::vector<std::int64_t>{3, 1000, 150, 30});
  CHECK_FALSE(r.quantized);
}

TEST_CASE("fractional rates are quantized") {
  auto types = builtin_factory_catalog().types();
  types[0].transmission_period_ms = 7.0;  // 120 bits / 7 ms = 17142.857 bit/s
  const auto r = scale_rates(Catalog(types, {0.25, 0.25, 0.25, 0.25}));
  CHECK(r.quantized);
  CHECK(r.unit_bps == 1.0);
  CHECK(r.multiples[0] == 17143);
}

TEST_CASE("share of flows holding malicious devices") {
  for (int n : {1, 5, 50, 100, 250}) {
    for (double pm : {0.0, 0.001, 0.01, 0.3, 1.0}) {
      CHECK(p_flow_contains_malicious(n, pm) == doctest::Approx(oracle::p_b(n, pm)).epsilon(1e-12));
    }
  }
  // Table values, percent.
  CHECK(std::fabs(100 * p_flow_contains_malicious(100, 0.005) - 39.4) < 0.05);
  CHECK(std::fabs(100 * p_flow_contains_malicious(100, 0.010) - 63.4) < 0.05);
  CHECK(std::fabs(100 * p_flow_contains_malicious(100, 0.025) - 92.0) < 0.05);
}

TEST_CASE("legitimate load law") {
  AnalyticScenario s;
  s.devices_per_flow = 1;
  const auto one = legit_rate_distribution(s);
  CHECK(one.unit() == 800.0);
  CHECK(one.max_multiple() == 1000);
  CHECK(one.at(3) == 0.25);
  CHECK(one.at(30) == 0.25);
  CHECK(one.at(150) == 0.25);
  CHECK(one.at(1000) == 0.25);
  CHECK(one.at(4) == 0.0);

  s.devices_per_flow = 2;
  const auto two = legit_rate_distribution(s);
  CHECK(two.at(6) == doctest::Approx(1.0 / 16));
  CHECK(two.at(1003) == doctest::Approx(2.0 / 16));
  CHECK(two.at(2000) == doctest::Approx(1.0 / 16));
  CHECK(two.total() == doctest::Approx(1.0).epsilon(1e-12));

  s.devices_per_flow = 250;
  const auto big = legit_rate_distribution(s);
  CHECK(std::fabs(big.total() - 1.0) < 1e-9);
  double mean = 0.0;
  for (std::int64_t j = 0; j <= big.max_multiple(); ++j) mean += big.value_of(j) * big.at(j);
  CHECK(mean == doctest::Approx(250 * 236600.0).epsilon(1e-9));

  const auto tail = two.upper_tail();
  const auto cdf = two.cdf();
  for (std::size_t j = 0; j < tail.size(); ++j) CHECK(tail[j] + cdf[j] == doctest::Approx(1.0));
}

TEST_CASE("malicious excess law") {
  AnalyticScenario s;
  s.devices_per_flow = 3;
  s.malicious_probability = 0.2;
  const auto e = malicious_excess_distribution(s);
  CHECK(e.unit() == doctest::Approx(800.0 * 99));
  CHECK(e.at(0) == doctest::Approx(0.8 * 0.8 * 0.8));
  CHECK(e.at(3000) == doctest::Approx(0.05 * 0.05 * 0.05));
  CHECK(std::fabs(e.total() - 1.0) < 1e-12);

  s.attack_frequency_ratio = 1.0;
  CHECK(malicious_excess_distribution(s).mass().size() == 1);
}

TEST_CASE("convolution formula equals literal appendix evaluation") {
  std::mt19937_64 gen(424242);
  for (int i = 0; i < 25; ++i) {
    std::int64_t tr_milli = 0;
    const auto s = random_scenario(gen, 7, tr_milli);
    const auto fast = p_detect_general(s);
    REQUIRE(fast.has_value());
    CHECK(*fast == doctest::Approx(oracle::literal_p_detect(to_oracle(s, tr_milli))).epsilon(1e-12));
  }
}

TEST_CASE("joint enumeration equals per-device enumeration") {
  std::mt19937_64 gen(777);
  for (int i = 0; i < 25; ++i) {
    std::int64_t tr_milli = 0;
    const auto s = random_scenario(gen, 5, tr_milli);
    const auto joint = brute_force_p_detect(s);
    REQUIRE(joint.has_value());
    CHECK(*joint == doctest::Approx(oracle::joint_p_detect(to_oracle(s, tr_milli))).epsilon(1e-12));
  }
}

TEST_CASE("ties at the threshold are not detections") {
  // n = 1, type 3 only: load 24000, excess 24000 (f_m - 1) with f_m = 2.
  // t_r = 2 puts the flow exactly on the threshold.
  AnalyticScenario s;
  s.devices_per_flow = 1;
  s.malicious_probability = 0.5;
  s.attack_frequency_ratio = 2.0;
  s.threshold_ratio = 2.0;
  s.catalog = s.catalog.with_probabilities({0.0, 0.0, 0.0, 1.0});
  CHECK(*p_detect_general(s) == 0.0);
  CHECK(*brute_force_p_detect(s) == 0.0);
  s.threshold_ratio = 1.999;
  CHECK(*brute_force_p_detect(s) == 1.0);
}

TEST_CASE("monotone in threshold and attack intensity") {
  AnalyticScenario s;
  s.devices_per_flow = 40;
  s.malicious_probability = 0.05;
  double prev = 2.0;
  for (double tr : {1.0, 1.001, 1.01, 1.05, 1.2, 1.5, 2.0, 4.0, 8.0}) {
    s.threshold_ratio = tr;
    const double v = *p_detect_general(s);
    CHECK(v <= prev + 1e-12);
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
    prev = v;
  }
  s.threshold_ratio = 1.05;
  prev = -1.0;
  for (double fm : {1.0, 1.5, 2.0, 5.0, 20.0, 100.0, 150.0}) {
    s.attack_frequency_ratio = fm;
    const double v = *p_detect_general(s);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("curve matches pointwise evaluation") {
  AnalyticScenario s;
  const std::size_t sizes[] = {1, 10, 50, 70, 120};
  const auto curve = p_detect_general_curve(s, sizes);
  for (std::size_t i = 0; i < 5; ++i) {
    s.devices_per_flow = sizes[i];
    CHECK(*curve[i] == doctest::Approx(*p_detect_general(s)).epsilon(1e-12));
  }
  const std::size_t unordered[] = {10, 5};
  CHECK_THROWS_AS(p_detect_general_curve(s, unordered), InvalidInput);
}

TEST_CASE("special-case formula") {
  AnalyticScenario s;  // the listed configuration
  for (std::size_t n : {10, 60, 100, 200}) {
    s.devices_per_flow = n;
    CHECK_NOTHROW(check_special_envelope(s));
    const double pb = oracle::p_b(static_cast<int>(n), 0.01);
    const double pc = oracle::p_b(static_cast<int>(n), 0.01 * 0.75);
    CHECK(*contribution_nonzero_types(s) == doctest::Approx(pc / pb).epsilon(1e-10));
    const double special = *p_detect_special(s);
    CHECK(special >= *contribution_nonzero_types(s));
    CHECK(special <= 1.0 + 1e-12);
  }
  s.devices_per_flow = 10;
  CHECK(*p_detect_special(s) == doctest::Approx(1.0).epsilon(1e-9));

  auto off = s;
  off.threshold_ratio = 4.0;
  CHECK_THROWS_AS(check_special_envelope(off), AssumptionViolation);
  CHECK_THROWS_AS(p_detect_special(off), AssumptionViolation);

  // A tiny flow satisfies the sufficient condition outside the listed setup.
  auto small = s;
  small.devices_per_flow = 2;
  small.malicious_probability = 0.3;
  small.attack_frequency_ratio = 50.0;
  small.threshold_ratio = 1.2;
  CHECK_NOTHROW(check_special_envelope(small));
}

TEST_CASE("undefined and rejected inputs") {
  AnalyticScenario s;
  s.malicious_probability = 0.0;
  CHECK_FALSE(p_detect_general(s).has_value());
  CHECK_FALSE(p_detect_special(s).has_value());
  s.devices_per_flow = 4;
  CHECK_FALSE(brute_force_p_detect(s).has_value());

  AnalyticScenario low;
  low.threshold_ratio = 0.9;
  CHECK_THROWS_AS(p_detect_general(low), InvalidInput);

  AnalyticScenario big;
  big.devices_per_flow = 13;
  CHECK_THROWS_AS(brute_force_p_detect(big), CapacityError);

  AnalyticOptions tight;
  tight.max_cells = 5000;
  CHECK_THROWS_AS(p_detect_general(AnalyticScenario{}, tight), CapacityError);
}
