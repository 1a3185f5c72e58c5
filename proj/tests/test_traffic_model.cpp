#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qslice/errors.hpp"
#include "qslice/traffic_model.hpp"

using namespace qslice;

TEST_CASE("scenario bounds") {
  ScenarioParams p;
  CHECK_NOTHROW(p.validate());
  auto bad = p;
  bad.devices_per_flow = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = p;
  bad.malicious_probability = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = p;
  bad.attack_frequency_ratio = 0.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = p;
  bad.threshold_ratio = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = p;
  bad.sampling_period_s = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("arrival counting matches direct enumeration") {
  // Dyadic periods and phases keep the oracle's k * period exact.
  std::mt19937_64 gen(7);
  const double periods[] = {0.5, 2.0, 50.0, 0.25, 0.125, 3.0, 7.0};
  for (double period : periods) {
    for (int trial = 0; trial < 200; ++trial) {
      const double phase = std::floor(std::uniform_real_distribution<double>(0.0, period)(gen) * 64.0) / 64.0;
      const double window = 1000.0 * (1 + trial % 3);
      CHECK(frames_in_window(period, phase, window) == oracle::count_arrivals(period, phase, window));
    }
  }
  CHECK(frames_in_window(50.0, 0.0, 1000.0) == 20);
  CHECK(frames_in_window(50.0, 49.9, 1000.0) == 20);
  CHECK(frames_in_window(3.0, 0.0, 10.0) == 4);
  CHECK(frames_in_window(3.0, 1.5, 10.0) == 3);
  CHECK(frames_in_window(10.0, 20.0, 10.0) == 0);
}

TEST_CASE("divisible windows count exactly despite binary rounding") {
  // 0.5 ms / 100 and 50 ms / 3 are not representable; the count must still
  // be window * f_m / period for every phase.
  std::mt19937_64 gen(11);
  for (double fm : {3.0, 7.0, 100.0, 150.0}) {
    for (double period : {50.0, 0.5, 2.0, 5.0}) {
      const double eff = period / fm;
      for (double window : {200.0, 500.0, 1000.0, 1500.0}) {
        const auto expected = static_cast<std::uint64_t>(std::llround(window / period * fm));
        for (int i = 0; i < 50; ++i) {
          const double phase = std::uniform_real_distribution<double>(0.0, 1.0)(gen) * eff;
          CHECK(frames_in_window(eff, phase, window) == expected);
        }
      }
    }
  }
}

TEST_CASE("frames_between splits windows additively") {
  for (double phase : {0.0, 0.3, 1.7}) {
    const auto whole = frames_in_window(2.0, phase, 3000.0);
    const auto a = frames_between(2.0, phase, 0.0, 1000.0);
    const auto b = frames_between(2.0, phase, 1000.0, 2000.0);
    const auto c = frames_between(2.0, phase, 2000.0, 3000.0);
    CHECK(a + b + c == whole);
    CHECK(b == 500);
  }
  CHECK(frames_between(2.0, 0.0, 5.0, 5.0) == 0);
}

TEST_CASE("population sampling follows the per-device draw order") {
  ScenarioParams p;
  p.devices_per_flow = 2000;
  p.malicious_probability = 0.3;
  Rng rng(5);
  const auto pop = sample_population(p, rng);
  REQUIRE(pop.devices.size() == 2000);
  std::size_t bad = 0, type1 = 0;
  for (const auto& d : pop.devices) {
    bad += d.malicious;
    type1 += d.type_index == 1;
    CHECK(d.phase_ms >= 0.0);
    CHECK(d.phase_ms < effective_period_ms(d, p));
  }
  // Loose binomial bounds (> 5 sd).
  CHECK(bad > 500);
  CHECK(bad < 700);
  CHECK(type1 > 400);
  CHECK(type1 < 600);

  // Same generator state, same population.
  Rng again(5);
  const auto twin = sample_population(p, again);
  for (std::size_t i = 0; i < pop.devices.size(); ++i) {
    CHECK(twin.devices[i].type_index == pop.devices[i].type_index);
    CHECK(twin.devices[i].phase_ms == pop.devices[i].phase_ms);
  }
}

TEST_CASE("flow measurement with divisible periods equals the rate model") {
  ScenarioParams p;
  p.devices_per_flow = 4;
  p.attack_frequency_ratio = 100.0;
  FlowPopulation pop;
  pop.devices = {{0, false, 12.5}, {1, true, 0.001}, {2, false, 1.9}, {3, true, 0.0}};
  const auto m = measure_flow(pop, p);
  // Expected: legitimate rates over 1 s; measured: malicious ones times f_m.
  CHECK(m.expected_bits == doctest::Approx(2400 + 800000 + 120000 + 24000));
  CHECK(m.measured_bits == doctest::Approx(2400 + 800000.0 * 100 + 120000 + 24000.0 * 100));

  p.sampling_period_s = 0.2;
  const auto short_window = measure_flow(pop, p);
  CHECK(short_window.expected_bits == doctest::Approx(0.2 * (2400 + 800000 + 120000 + 24000)));
}

TEST_CASE("effective period") {
  ScenarioParams p;
  p.attack_frequency_ratio = 4.0;
  CHECK(effective_period_ms({0, false, 0.0}, p) == 50.0);
  CHECK(effective_period_ms({0, true, 0.0}, p) == 12.5);
}
