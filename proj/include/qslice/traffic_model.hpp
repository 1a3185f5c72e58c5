#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qslice/catalog.hpp"
#include "qslice/rng.hpp"

namespace qslice {

/// Scenario of one aggregated flow: size, attacker prevalence and intensity,
/// detector threshold and sampling period.
struct ScenarioParams {
  std::size_t devices_per_flow = 100;
  double malicious_probability = 0.01;
  /// Malicious transmission frequency over the legitimate one (>= 1).
  double attack_frequency_ratio = 100.0;
  /// Flow is flagged when measured > threshold_ratio * expected.
  double threshold_ratio = 1.01;
  double sampling_period_s = 1.0;
  Catalog catalog = builtin_factory_catalog();

  /// Throws InvalidInput when a bound is violated.
  void validate() const;
};

struct Device {
  std::size_t type_index = 0;
  bool malicious = false;
  /// Offset of the first frame; 0 <= phase < effective period.
  double phase_ms = 0.0;
};

struct FlowPopulation {
  std::vector<Device> devices;
};

struct FlowMeasurement {
  double measured_bits = 0.0;
  double expected_bits = 0.0;
};

/// Draws type ~ p_t, malicious ~ Bernoulli(p_m), phase ~ U(0, effective period)
/// independently per device (in that order).
FlowPopulation sample_population(const ScenarioParams& params, Rng& rng);

/// Legitimate period, divided by the attack frequency ratio for malicious devices.
double effective_period_ms(const Device& device, const ScenarioParams& params);

/// Number of arrivals phase + k*period (k >= 0) inside [0, window).
/// Ratios window/period within 1e-9 of an integer are treated as exact.
std::uint64_t frames_in_window(double period_ms, double phase_ms, double window_ms);

/// Arrivals inside [start, end).
std::uint64_t frames_between(double period_ms, double phase_ms, double start_ms, double end_ms);

/// Bits sent over one sampling window versus the bits expected from the
/// devices' legitimate rates. Malicious devices count at their legitimate
/// rate on the expected side.
FlowMeasurement measure_flow(const FlowPopulation& population, const ScenarioParams& params);

}  // namespace qslice
