#include "qslice/traffic_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qslice/errors.hpp"

namespace qslice {

void ScenarioParams::validate() const {
  if (devices_per_flow < 1) throw InvalidInput("devices per flow must be >= 1");
  if (!(malicious_probability >= 0.0 && malicious_probability <= 1.0)) {
    throw InvalidInput("malicious probability must lie in [0, 1]");
  }
  if (!(attack_frequency_ratio >= 1.0) || !std::isfinite(attack_frequency_ratio)) {
    throw InvalidInput("attack frequency ratio must be >= 1");
  }
  if (!(threshold_ratio > 0.0) || !std::isfinite(threshold_ratio)) {
    throw InvalidInput("threshold ratio must be > 0");
  }
  if (!(sampling_period_s > 0.0) || !std::isfinite(sampling_period_s)) {
    throw InvalidInput("sampling period must be > 0");
  }
}

FlowPopulation sample_population(const ScenarioParams& params, Rng& rng) {
  const auto& probs = params.catalog.type_probabilities();
  std::discrete_distribution<std::size_t> pick_type(probs.begin(), probs.end());
  std::bernoulli_distribution pick_malicious(params.malicious_probability);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  FlowPopulation pop;
  pop.devices.reserve(params.devices_per_flow);
  for (std::size_t i = 0; i < params.devices_per_flow; ++i) {
    Device d;
    d.type_index = pick_type(rng);
    d.malicious = pick_malicious(rng);
    d.phase_ms = unit(rng) * effective_period_ms(d, params);
    pop.devices.push_back(d);
  }
  return pop;
}

double effective_period_ms(const Device& device, const ScenarioParams& params) {
  const double period = params.catalog.type(device.type_index).transmission_period_ms;
  return device.malicious ? period / params.attack_frequency_ratio : period;
}

namespace {

// Returns the nearest integer when x is within 1e-9 (relative) of it.
bool snap_to_integer(double x, double& out) {
  const double r = std::nearbyint(x);
  if (std::fabs(x - r) <= 1e-9 * std::max(1.0, std::fabs(x))) {
    out = r;
    return true;
  }
  return false;
}

}  // namespace

std::uint64_t frames_in_window(double period_ms, double phase_ms, double window_ms) {
  if (phase_ms >= window_ms || window_ms <= 0.0) return 0;
  double whole = 0.0;
  if (snap_to_integer(window_ms / period_ms, whole)) {
    // window = m * period: ceil(m - phase/period) = m - floor(phase/period).
    double skipped = 0.0;
    const double offset = phase_ms / period_ms;
    if (!snap_to_integer(offset, skipped)) skipped = std::floor(offset);
    return static_cast<std::uint64_t>(whole - skipped);
  }
  double count = 0.0;
  const double q = (window_ms - phase_ms) / period_ms;
  if (!snap_to_integer(q, count)) count = std::ceil(q);
  return count > 0.0 ? static_cast<std::uint64_t>(count) : 0;
}

std::uint64_t frames_between(double period_ms, double phase_ms, double start_ms, double end_ms) {
  if (end_ms <= start_ms) return 0;
  const auto upto_end = frames_in_window(period_ms, phase_ms, end_ms);
  const auto upto_start = start_ms > 0.0 ? frames_in_window(period_ms, phase_ms, start_ms) : 0;
  return upto_end - upto_start;
}

FlowMeasurement measure_flow(const FlowPopulation& population, const ScenarioParams& params) {
  const double window_ms = params.sampling_period_s * 1000.0;
  FlowMeasurement m;
  for (const auto& d : population.devices) {
    const auto& spec = params.catalog.type(d.type_index);
    const double frame_bits = static_cast<double>(spec.frame_size_bytes) * 8.0;
    m.measured_bits +=
        static_cast<double>(frames_in_window(effective_period_ms(d, params), d.phase_ms, window_ms)) * frame_bits;
    m.expected_bits += frame_bits * window_ms / spec.transmission_period_ms;
  }
  return m;
}

}  // namespace qslice
