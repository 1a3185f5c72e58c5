#include "qslice/detection.hpp"

#include <cmath>

#include "qslice/errors.hpp"

namespace qslice {

namespace {

constexpr double kExactLimit = 9.0e15;

bool integral(double x) { return std::floor(x) == x && std::fabs(x) < kExactLimit; }

}  // namespace

FlowThreshold::FlowThreshold(double threshold_ratio)
    : value_(threshold_ratio), exact_(Rational::from_double(threshold_ratio)) {}

bool FlowThreshold::exceeded(double measured_bits, double expected_bits) const {
  if (integral(measured_bits) && integral(expected_bits) && exact_.to_double() == value_) {
    return exact_greater(static_cast<std::int64_t>(measured_bits), Rational{1, 1},
                         static_cast<std::int64_t>(expected_bits), exact_);
  }
  return static_cast<long double>(measured_bits) >
         static_cast<long double>(value_) * static_cast<long double>(expected_bits);
}

DetectionVerdict classify_flow(double measured_bits, double expected_bits, const ScenarioParams& params) {
  if (!(expected_bits > 0.0)) throw InvalidInput("expected traffic must be positive");
  const FlowThreshold threshold(params.threshold_ratio);
  DetectionVerdict v;
  v.flagged = threshold.exceeded(measured_bits, expected_bits);
  v.measured_rate_bps = measured_bits / params.sampling_period_s;
  v.expected_rate_bps = expected_bits / params.sampling_period_s;
  v.ratio = measured_bits / expected_bits;
  return v;
}

double threshold_detection_limit(std::size_t type_index, const ScenarioParams& params) {
  if (type_index >= params.catalog.size()) throw InvalidInput("device type index out of range");
  if (params.devices_per_flow < 1) throw InvalidInput("devices per flow must be >= 1");
  const double excess = params.catalog.rate(type_index) * (params.attack_frequency_ratio - 1.0);
  return 1.0 + excess / (mean_rate(params.catalog) * static_cast<double>(params.devices_per_flow));
}

}  // namespace qslice
