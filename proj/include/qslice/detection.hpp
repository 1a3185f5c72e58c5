#pragma once

#include <cstddef>

#include "qslice/rational.hpp"
#include "qslice/traffic_model.hpp"

namespace qslice {

struct DetectionVerdict {
  bool flagged = false;
  double measured_rate_bps = 0.0;
  double expected_rate_bps = 0.0;
  double ratio = 0.0;
};

/// Strict threshold test `measured > ratio * expected`. Integral operands are
/// compared exactly against the decimal form of the ratio, so a flow sitting
/// exactly on the threshold is never flagged.
class FlowThreshold {
 public:
  explicit FlowThreshold(double threshold_ratio);

  bool exceeded(double measured_bits, double expected_bits) const;
  double value() const { return value_; }
  Rational exact() const { return exact_; }

 private:
  double value_;
  Rational exact_;
};

/// Single-window verdict. Throws InvalidInput when expected_bits <= 0.
DetectionVerdict classify_flow(double measured_bits, double expected_bits, const ScenarioParams& params);

/// Threshold ratio above which a lone malicious device of type `type_index`
/// stops being noticed in a flow of average composition:
///   1 + r(x) (f_m - 1) / (n * sum_i r(i) p_t(i))
double threshold_detection_limit(std::size_t type_index, const ScenarioParams& params);

}  // namespace qslice
