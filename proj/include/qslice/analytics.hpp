#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qslice/catalog.hpp"
#include "qslice/traffic_model.hpp"

namespace qslice {

/// Rate-based view of a scenario: every device emits exactly its long-run
/// average rate, so the sampling period plays no role.
struct AnalyticScenario {
  std::size_t devices_per_flow = 100;
  double malicious_probability = 0.01;
  double attack_frequency_ratio = 100.0;
  double threshold_ratio = 1.01;
  Catalog catalog = builtin_factory_catalog();

  static AnalyticScenario from(const ScenarioParams& params);
  /// Same bounds as ScenarioParams, plus threshold_ratio >= 1.
  void validate() const;
};

struct AnalyticOptions {
  /// Grid used to quantize non-integral rates (bit/s).
  double rate_resolution_bps = 1.0;
  /// Upper bound on dense distribution cells.
  std::size_t max_cells = 50'000'000;
};

/// Type rates expressed as integer multiples of a common unit.
struct ScaledRates {
  double unit_bps = 1.0;
  std::vector<std::int64_t> multiples;
  /// True when some rate had to be rounded to the resolution grid.
  bool quantized = false;
};

/// Greatest common divisor of the (positive-probability) integer rates, or
/// of their quantized forms when some rate is fractional.
ScaledRates scale_rates(const Catalog& catalog, double resolution_bps = 1.0);

/// Probability mass over integer multiples 0..max of `unit`.
class DiscreteDistribution {
 public:
  DiscreteDistribution(double unit, std::vector<double> mass);

  double unit() const { return unit_; }
  const std::vector<double>& mass() const { return mass_; }
  std::int64_t max_multiple() const { return static_cast<std::int64_t>(mass_.size()) - 1; }
  double at(std::int64_t multiple) const;
  double value_of(std::int64_t multiple) const { return unit_ * static_cast<double>(multiple); }
  double total() const;
  /// tail[j] = P(X > j) for j = 0..max_multiple().
  std::vector<double> upper_tail() const;
  /// cdf[j] = P(X <= j).
  std::vector<double> cdf() const;

 private:
  double unit_;
  std::vector<double> mass_;
};

/// 1 - (1 - p_m)^n.
double p_flow_contains_malicious(std::size_t devices_per_flow, double malicious_probability);

/// Law of the total legitimate rate sum_i n_i r(i) over the multinomial
/// composition of the flow (n-fold convolution of the per-device law).
DiscreteDistribution legit_rate_distribution(const AnalyticScenario& scenario, const AnalyticOptions& options = {});

/// Law of the malicious excess sum_i m_i r(i) (f_m - 1): each device adds
/// r(i)(f_m - 1) with probability p_m p_t(i), nothing otherwise. Unit is the
/// rate unit times (f_m - 1); f_m = 1 collapses to a point mass at 0.
DiscreteDistribution malicious_excess_distribution(const AnalyticScenario& scenario,
                                                   const AnalyticOptions& options = {});

/// General closed form for P(detected | flow holds malicious devices): sums
/// P(L = x) P(M > (t_r - 1) x) / P(B) over the legitimate-rate support, with
/// L and M drawn independently. nullopt when p_m = 0.
std::optional<double> p_detect_general(const AnalyticScenario& scenario, const AnalyticOptions& options = {});

/// p_detect_general for every n in `flow_sizes` (strictly increasing),
/// growing the convolutions one device at a time.
std::vector<std::optional<double>> p_detect_general_curve(const AnalyticScenario& scenario,
                                                          std::span<const std::size_t> flow_sizes,
                                                          const AnalyticOptions& options = {});

/// Throws AssumptionViolation unless every flow holding a malicious device of
/// a type other than 0 is certainly flagged.
void check_special_envelope(const AnalyticScenario& scenario, const AnalyticOptions& options = {});

/// Closed form for the special case in which only type-0 attackers can hide:
/// P(C)/P(B) + sum_i P(A | D(i)) P(D(i)) / P(B).
std::optional<double> p_detect_special(const AnalyticScenario& scenario, const AnalyticOptions& options = {});

/// Share of P(detected | B) owed to flows with a non-type-0 attacker, P(C)/P(B).
std::optional<double> contribution_nonzero_types(const AnalyticScenario& scenario,
                                                 const AnalyticOptions& options = {});

/// Exact P(detected | B) under the joint per-device model (each device draws
/// its type and its malicious flag; the malicious ones are part of the
/// legitimate-rate composition). Enumerates compositions; n <= 12.
std::optional<double> brute_force_p_detect(const AnalyticScenario& scenario, const AnalyticOptions& options = {});

inline constexpr std::size_t kBruteForceMaxDevices = 12;

}  // namespace qslice
