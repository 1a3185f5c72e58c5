#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qslice/detection.hpp"
#include "qslice/traffic_model.hpp"

namespace qslice {

struct ExperimentSpec {
  ScenarioParams params;
  std::uint64_t rounds = 100'000;
  std::uint64_t seed = 1;
  /// 0 picks std::thread::hardware_concurrency(). Results do not depend on it.
  unsigned workers = 0;
};

/// hits out of trials, with the binomial standard error.
struct Proportion {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;

  double value() const;
  double standard_error() const;
  bool defined() const { return trials > 0; }
};

struct ExperimentMetrics {
  std::uint64_t rounds = 0;
  /// Malicious devices that sat in a flagged flow, pooled over all rounds.
  Proportion malicious_quarantined;
  /// Per-round fraction of legitimate devices quarantined, averaged over
  /// rounds holding at least one legitimate device. Since a flagged flow
  /// quarantines every device, each round contributes 0 or 1.
  Proportion legit_quarantined;
  /// Legitimate devices in flagged flows over all legitimate devices.
  Proportion legit_quarantined_pooled;
  /// Same, restricted to legitimate devices sharing a flow with a malicious one.
  Proportion legit_quarantined_in_malicious_flows;
  Proportion flagged_flows;
  /// Flagged rounds among rounds with at least one malicious device.
  Proportion detect_given_malicious;
  std::vector<Proportion> malicious_quarantined_by_type;
};

struct RoundOutcome {
  FlowPopulation population;
  FlowMeasurement measurement;
  DetectionVerdict verdict;
};

/// One fresh population measured over a single window and classified.
RoundOutcome run_round(const ScenarioParams& params, Rng& rng);

/// Round r always draws from substream(seed, r); aggregation uses integer
/// counters only, so the result is bit-identical for any worker count.
ExperimentMetrics run_experiment(const ExperimentSpec& spec);

enum class SweepParameter { DevicesPerFlow, MaliciousProbability, AttackFrequencyRatio, ThresholdRatio, SamplingPeriod };

/// Accepts "n", "p_m", "f_m", "t_r", "s_p" (also "pm", "fm", "tr", "sp").
SweepParameter parse_sweep_parameter(std::string_view name);
std::string_view sweep_parameter_name(SweepParameter p);
ScenarioParams with_parameter(ScenarioParams params, SweepParameter p, double value);

enum class SeedPolicy {
  /// Every grid value reuses the base seed (common random numbers).
  Common,
  /// Grid value i uses a seed mixed from the base seed and i.
  Independent,
};

struct SweepRow {
  SweepParameter parameter;
  double value = 0.0;
  ScenarioParams params;
  ExperimentMetrics metrics;
};

std::vector<SweepRow> sweep(const ExperimentSpec& base, SweepParameter parameter, std::span<const double> grid,
                            SeedPolicy policy = SeedPolicy::Common);

/// CSV with a header row; one line per sweep row. Columns: parameter, value,
/// the scenario (n, p_m, f_m, t_r, s_p), rounds, then each metric followed by
/// its standard error, then per-type malicious recall.
void write_metrics_csv_header(std::ostream& out, std::size_t type_count);
void write_metrics_csv_row(std::ostream& out, const SweepRow& row);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

nlohmann::json metrics_to_json(const ExperimentMetrics& metrics);
nlohmann::json sweep_to_json(std::span<const SweepRow> rows);

}  // namespace qslice
