#include "qslice/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

#include "qslice/errors.hpp"

namespace qslice {

double Proportion::value() const {
  return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials);
}

double Proportion::standard_error() const {
  if (trials == 0) return 0.0;
  const double p = value();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

RoundOutcome run_round(const ScenarioParams& params, Rng& rng) {
  RoundOutcome out;
  out.population = sample_population(params, rng);
  out.measurement = measure_flow(out.population, params);
  out.verdict = classify_flow(out.measurement.measured_bits, out.measurement.expected_bits, params);
  return out;
}

namespace {

struct Counters {
  std::uint64_t rounds = 0;
  std::uint64_t flagged = 0;
  std::uint64_t malicious = 0, malicious_hit = 0;
  std::uint64_t legit = 0, legit_hit = 0;
  std::uint64_t legit_rounds = 0, legit_rounds_hit = 0;
  std::uint64_t legit_shared = 0, legit_shared_hit = 0;
  std::uint64_t malicious_rounds = 0, malicious_rounds_hit = 0;
  std::vector<std::uint64_t> by_type, by_type_hit;

  explicit Counters(std::size_t types) : by_type(types, 0), by_type_hit(types, 0) {}

  void merge(const Counters& o) {
    rounds += o.rounds;
    flagged += o.flagged;
    malicious += o.malicious;
    malicious_hit += o.malicious_hit;
    legit += o.legit;
    legit_hit += o.legit_hit;
    legit_rounds += o.legit_rounds;
    legit_rounds_hit += o.legit_rounds_hit;
    legit_shared += o.legit_shared;
    legit_shared_hit += o.legit_shared_hit;
    malicious_rounds += o.malicious_rounds;
    malicious_rounds_hit += o.malicious_rounds_hit;
    for (std::size_t i = 0; i < by_type.size(); ++i) {
      by_type[i] += o.by_type[i];
      by_type_hit[i] += o.by_type_hit[i];
    }
  }
};

// Per-type constants hoisted out of the round loop.
struct TypeTable {
  std::vector<double> legit_period, attack_period, frame_bits, expected_bits;
};

TypeTable make_table(const ScenarioParams& p) {
  TypeTable t;
  const double window_ms = p.sampling_period_s * 1000.0;
  for (const auto& spec : p.catalog.types()) {
    const double bits = static_cast<double>(spec.frame_size_bytes) * 8.0;
    t.legit_period.push_back(spec.transmission_period_ms);
    t.attack_period.push_back(spec.transmission_period_ms / p.attack_frequency_ratio);
    t.frame_bits.push_back(bits);
    t.expected_bits.push_back(bits * window_ms / spec.transmission_period_ms);
  }
  return t;
}

void simulate_range(const ScenarioParams& p, const TypeTable& table, std::uint64_t seed, std::uint64_t first,
                    std::uint64_t last, Counters& c) {
  const auto& probs = p.catalog.type_probabilities();
  std::discrete_distribution<std::size_t> pick_type(probs.begin(), probs.end());
  std::bernoulli_distribution pick_malicious(p.malicious_probability);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const FlowThreshold threshold(p.threshold_ratio);
  const double window_ms = p.sampling_period_s * 1000.0;
  const std::size_t n = p.devices_per_flow;
  std::vector<std::uint64_t> round_types(table.frame_bits.size());

  for (std::uint64_t r = first; r < last; ++r) {
    Rng rng = substream(seed, r);
    double measured = 0.0, expected = 0.0;
    std::uint64_t bad = 0;
    std::fill(round_types.begin(), round_types.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t type = pick_type(rng);
      const bool malicious = pick_malicious(rng);
      const double period = malicious ? table.attack_period[type] : table.legit_period[type];
      const double phase = unit(rng) * period;
      measured += static_cast<double>(frames_in_window(period, phase, window_ms)) * table.frame_bits[type];
      expected += table.expected_bits[type];
      if (malicious) {
        ++bad;
        ++round_types[type];
      }
    }
    const bool flagged = threshold.exceeded(measured, expected);
    const std::uint64_t good = n - bad;
    ++c.rounds;
    c.malicious += bad;
    c.legit += good;
    for (std::size_t t = 0; t < round_types.size(); ++t) c.by_type[t] += round_types[t];
    if (good > 0) ++c.legit_rounds;
    if (bad > 0) {
      ++c.malicious_rounds;
      c.legit_shared += good;
    }
    if (flagged) {
      ++c.flagged;
      c.malicious_hit += bad;
      c.legit_hit += good;
      if (good > 0) ++c.legit_rounds_hit;
      if (bad > 0) {
        ++c.malicious_rounds_hit;
        c.legit_shared_hit += good;
      }
      for (std::size_t t = 0; t < round_types.size(); ++t) c.by_type_hit[t] += round_types[t];
    }
  }
}

ExperimentMetrics to_metrics(const Counters& c) {
  ExperimentMetrics m;
  m.rounds = c.rounds;
  m.malicious_quarantined = {c.malicious_hit, c.malicious};
  m.legit_quarantined = {c.legit_rounds_hit, c.legit_rounds};
  m.legit_quarantined_pooled = {c.legit_hit, c.legit};
  m.legit_quarantined_in_malicious_flows = {c.legit_shared_hit, c.legit_shared};
  m.flagged_flows = {c.flagged, c.rounds};
  m.detect_given_malicious = {c.malicious_rounds_hit, c.malicious_rounds};
  for (std::size_t t = 0; t < c.by_type.size(); ++t) {
    m.malicious_quarantined_by_type.push_back({c.by_type_hit[t], c.by_type[t]});
  }
  return m;
}

}  // namespace

ExperimentMetrics run_experiment(const ExperimentSpec& spec) {
  spec.params.validate();
  if (spec.rounds < 1) throw InvalidInput("experiment needs at least one round");
  const TypeTable table = make_table(spec.params);
  const std::size_t types = spec.params.catalog.size();

  unsigned workers = spec.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.workers;
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (spec.rounds + kBlock - 1) / kBlock;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));

  std::vector<Counters> partial(workers, Counters(types));
  std::atomic<std::uint64_t> next_block{0};
  auto work = [&](unsigned w) {
    for (std::uint64_t b = next_block++; b < blocks; b = next_block++) {
      const std::uint64_t first = b * kBlock;
      simulate_range(spec.params, table, spec.seed, first, std::min(spec.rounds, first + kBlock), partial[w]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  Counters total(types);
  for (const auto& c : partial) total.merge(c);
  return to_metrics(total);
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "n") return SweepParameter::DevicesPerFlow;
  if (name == "p_m" || name == "pm") return SweepParameter::MaliciousProbability;
  if (name == "f_m" || name == "fm") return SweepParameter::AttackFrequencyRatio;
  if (name == "t_r" || name == "tr") return SweepParameter::ThresholdRatio;
  if (name == "s_p" || name == "sp") return SweepParameter::SamplingPeriod;
  throw InvalidInput("unknown sweep parameter '" + std::string(name) + "' (expected n, p_m, f_m, t_r or s_p)");
}

std::string_view sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::DevicesPerFlow: return "n";
    case SweepParameter::MaliciousProbability: return "p_m";
    case SweepParameter::AttackFrequencyRatio: return "f_m";
    case SweepParameter::ThresholdRatio: return "t_r";
    case SweepParameter::SamplingPeriod: return "s_p";
  }
  return "?";
}

ScenarioParams with_parameter(ScenarioParams params, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::DevicesPerFlow:
      if (!(value >= 1.0) || value != std::floor(value)) throw InvalidInput("n must be a positive integer");
      params.devices_per_flow = static_cast<std::size_t>(value);
      break;
    case SweepParameter::MaliciousProbability: params.malicious_probability = value; break;
    case SweepParameter::AttackFrequencyRatio: params.attack_frequency_ratio = value; break;
    case SweepParameter::ThresholdRatio: params.threshold_ratio = value; break;
    case SweepParameter::SamplingPeriod: params.sampling_period_s = value; break;
  }
  params.validate();
  return params;
}

std::vector<SweepRow> sweep(const ExperimentSpec& base, SweepParameter parameter, std::span<const double> grid,
                            SeedPolicy policy) {
  if (grid.empty()) throw InvalidInput("sweep grid is empty");
  // Validate the whole grid before spending any time simulating.
  std::vector<ScenarioParams> scenarios;
  for (double v : grid) scenarios.push_back(with_parameter(base.params, parameter, v));

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ExperimentSpec spec = base;
    spec.params = scenarios[i];
    if (policy == SeedPolicy::Independent) spec.seed = SplitMix64::mix(base.seed ^ SplitMix64::mix(i + 1));
    rows.push_back({parameter, grid[i], scenarios[i], run_experiment(spec)});
  }
  return rows;
}

namespace {

void put(std::ostream& out, const Proportion& p) {
  out << ',' << p.value() << ',' << p.standard_error();
}

}  // namespace

void write_metrics_csv_header(std::ostream& out, std::size_t type_count) {
  out << "parameter,value,n,p_m,f_m,t_r,s_p,rounds,"
         "malicious_quarantined_ratio,malicious_quarantined_se,"
         "legit_quarantined_ratio,legit_quarantined_se,"
         "legit_quarantined_pooled_ratio,legit_quarantined_pooled_se,"
         "legit_in_malicious_flows_ratio,legit_in_malicious_flows_se,"
         "flagged_flow_ratio,flagged_flow_se,"
         "detect_given_malicious,detect_given_malicious_se";
  for (std::size_t t = 0; t < type_count; ++t) out << ",malicious_quarantined_type" << t << ",malicious_quarantined_type" << t << "_se";
  out << '\n';
}

void write_metrics_csv_row(std::ostream& out, const SweepRow& row) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  const auto& p = row.params;
  const auto& m = row.metrics;
  out << sweep_parameter_name(row.parameter) << ',' << row.value << ',' << p.devices_per_flow << ','
      << p.malicious_probability << ',' << p.attack_frequency_ratio << ',' << p.threshold_ratio << ','
      << p.sampling_period_s << ',' << m.rounds;
  put(out, m.malicious_quarantined);
  put(out, m.legit_quarantined);
  put(out, m.legit_quarantined_pooled);
  put(out, m.legit_quarantined_in_malicious_flows);
  put(out, m.flagged_flows);
  put(out, m.detect_given_malicious);
  for (const auto& t : m.malicious_quarantined_by_type) put(out, t);
  out << '\n';
  out.flags(flags);
  out.precision(precision);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  write_metrics_csv_header(out, rows.empty() ? 0 : rows.front().params.catalog.size());
  for (const auto& r : rows) write_metrics_csv_row(out, r);
}

namespace {

nlohmann::json proportion_json(const Proportion& p) {
  nlohmann::json j{{"hits", p.hits}, {"trials", p.trials}, {"standard_error", p.standard_error()}};
  if (p.defined()) {
    j["ratio"] = p.value();
  } else {
    j["ratio"] = nullptr;
  }
  return j;
}

}  // namespace

nlohmann::json metrics_to_json(const ExperimentMetrics& m) {
  nlohmann::json by_type = nlohmann::json::array();
  for (const auto& t : m.malicious_quarantined_by_type) by_type.push_back(proportion_json(t));
  return {{"rounds", m.rounds},
          {"malicious_quarantined", proportion_json(m.malicious_quarantined)},
          {"legit_quarantined", proportion_json(m.legit_quarantined)},
          {"legit_quarantined_pooled", proportion_json(m.legit_quarantined_pooled)},
          {"legit_in_malicious_flows", proportion_json(m.legit_quarantined_in_malicious_flows)},
          {"flagged_flows", proportion_json(m.flagged_flows)},
          {"detect_given_malicious", proportion_json(m.detect_given_malicious)},
          {"malicious_quarantined_by_type", by_type}};
}

nlohmann::json sweep_to_json(std::span<const SweepRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"parameter", sweep_parameter_name(r.parameter)},
                   {"value", r.value},
                   {"n", r.params.devices_per_flow},
                   {"p_m", r.params.malicious_probability},
                   {"f_m", r.params.attack_frequency_ratio},
                   {"t_r", r.params.threshold_ratio},
                   {"s_p", r.params.sampling_period_s},
                   {"metrics", metrics_to_json(r.metrics)}});
  }
  return arr;
}

}  // namespace qslice
