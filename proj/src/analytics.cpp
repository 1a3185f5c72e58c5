#include "qslice/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "qslice/errors.hpp"
#include "qslice/rational.hpp"

namespace qslice {

AnalyticScenario AnalyticScenario::from(const ScenarioParams& p) {
  return {p.devices_per_flow, p.malicious_probability, p.attack_frequency_ratio, p.threshold_ratio, p.catalog};
}

void AnalyticScenario::validate() const {
  ScenarioParams p;
  p.devices_per_flow = devices_per_flow;
  p.malicious_probability = malicious_probability;
  p.attack_frequency_ratio = attack_frequency_ratio;
  p.threshold_ratio = threshold_ratio;
  p.catalog = catalog;
  p.validate();
  if (threshold_ratio < 1.0) throw InvalidInput("closed forms assume threshold ratio >= 1");
}

ScaledRates scale_rates(const Catalog& catalog, double resolution_bps) {
  if (!(resolution_bps > 0.0)) throw InvalidInput("rate resolution must be positive");
  const std::size_t k = catalog.size();
  std::vector<double> rates(k);
  bool all_integral = true;
  for (std::size_t i = 0; i < k; ++i) {
    rates[i] = catalog.rate(i);
    if (std::fabs(rates[i] - std::nearbyint(rates[i])) > 1e-9 * std::max(1.0, rates[i])) all_integral = false;
  }
  ScaledRates out;
  const double base = all_integral ? 1.0 : resolution_bps;
  std::vector<std::int64_t> raw(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double scaled = rates[i] / base;
    raw[i] = std::llround(scaled);
    if (std::fabs(scaled - static_cast<double>(raw[i])) > 1e-9 * std::max(1.0, scaled)) out.quantized = true;
    if (raw[i] <= 0) throw InvalidInput("rate of type '" + catalog.type(i).name + "' rounds to zero");
  }
  std::int64_t g = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (catalog.probability(i) > 0.0) g = std::gcd(g, raw[i]);
  }
  if (g == 0) g = 1;
  out.unit_bps = base * static_cast<double>(g);
  out.multiples.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.multiples[i] = raw[i] / g;
  return out;
}

DiscreteDistribution::DiscreteDistribution(double unit, std::vector<double> mass)
    : unit_(unit), mass_(std::move(mass)) {
  if (mass_.empty()) throw InvalidInput("distribution needs at least one cell");
}

double DiscreteDistribution::at(std::int64_t multiple) const {
  if (multiple < 0 || multiple > max_multiple()) return 0.0;
  return mass_[static_cast<std::size_t>(multiple)];
}

double DiscreteDistribution::total() const {
  return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

std::vector<double> DiscreteDistribution::upper_tail() const {
  std::vector<double> tail(mass_.size(), 0.0);
  double acc = 0.0;
  for (std::size_t j = mass_.size(); j-- > 0;) {
    tail[j] = acc;
    acc += mass_[j];
  }
  return tail;
}

std::vector<double> DiscreteDistribution::cdf() const {
  std::vector<double> out(mass_.size());
  std::partial_sum(mass_.begin(), mass_.end(), out.begin());
  return out;
}

double p_flow_contains_malicious(std::size_t devices_per_flow, double malicious_probability) {
  if (malicious_probability <= 0.0) return 0.0;
  if (malicious_probability >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(devices_per_flow) * std::log1p(-malicious_probability));
}

namespace {

using Kernel = std::vector<std::pair<std::int64_t, double>>;

// Dense law of a sum of i.i.d. per-device contributions, grown one device
// at a time.
class ConvolutionLadder {
 public:
  ConvolutionLadder(Kernel kernel, std::size_t max_cells) : kernel_(std::move(kernel)), max_cells_(max_cells) {
    for (const auto& [m, _] : kernel_) step_ = std::max(step_, m);
  }

  void grow_to(std::size_t devices) {
    while (devices_ < devices) step();
  }

  std::size_t devices() const { return devices_; }
  const std::vector<double>& mass() const { return mass_; }

 private:
  void step() {
    const std::size_t next_size = mass_.size() + static_cast<std::size_t>(step_);
    if (next_size > max_cells_) {
      throw CapacityError("distribution support of " + std::to_string(next_size) + " cells exceeds the bound of " +
                          std::to_string(max_cells_));
    }
    std::vector<double> next(next_size, 0.0);
    for (const auto& [shift, p] : kernel_) {
      const auto off = static_cast<std::size_t>(shift);
      for (std::size_t j = 0; j < mass_.size(); ++j) next[j + off] += p * mass_[j];
    }
    mass_ = std::move(next);
    ++devices_;
  }

  Kernel kernel_;
  std::size_t max_cells_;
  std::int64_t step_ = 0;
  std::size_t devices_ = 0;
  std::vector<double> mass_{1.0};
};

Kernel legit_kernel(const Catalog& catalog, const ScaledRates& rates) {
  Kernel k;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (catalog.probability(i) > 0.0) k.emplace_back(rates.multiples[i], catalog.probability(i));
  }
  return k;
}

bool no_excess(const AnalyticScenario& s) { return s.attack_frequency_ratio == 1.0; }

Kernel malicious_kernel(const AnalyticScenario& s, const ScaledRates& rates) {
  if (no_excess(s)) return {{0, 1.0}};
  Kernel k{{0, 1.0 - s.malicious_probability}};
  if (s.malicious_probability > 0.0) {
    for (std::size_t i = 0; i < s.catalog.size(); ++i) {
      const double p = s.malicious_probability * s.catalog.probability(i);
      if (p > 0.0) k.emplace_back(rates.multiples[i], p);
    }
  }
  return k;
}

// Detection rule on scaled integers: excess * (f_m - 1) > (t_r - 1) * load.
struct ExactRule {
  Rational attack;     // f_m - 1
  Rational threshold;  // t_r - 1

  explicit ExactRule(const AnalyticScenario& s)
      : attack(Rational::from_double(s.attack_frequency_ratio).minus_one()),
        threshold(Rational::from_double(s.threshold_ratio).minus_one()) {}

  bool detected(std::int64_t excess_multiple, std::int64_t load_multiple) const {
    return exact_greater(excess_multiple, attack, load_multiple, threshold);
  }

  // Largest load with `detected(excess, load)`; -1 when none. Only meaningful
  // for threshold.num > 0.
  std::int64_t max_hidden_load(std::int64_t excess_multiple) const {
    using Wide = __int128;
    const Wide lhs = static_cast<Wide>(excess_multiple) * attack.num * threshold.den;
    const Wide d = static_cast<Wide>(threshold.num) * attack.den;
    if (lhs <= 0) return -1;
    return static_cast<std::int64_t>((lhs - 1) / d);
  }
};

double general_from(const std::vector<double>& load, const std::vector<double>& excess, const ExactRule& rule,
                    double p_b) {
  if (rule.attack.num == 0) return 0.0;  // no excess can ever exceed a threshold >= 1
  DiscreteDistribution excess_law(1.0, excess);
  const auto tail = excess_law.upper_tail();
  const auto max_excess = excess_law.max_multiple();
  double sum = 0.0;
  for (std::size_t l = 0; l < load.size(); ++l) {
    if (load[l] == 0.0) continue;
    const std::int64_t q = exact_floor_ratio(static_cast<std::int64_t>(l), rule.threshold, rule.attack);
    double p_exceed = 0.0;
    if (q < 0) {
      p_exceed = 1.0;
    } else if (q < max_excess) {
      p_exceed = tail[static_cast<std::size_t>(q)];
    }
    sum += load[l] * p_exceed;
  }
  return sum / p_b;
}

}  // namespace

DiscreteDistribution legit_rate_distribution(const AnalyticScenario& scenario, const AnalyticOptions& options) {
  scenario.validate();
  const auto rates = scale_rates(scenario.catalog, options.rate_resolution_bps);
  ConvolutionLadder ladder(legit_kernel(scenario.catalog, rates), options.max_cells);
  ladder.grow_to(scenario.devices_per_flow);
  return {rates.unit_bps, ladder.mass()};
}

DiscreteDistribution malicious_excess_distribution(const AnalyticScenario& scenario, const AnalyticOptions& options) {
  scenario.validate();
  const auto rates = scale_rates(scenario.catalog, options.rate_resolution_bps);
  if (no_excess(scenario) || scenario.malicious_probability == 0.0) return {0.0, {1.0}};
  ConvolutionLadder ladder(malicious_kernel(scenario, rates), options.max_cells);
  ladder.grow_to(scenario.devices_per_flow);
  return {rates.unit_bps * (scenario.attack_frequency_ratio - 1.0), ladder.mass()};
}

std::optional<double> p_detect_general(const AnalyticScenario& scenario, const AnalyticOptions& options) {
  const std::size_t n[] = {scenario.devices_per_flow};
  return p_detect_general_curve(scenario, n, options).front();
}

std::vector<std::optional<double>> p_detect_general_curve(const AnalyticScenario& scenario,
                                                          std::span<const std::size_t> flow_sizes,
                                                          const AnalyticOptions& options) {
  scenario.validate();
  for (std::size_t i = 0; i < flow_sizes.size(); ++i) {
    if (flow_sizes[i] < 1 || (i > 0 && flow_sizes[i] <= flow_sizes[i - 1])) {
      throw InvalidInput("flow sizes must be positive and strictly increasing");
    }
  }
  const auto rates = scale_rates(scenario.catalog, options.rate_resolution_bps);
  const ExactRule rule(scenario);
  ConvolutionLadder load(legit_kernel(scenario.catalog, rates), options.max_cells);
  ConvolutionLadder excess(malicious_kernel(scenario, rates), options.max_cells);

  std::vector<std::optional<double>> out;
  for (std::size_t n : flow_sizes) {
    const double p_b = p_flow_contains_malicious(n, scenario.malicious_probability);
    if (p_b == 0.0) {
      out.emplace_back(std::nullopt);
      continue;
    }
    load.grow_to(n);
    if (rule.attack.num != 0) excess.grow_to(n);
    out.emplace_back(general_from(load.mass(), excess.mass(), rule, p_b));
  }
  return out;
}

namespace {

bool is_listed_configuration(const AnalyticScenario& s) {
  static const double kRates[] = {2400.0, 800000.0, 120000.0, 24000.0};
  if (s.malicious_probability != 0.01 || s.attack_frequency_ratio != 100.0 || s.threshold_ratio != 1.01) return false;
  if (s.catalog.size() != 4 || s.devices_per_flow >= 500) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (s.catalog.probability(i) != 0.25) return false;
    if (std::fabs(s.catalog.rate(i) - kRates[i]) > 1e-9 * kRates[i]) return false;
  }
  return true;
}

}  // namespace

void check_special_envelope(const AnalyticScenario& scenario, const AnalyticOptions& options) {
  scenario.validate();
  if (is_listed_configuration(scenario)) return;
  const auto rates = scale_rates(scenario.catalog, options.rate_resolution_bps);
  const ExactRule rule(scenario);
  std::int64_t heaviest = 0;
  for (std::size_t i = 0; i < scenario.catalog.size(); ++i) {
    if (scenario.catalog.probability(i) > 0.0) heaviest = std::max(heaviest, rates.multiples[i]);
  }
  const auto worst_load = heaviest * static_cast<std::int64_t>(scenario.devices_per_flow);
  for (std::size_t i = 1; i < scenario.catalog.size(); ++i) {
    if (scenario.catalog.probability(i) == 0.0) continue;
    if (!rule.detected(rates.multiples[i], worst_load)) {
      throw AssumptionViolation("special-case formula needs every lone attacker of type " + std::to_string(i) +
                                " to be flagged in any flow composition; it can hide under a load of " +
                                std::to_string(worst_load * rates.unit_bps) + " bit/s");
    }
  }
}

std::optional<double> contribution_nonzero_types(const AnalyticScenario& scenario, const AnalyticOptions& options) {
  check_special_envelope(scenario, options);
  const std::size_t n = scenario.devices_per_flow;
  const double p_b = p_flow_contains_malicious(n, scenario.malicious_probability);
  if (p_b == 0.0) return std::nullopt;
  double nonzero = 0.0;
  for (std::size_t k = 1; k < scenario.catalog.size(); ++k) nonzero += scenario.catalog.probability(k);
  return p_flow_contains_malicious(n, scenario.malicious_probability * nonzero) / p_b;
}

std::optional<double> p_detect_special(const AnalyticScenario& scenario, const AnalyticOptions& options) {
  const auto share = contribution_nonzero_types(scenario, options);
  if (!share) return std::nullopt;
  const std::size_t n = scenario.devices_per_flow;
  const double p_b = p_flow_contains_malicious(n, scenario.malicious_probability);
  const double type0_attack = scenario.malicious_probability * scenario.catalog.probability(0);
  if (type0_attack == 0.0) return share;

  const auto rates = scale_rates(scenario.catalog, options.rate_resolution_bps);
  const ExactRule rule(scenario);
  const auto load = legit_rate_distribution(scenario, options);
  const auto load_cdf = load.cdf();
  const auto max_load = load.max_multiple();

  // P(D(i)) = C(n, i) a^i b^(n-i), a = p_m p_t(0), b = 1 - p_m; built by a
  // log-space recurrence in i.
  const double log_a = std::log(type0_attack);
  const double log_b = std::log1p(-scenario.malicious_probability);
  double log_term = static_cast<double>(n) * log_b;
  double hidden_sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    log_term += std::log(static_cast<double>(n - i + 1) / static_cast<double>(i)) + log_a - log_b;
    const double p_d = std::exp(log_term);
    const std::int64_t excess = static_cast<std::int64_t>(i) * rates.multiples[0];
    double p_flagged = 0.0;
    if (rule.threshold.num == 0) {
      p_flagged = 1.0;
    } else {
      const std::int64_t hidden = rule.max_hidden_load(excess);
      if (hidden >= 0) p_flagged = load_cdf[static_cast<std::size_t>(std::min(hidden, max_load))];
    }
    hidden_sum += p_flagged * p_d;
  }
  return *share + hidden_sum / p_b;
}

namespace {

struct JointEnumeration {
  std::vector<double> prob;
  std::vector<std::int64_t> load;
  std::vector<std::int64_t> excess;
  const ExactRule* rule = nullptr;
  double detected = 0.0;

  void visit(std::size_t state, int remaining, double weight, std::int64_t load_sum, std::int64_t excess_sum) {
    if (state + 1 == prob.size()) {
      // Last state takes the remaining devices.
      const double w = weight * std::pow(prob[state], remaining);
      const std::int64_t l = load_sum + remaining * load[state];
      const std::int64_t e = excess_sum + remaining * excess[state];
      if (e > 0 && rule->detected(e, l)) detected += w;
      return;
    }
    double binom = 1.0;
    double p_pow = 1.0;
    for (int c = 0; c <= remaining; ++c) {
      if (c > 0) {
        binom = binom * static_cast<double>(remaining - c + 1) / static_cast<double>(c);
        p_pow *= prob[state];
      }
      visit(state + 1, remaining - c, weight * binom * p_pow, load_sum + c * load[state],
            excess_sum + c * excess[state]);
    }
  }
};

}  // namespace

std::optional<double> brute_force_p_detect(const AnalyticScenario& scenario, const AnalyticOptions& options) {
  scenario.validate();
  const std::size_t n = scenario.devices_per_flow;
  if (n > kBruteForceMaxDevices) {
    throw CapacityError("brute force enumeration supports at most " + std::to_string(kBruteForceMaxDevices) +
                        " devices per flow");
  }
  const double p_b = p_flow_contains_malicious(n, scenario.malicious_probability);
  if (p_b == 0.0) return std::nullopt;
  const auto rates = scale_rates(scenario.catalog, options.rate_resolution_bps);
  const ExactRule rule(scenario);

  JointEnumeration e;
  e.rule = &rule;
  const double pm = scenario.malicious_probability;
  for (std::size_t i = 0; i < scenario.catalog.size(); ++i) {
    const double pt = scenario.catalog.probability(i);
    if (pt == 0.0) continue;
    if (pm < 1.0) {
      e.prob.push_back((1.0 - pm) * pt);
      e.load.push_back(rates.multiples[i]);
      e.excess.push_back(0);
    }
    if (pm > 0.0) {
      e.prob.push_back(pm * pt);
      e.load.push_back(rates.multiples[i]);
      e.excess.push_back(rates.multiples[i]);
    }
  }
  e.visit(0, static_cast<int>(n), 1.0, 0, 0);
  return e.detected / p_b;
}

}  // namespace qslice
