#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qslice/errors.hpp"
#include "qslice/montecarlo.hpp"

using namespace qslice;

namespace {

bool same(const Proportion& a, const Proportion& b) { return a.hits == b.hits && a.trials == b.trials; }

bool same(const ExperimentMetrics& a, const ExperimentMetrics& b) {
  if (a.malicious_quarantined_by_type.size() != b.malicious_quarantined_by_type.size()) return false;
  for (std::size_t i = 0; i < a.malicious_quarantined_by_type.size(); ++i) {
    if (!same(a.malicious_quarantined_by_type[i], b.malicious_quarantined_by_type[i])) return false;
  }
  return a.rounds == b.rounds && same(a.malicious_quarantined, b.malicious_quarantined) &&
         same(a.legit_quarantined, b.legit_quarantined) && same(a.legit_quarantined_pooled, b.legit_quarantined_pooled) &&
         same(a.legit_quarantined_in_malicious_flows, b.legit_quarantined_in_malicious_flows) &&
         same(a.flagged_flows, b.flagged_flows) && same(a.detect_given_malicious, b.detect_given_malicious);
}

}  // namespace

TEST_CASE("proportion standard error") {
  const Proportion p{25, 100};
  CHECK(p.value() == 0.25);
  CHECK(p.standard_error() == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
  const Proportion empty{};
  CHECK_FALSE(empty.defined());
  CHECK(empty.value() == 0.0);
}

TEST_CASE("aggregation equals a hand count over run_round") {
  ExperimentSpec spec;
  spec.params.devices_per_flow = 20;
  spec.params.malicious_probability = 0.1;
  spec.params.attack_frequency_ratio = 3.0;
  spec.params.threshold_ratio = 1.05;
  spec.rounds = 3000;
  spec.seed = 99;
  spec.workers = 1;
  const auto m = run_experiment(spec);

  std::uint64_t bad = 0, bad_hit = 0, good = 0, good_hit = 0, flagged = 0, legit_rounds = 0, legit_rounds_hit = 0,
                bad_rounds = 0, bad_rounds_hit = 0, shared = 0, shared_hit = 0;
  std::vector<std::uint64_t> type(4, 0), type_hit(4, 0);
  for (std::uint64_t r = 0; r < spec.rounds; ++r) {
    Rng rng = substream(spec.seed, r);
    const auto out = run_round(spec.params, rng);
    std::uint64_t b = 0;
    for (const auto& d : out.population.devices) {
      if (!d.malicious) continue;
      ++b;
      ++type[d.type_index];
      if (out.verdict.flagged) ++type_hit[d.type_index];
    }
    const std::uint64_t g = out.population.devices.size() - b;
    bad += b;
    good += g;
    legit_rounds += g > 0;
    bad_rounds += b > 0;
    if (b > 0) shared += g;
    if (out.verdict.flagged) {
      ++flagged;
      bad_hit += b;
      good_hit += g;
      legit_rounds_hit += g > 0;
      bad_rounds_hit += b > 0;
      if (b > 0) shared_hit += g;
    }
  }
  CHECK(m.rounds == spec.rounds);
  CHECK(same(m.malicious_quarantined, {bad_hit, bad}));
  CHECK(same(m.legit_quarantined, {legit_rounds_hit, legit_rounds}));
  CHECK(same(m.legit_quarantined_pooled, {good_hit, good}));
  CHECK(same(m.legit_quarantined_in_malicious_flows, {shared_hit, shared}));
  CHECK(same(m.flagged_flows, {flagged, spec.rounds}));
  CHECK(same(m.detect_given_malicious, {bad_rounds_hit, bad_rounds}));
  for (std::size_t t = 0; t < 4; ++t) CHECK(same(m.malicious_quarantined_by_type[t], {type_hit[t], type[t]}));
  CHECK(bad > 0);
  CHECK(flagged > 0);
}

TEST_CASE("metrics do not depend on the worker count") {
  ExperimentSpec spec;
  spec.rounds = 20000;
  spec.seed = 3;
  spec.workers = 1;
  const auto one = run_experiment(spec);
  spec.workers = 3;
  const auto three = run_experiment(spec);
  spec.workers = 8;
  const auto eight = run_experiment(spec);
  CHECK(same(one, three));
  CHECK(same(one, eight));
}

TEST_CASE("no malicious devices means nothing is quarantined") {
  ExperimentSpec spec;
  spec.params.malicious_probability = 0.0;
  spec.rounds = 2000;
  const auto m = run_experiment(spec);
  CHECK(m.flagged_flows.hits == 0);
  CHECK(m.legit_quarantined.value() == 0.0);
  CHECK(m.malicious_quarantined.value() == 0.0);
  CHECK_FALSE(m.detect_given_malicious.defined());
}

TEST_CASE("with divisible periods clean flows are never flagged") {
  ExperimentSpec spec;
  spec.params.malicious_probability = 0.02;
  spec.params.threshold_ratio = 1.0001;
  spec.rounds = 5000;
  for (double sp : {0.2, 1.0, 1.5}) {
    spec.params.sampling_period_s = sp;
    const auto m = run_experiment(spec);
    CHECK(m.flagged_flows.hits == m.detect_given_malicious.hits);
    CHECK(m.legit_quarantined.value() <= m.flagged_flows.value());
  }
}

TEST_CASE("every malicious flow is caught when the attack is loud") {
  ExperimentSpec spec;
  spec.params.malicious_probability = 0.01;
  spec.params.attack_frequency_ratio = 150.0;
  spec.rounds = 20000;
  const auto m = run_experiment(spec);
  // A lone manufacturing-cell attacker can still hide behind a rare, very
  // heavy flow, so not exactly 1.
  CHECK(m.malicious_quarantined.value() >= 0.999);
  CHECK(m.detect_given_malicious.value() >= 0.999);
  const double expect = oracle::p_b(100, 0.01);
  CHECK(std::fabs(m.flagged_flows.value() - expect) < 4.0 * std::sqrt(expect * (1 - expect) / 20000));
}

TEST_CASE("sweep helpers") {
  CHECK(parse_sweep_parameter("pm") == SweepParameter::MaliciousProbability);
  CHECK(parse_sweep_parameter("t_r") == SweepParameter::ThresholdRatio);
  CHECK(sweep_parameter_name(SweepParameter::SamplingPeriod) == "s_p");
  CHECK_THROWS_AS(parse_sweep_parameter("q"), InvalidInput);
  CHECK_THROWS_AS(with_parameter({}, SweepParameter::DevicesPerFlow, 2.5), InvalidInput);
  CHECK(with_parameter({}, SweepParameter::DevicesPerFlow, 7).devices_per_flow == 7);

  ExperimentSpec base;
  base.rounds = 10;
  const double bad_grid[] = {0.1, 2.0};
  CHECK_THROWS_AS(sweep(base, SweepParameter::MaliciousProbability, bad_grid), InvalidInput);
  CHECK_THROWS_AS(sweep(base, SweepParameter::MaliciousProbability, std::span<const double>{}), InvalidInput);
}

TEST_CASE("sampling period sweep under common random numbers") {
  ExperimentSpec base;
  base.rounds = 5000;
  const double grid[] = {0.2, 0.5, 1.0, 1.5};
  const auto rows = sweep(base, SweepParameter::SamplingPeriod, grid);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) CHECK(same(r.metrics, rows.front().metrics));

  const auto independent = sweep(base, SweepParameter::SamplingPeriod, grid, SeedPolicy::Independent);
  CHECK_FALSE(same(independent[0].metrics, independent[1].metrics));
}

TEST_CASE("CSV and JSON output") {
  ExperimentSpec base;
  base.rounds = 200;
  const double grid[] = {50, 100};
  const auto rows = sweep(base, SweepParameter::DevicesPerFlow, grid);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  std::istringstream lines(csv.str());
  std::string header, line;
  std::getline(lines, header);
  CHECK(header.rfind("parameter,value,n,p_m,f_m,t_r,s_p,rounds,malicious_quarantined_ratio", 0) == 0);
  const auto columns = std::count(header.begin(), header.end(), ',');
  CHECK(columns == 7 + 12 + 8);
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(std::count(line.begin(), line.end(), ',') == columns);
    CHECK(line.rfind("n,", 0) == 0);
  }
  CHECK(count == 2);

  const auto j = sweep_to_json(rows);
  REQUIRE(j.size() == 2);
  CHECK(j[1]["n"] == 100);
  CHECK(j[0]["metrics"]["malicious_quarantined_by_type"].size() == 4);
  CHECK(j[0]["metrics"]["flagged_flows"]["trials"] == 200);
}
