#include "cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/config.hpp"
#include "qslice/analytics.hpp"
#include "qslice/errors.hpp"
#include "qslice/quarantine_sim.hpp"

namespace qslice::cli {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kFigureMaliciousProbabilities[] = {0.005, 0.010, 0.015, 0.020, 0.025};

FigurePreset figure_preset(std::string_view name) {
  FigurePreset f;
  f.name = std::string(name);
  f.base = ScenarioParams{};
  f.base.sampling_period_s = 1.0;
  if (name == "fig2") {
    f.base.threshold_ratio = 1.01;
    f.base.attack_frequency_ratio = 100.0;
    f.param = SweepParameter::MaliciousProbability;
    for (int k = 1; k <= 25; ++k) f.grid.push_back(k / 1000.0);
    f.curve_param = SweepParameter::DevicesPerFlow;
    f.curves = {50, 100, 150, 200, 250};
  } else if (name == "fig4") {
    f.base.devices_per_flow = 100;
    f.base.attack_frequency_ratio = 100.0;
    f.param = SweepParameter::ThresholdRatio;
    // 1 + 10^(k/20): twenty points per decade of the excess over 1.
    for (int k = -60; k <= 17; ++k) f.grid.push_back(1.0 + std::pow(10.0, k / 20.0));
    f.curve_param = SweepParameter::MaliciousProbability;
    f.curves.assign(std::begin(kFigureMaliciousProbabilities), std::end(kFigureMaliciousProbabilities));
  } else if (name == "fig5") {
    f.base.devices_per_flow = 100;
    f.base.threshold_ratio = 1.01;
    f.param = SweepParameter::AttackFrequencyRatio;
    f.grid = {1, 2, 3, 5, 7.5, 10, 15, 20, 25, 30, 40, 50, 60, 75, 90, 100, 110, 125, 150, 175, 200};
    f.curve_param = SweepParameter::MaliciousProbability;
    f.curves.assign(std::begin(kFigureMaliciousProbabilities), std::end(kFigureMaliciousProbabilities));
  } else {
    throw InvalidInput("unknown figure '" + std::string(name) + "' (expected fig2, fig4 or fig5)");
  }
  return f;
}

std::vector<std::size_t> fig3_flow_sizes() {
  std::vector<std::size_t> sizes(250);
  std::iota(sizes.begin(), sizes.end(), 1);
  return sizes;
}

namespace {

constexpr const char* kUndefined = "undefined (empty conditioning set)";

/// Writes the whole document next to `path` and renames it into place, so a
/// failed command never leaves a truncated file behind.
void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidInput("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw InvalidInput("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw InvalidInput("cannot move output into " + path.string() + ": " + ec.message());
  }
}

bool wants_json(const fs::path& path) { return path.extension() == ".json"; }

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

/// Scenario flags shared by several subcommands; anything given on the
/// command line overrides the config file.
struct ScenarioFlags {
  std::string config_path;
  std::optional<std::size_t> n;
  std::optional<double> pm, fm, tr, sp;
  std::optional<std::uint64_t> rounds, seed;
  std::optional<unsigned> workers;

  void attach(CLI::App& app, bool monte_carlo) {
    app.add_option("--config", config_path, "Scenario JSON (docs/config.schema.json)")->check(CLI::ExistingFile);
    app.add_option("--n", n, "Devices per aggregated flow");
    app.add_option("--pm", pm, "Probability that a device is malicious");
    app.add_option("--fm", fm, "Malicious over legitimate transmission frequency");
    app.add_option("--tr", tr, "Detection threshold ratio");
    app.add_option("--sp", sp, "Sampling period in seconds");
    app.add_option("--seed", seed, "Random seed (default: QSLICE_SEED or 1)");
    if (monte_carlo) {
      app.add_option("--rounds", rounds, "Monte Carlo rounds");
      app.add_option("--workers", workers, "Worker threads (0 = all cores)");
    }
  }

  ScenarioConfig resolve() const {
    ScenarioConfig c = config_path.empty() ? default_config() : load_config(config_path);
    if (n) c.params.devices_per_flow = *n;
    if (pm) c.params.malicious_probability = *pm;
    if (fm) c.params.attack_frequency_ratio = *fm;
    if (tr) c.params.threshold_ratio = *tr;
    if (sp) c.params.sampling_period_s = *sp;
    if (rounds) c.rounds = *rounds;
    if (seed) c.seed = *seed;
    if (workers) c.workers = *workers;
    c.params.validate();
    if (c.rounds < 1) throw InvalidInput("rounds must be at least 1");
    return c;
  }
};

ExperimentSpec experiment_of(const ScenarioConfig& c) { return {c.params, c.rounds, c.seed, c.workers}; }

std::string scenario_line(const ScenarioParams& p) {
  std::ostringstream s;
  s << "n=" << p.devices_per_flow << " p_m=" << p.malicious_probability << " f_m=" << p.attack_frequency_ratio
    << " t_r=" << p.threshold_ratio << " s_p=" << p.sampling_period_s;
  return s.str();
}

// ---- simulate ----------------------------------------------------------------

void print_metrics(std::ostream& out, const ExperimentMetrics& m) {
  auto line = [&](const std::string& name, const Proportion& p, bool conditional) {
    out << std::left << std::setw(34) << name;
    if (conditional && !p.defined()) {
      out << kUndefined << '\n';
      return;
    }
    out << fmt(p.value()) << "  se " << fmt(p.standard_error()) << "  (" << p.hits << "/" << p.trials << ")\n";
  };
  line("malicious_quarantined_ratio", m.malicious_quarantined, false);
  line("legit_quarantined_ratio", m.legit_quarantined, false);
  line("legit_quarantined_pooled_ratio", m.legit_quarantined_pooled, false);
  line("legit_in_malicious_flows_ratio", m.legit_quarantined_in_malicious_flows, false);
  line("flagged_flow_ratio", m.flagged_flows, false);
  line("detect_given_malicious", m.detect_given_malicious, true);
  for (std::size_t t = 0; t < m.malicious_quarantined_by_type.size(); ++t) {
    line("malicious_quarantined_type" + std::to_string(t), m.malicious_quarantined_by_type[t], false);
  }
}

int cmd_simulate(const ScenarioFlags& flags, const std::string& out_path, std::ostream& out) {
  const ScenarioConfig c = flags.resolve();
  const auto metrics = run_experiment(experiment_of(c));
  out << "scenario " << scenario_line(c.params) << " rounds=" << c.rounds << " seed=" << c.seed << '\n';
  print_metrics(out, metrics);
  if (!out_path.empty()) {
    std::ostringstream doc;
    if (wants_json(out_path)) {
      doc << json{{"config", config_to_json(c)}, {"metrics", metrics_to_json(metrics)}}.dump(2) << '\n';
    } else {
      const SweepRow row{SweepParameter::DevicesPerFlow, static_cast<double>(c.params.devices_per_flow), c.params,
                         metrics};
      write_sweep_csv(doc, std::span(&row, 1));
    }
    write_atomically(out_path, doc.str());
  }
  return kOk;
}

// ---- sweep -------------------------------------------------------------------

struct SweepArgs {
  std::string figure;
  std::string param;
  std::vector<double> values;
  std::string seed_policy = "common";
  std::string out_path;
};

int cmd_sweep(const ScenarioFlags& flags, const SweepArgs& a, std::ostream& out) {
  if (a.figure.empty() == a.param.empty()) throw InvalidInput("sweep needs exactly one of --figure or --param");
  ScenarioConfig c = flags.resolve();
  SeedPolicy policy;
  if (a.seed_policy == "common") {
    policy = SeedPolicy::Common;
  } else if (a.seed_policy == "independent") {
    policy = SeedPolicy::Independent;
  } else {
    throw InvalidInput("unknown seed policy '" + a.seed_policy + "' (expected common or independent)");
  }

  std::vector<SweepRow> rows;
  if (!a.figure.empty()) {
    const FigurePreset f = figure_preset(a.figure);
    // Caption parameters win over the config; the catalog and experiment
    // settings come from it.
    ScenarioParams base = f.base;
    base.catalog = c.params.catalog;
    std::vector<ExperimentSpec> specs;
    for (double curve : f.curves) {
      ExperimentSpec spec = experiment_of(c);
      spec.params = with_parameter(base, f.curve_param, curve);
      for (double v : f.grid) with_parameter(spec.params, f.param, v);
      specs.push_back(spec);
    }
    for (const auto& spec : specs) {
      auto part = sweep(spec, f.param, f.grid, policy);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  } else {
    if (a.values.empty()) throw InvalidInput("--param needs --values");
    rows = sweep(experiment_of(c), parse_sweep_parameter(a.param), a.values, policy);
  }

  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  out << csv.str();
  if (!a.out_path.empty()) {
    write_atomically(a.out_path, wants_json(a.out_path) ? sweep_to_json(rows).dump(2) + "\n" : csv.str());
  }
  return kOk;
}

// ---- analytic ----------------------------------------------------------------

struct AnalyticArgs {
  bool table2 = false;
  bool fig3 = false;
  std::string general;
  std::string special;
  std::string out_path;
};

std::string optional_text(const std::optional<double>& v) { return v ? fmt(*v, 9) : std::string(kUndefined); }
json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int cmd_analytic(const AnalyticArgs& a, std::ostream& out) {
  const int selected = int(a.table2) + int(a.fig3) + int(!a.general.empty()) + int(!a.special.empty());
  if (selected != 1) throw InvalidInput("analytic needs exactly one of --table2, --fig3, --general, --special");

  std::ostringstream csv;
  json doc;
  if (a.table2) {
    csv << "p_m,n,p_flow_contains_malicious_pct\n";
    doc = json::array();
    for (double pm : kFigureMaliciousProbabilities) {
      const double pct = 100.0 * p_flow_contains_malicious(100, pm);
      csv << pm << ",100," << fmt(pct, 4) << '\n';
      doc.push_back({{"p_m", pm}, {"n", 100}, {"p_flow_contains_malicious_pct", pct}});
    }
  } else if (a.fig3) {
    AnalyticScenario s;
    const auto sizes = fig3_flow_sizes();
    const auto general = p_detect_general_curve(s, sizes);
    csv << "n,p_detect_general,contribution_nonzero_types\n";
    doc = json::array();
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      s.devices_per_flow = sizes[i];
      const auto share = contribution_nonzero_types(s);
      csv << sizes[i] << ',' << optional_text(general[i]) << ',' << optional_text(share) << '\n';
      doc.push_back({{"n", sizes[i]}, {"p_detect_general", optional_json(general[i])},
                     {"contribution_nonzero_types", optional_json(share)}});
    }
  } else {
    const bool special = !a.special.empty();
    const ScenarioConfig c = load_config(special ? a.special : a.general);
    const auto s = AnalyticScenario::from(c.params);
    s.validate();
    const double p_b = p_flow_contains_malicious(s.devices_per_flow, s.malicious_probability);
    csv << "quantity,value\n";
    csv << "p_flow_contains_malicious," << fmt(p_b, 9) << '\n';
    doc = {{"config", config_to_json(c)}, {"p_flow_contains_malicious", p_b}};
    if (special) {
      check_special_envelope(s);
      const auto share = contribution_nonzero_types(s);
      const auto value = p_detect_special(s);
      csv << "contribution_nonzero_types," << optional_text(share) << '\n';
      csv << "p_detect_special," << optional_text(value) << '\n';
      doc["contribution_nonzero_types"] = optional_json(share);
      doc["p_detect_special"] = optional_json(value);
    } else {
      const auto value = p_detect_general(s);
      csv << "p_detect_general," << optional_text(value) << '\n';
      doc["p_detect_general"] = optional_json(value);
    }
  }
  out << csv.str();
  if (!a.out_path.empty()) write_atomically(a.out_path, wants_json(a.out_path) ? doc.dump(2) + "\n" : csv.str());
  return kOk;
}

// ---- reassign ----------------------------------------------------------------

struct ReassignArgs {
  std::optional<std::string> mode;
  std::optional<std::string> timing;
  std::optional<std::size_t> reps;
  std::string out_path;
};

int cmd_reassign(const ScenarioFlags& flags, const ReassignArgs& a, std::ostream& out) {
  ScenarioConfig c = flags.resolve();
  if (a.mode) c.mode = parse_reassignment_mode(*a.mode);
  if (a.timing) c.timing = parse_timing_sampling(*a.timing);
  if (a.reps) c.reps = *a.reps;
  if (c.reps < 1) throw InvalidInput("--reps must be at least 1");

  ReassignmentTimings timings = ReassignmentTimings::measured_testbed();
  timings.sampling = c.timing;
  Rng rng = substream(c.seed, 0);
  const auto study = run_reassignment_study(c.mode, timings, c.reps, rng);

  std::ostringstream csv;
  json rows = json::array();
  csv << "quantity,mean,median,min,max,p95\n";
  auto emit = [&](const std::string& name, const std::vector<double>& samples) {
    const auto s = summarize(samples);
    csv << name << ',' << fmt(s.mean, 4) << ',' << fmt(s.median, 4) << ',' << fmt(s.min, 4) << ','
        << fmt(s.max, 4) << ',' << fmt(s.p95, 4) << '\n';
    rows.push_back({{"quantity", name}, {"mean", s.mean}, {"median", s.median}, {"min", s.min}, {"max", s.max},
                    {"p95", s.p95}});
  };
  emit("total", study.total_ms);
  for (std::size_t i = 0; i < study.stages.size(); ++i) emit(std::string(to_string(study.stages[i])), study.stage_ms[i]);
  emit("release", study.release_ms);

  out << "mode " << to_string(c.mode) << " timing " << to_string(c.timing) << " reps " << c.reps << " (ms)\n";
  out << csv.str();
  if (!a.out_path.empty()) {
    const json doc{{"mode", to_string(c.mode)}, {"timing", to_string(c.timing)}, {"reps", c.reps}, {"rows", rows}};
    write_atomically(a.out_path, wants_json(a.out_path) ? doc.dump(2) + "\n" : csv.str());
  }
  return kOk;
}

// ---- validate ----------------------------------------------------------------

int cmd_validate(const ScenarioFlags& flags, std::optional<double> tolerance, std::ostream& out) {
  ScenarioConfig c = flags.resolve();
  if (tolerance) c.tolerance_se = *tolerance;
  if (!(c.tolerance_se > 0.0)) throw InvalidInput("--tolerance must be positive");

  const auto metrics = run_experiment(experiment_of(c));
  const auto& mc = metrics.detect_given_malicious;
  out << "scenario " << scenario_line(c.params) << " rounds=" << c.rounds << " seed=" << c.seed << '\n';
  out << std::left << std::setw(28) << "monte_carlo";
  if (!mc.defined()) {
    out << kUndefined << '\n';
  } else {
    out << fmt(mc.value()) << "  se " << fmt(mc.standard_error()) << "  (" << mc.hits << "/" << mc.trials << ")\n";
  }

  const auto s = AnalyticScenario::from(c.params);
  if (c.params.threshold_ratio < 1.0) {
    out << "analytic models need t_r >= 1; skipped\n";
    return kOk;
  }

  auto compare = [&](const std::string& name, const std::optional<double>& exact, bool asserted) {
    out << std::left << std::setw(28) << name;
    if (!exact || !mc.defined()) {
      out << kUndefined << '\n';
      return;
    }
    const double diff = mc.value() - *exact;
    const double se = std::sqrt(*exact * (1.0 - *exact) / static_cast<double>(mc.trials));
    out << fmt(*exact) << "  mc-diff " << std::showpos << fmt(diff) << std::noshowpos;
    if (se > 0.0) out << " (" << fmt(diff / se, 2) << " se)";
    if (asserted) out << (std::fabs(diff) <= c.tolerance_se * se + 1e-12 ? "  PASS" : "  FAIL");
    out << '\n';
  };
  compare("p_detect_general", p_detect_general(s), false);
  if (s.devices_per_flow <= kBruteForceMaxDevices) {
    compare("brute_force_joint", brute_force_p_detect(s), true);
  } else {
    out << std::left << std::setw(28) << "brute_force_joint" << "skipped (n > " << kBruteForceMaxDevices << ")\n";
  }
  out << "tolerance " << c.tolerance_se << " standard errors\n";
  return kOk;
}

// ---- closed loop -------------------------------------------------------------

struct LoopArgs {
  std::size_t flows = 10;
  double duration_ms = 10'000.0;
  std::size_t rule_capacity = 4000;
  std::optional<std::string> mode;
  std::optional<std::string> timing;
  double accuracy = 1.0;
  double dpi_delay_ms = 0.0;
  std::string trace_path, timeline_path, occupancy_path;
};

int cmd_loop(const ScenarioFlags& flags, const LoopArgs& a, std::ostream& out) {
  ScenarioConfig c = flags.resolve();
  if (a.mode) c.mode = parse_reassignment_mode(*a.mode);
  if (a.timing) c.timing = parse_timing_sampling(*a.timing);
  ClosedLoopConfig cfg;
  cfg.flows = a.flows;
  cfg.duration_ms = a.duration_ms;
  cfg.rule_capacity = a.rule_capacity;
  cfg.mode = c.mode;
  cfg.timings.sampling = c.timing;
  NoisyClassifier dpi(a.accuracy, a.dpi_delay_ms);
  Rng rng = substream(c.seed, 0);
  const auto result = run_closed_loop(c.params, cfg, dpi, rng);

  double legit_dwell = 0.0, block_time = 0.0;
  std::size_t legit = 0, blocked = 0, malicious = 0;
  for (const auto& d : result.devices) {
    if (d.malicious) ++malicious;
    if (!d.malicious) {
      ++legit;
      legit_dwell += d.quarantine_dwell_ms;
    }
    if (d.blocked_at_ms) {
      ++blocked;
      block_time += *d.blocked_at_ms;
    }
  }
  std::size_t peak = 0;
  for (const auto& o : result.rule_occupancy) peak = std::max(peak, o.rules);
  out << "scenario " << scenario_line(c.params) << " flows=" << a.flows << " duration_ms=" << a.duration_ms
      << " mode=" << to_string(c.mode) << '\n'
      << "quarantines " << result.quarantines << "\nreleases " << result.releases << "\ndropped_actions "
      << result.dropped_actions << "\nmalicious_devices " << malicious << "\nblocked_devices " << blocked
      << "\nmean_legit_dwell_ms " << fmt(legit ? legit_dwell / static_cast<double>(legit) : 0.0, 3)
      << "\nmean_time_to_block_ms " << fmt(blocked ? block_time / static_cast<double>(blocked) : 0.0, 3)
      << "\npeak_rules " << peak << '\n';

  auto save = [](const std::string& path, auto writer) {
    if (path.empty()) return;
    std::ostringstream s;
    writer(s);
    write_atomically(path, s.str());
  };
  save(a.trace_path, [&](std::ostream& s) { write_trace_jsonl(s, result.trace); });
  save(a.timeline_path, [&](std::ostream& s) { write_timeline_csv(s, result); });
  save(a.occupancy_path, [&](std::ostream& s) { write_occupancy_csv(s, result); });
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flow-level anomaly detection and quarantine slice experiments", "qslice"};
  app.require_subcommand(1);

  ScenarioFlags sim_flags, sweep_flags, reassign_flags, validate_flags, loop_flags;
  std::string sim_out;
  SweepArgs sweep_args;
  AnalyticArgs analytic_args;
  ReassignArgs reassign_args;
  std::optional<double> tolerance;
  LoopArgs loop_args;

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo detection experiment for one scenario");
  sim_flags.attach(*simulate, true);
  simulate->add_option("--out", sim_out, "Write metrics to a .csv or .json file");

  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep as CSV (figure presets or a custom grid)");
  sweep_flags.attach(*sweep_cmd, true);
  sweep_cmd->add_option("--figure", sweep_args.figure, "fig2, fig4 or fig5");
  sweep_cmd->add_option("--param", sweep_args.param, "Swept parameter: n, p_m, f_m, t_r or s_p");
  sweep_cmd->add_option("--values", sweep_args.values, "Grid values, comma separated")->delimiter(',');
  sweep_cmd->add_option("--seed-policy", sweep_args.seed_policy, "common or independent");
  sweep_cmd->add_option("--out", sweep_args.out_path, "Also write the table to a .csv or .json file");

  auto* analytic = app.add_subcommand("analytic", "Closed-form detection probabilities");
  analytic->add_flag("--table2", analytic_args.table2, "Share of flows holding malicious devices, n = 100");
  analytic->add_flag("--fig3", analytic_args.fig3, "P(detected | malicious flow) over n, paper defaults");
  analytic->add_option("--general", analytic_args.general, "Scenario JSON for the general formula")
      ->check(CLI::ExistingFile);
  analytic->add_option("--special", analytic_args.special, "Scenario JSON for the special-case formula")
      ->check(CLI::ExistingFile);
  analytic->add_option("--out", analytic_args.out_path, "Also write the table to a .csv or .json file");

  auto* reassign = app.add_subcommand("reassign", "Slice reassignment latency statistics");
  reassign_flags.attach(*reassign, false);
  reassign->add_option("--mode", reassign_args.mode, "reactive, proactive-deployed or proactive-replicated");
  reassign->add_option("--timing", reassign_args.timing, "constant, uniform, triangular or max");
  reassign->add_option("--reps", reassign_args.reps, "Repetitions");
  reassign->add_option("--out", reassign_args.out_path, "Also write the table to a .csv or .json file");

  auto* validate = app.add_subcommand("validate", "Compare Monte Carlo against the analytic models");
  validate_flags.attach(*validate, true);
  validate->add_option("--tolerance", tolerance, "Allowed deviation in standard errors");

  auto* loop = app.add_subcommand("loop", "Closed detection / quarantine / inspection loop");
  loop_flags.attach(*loop, false);
  loop->add_option("--flows", loop_args.flows, "Aggregated flows");
  loop->add_option("--duration-ms", loop_args.duration_ms, "Simulated time");
  loop->add_option("--rule-capacity", loop_args.rule_capacity, "Switch flow-table size");
  loop->add_option("--mode", loop_args.mode, "reactive, proactive-deployed or proactive-replicated");
  loop->add_option("--timing", loop_args.timing, "constant, uniform, triangular or max");
  loop->add_option("--accuracy", loop_args.accuracy, "Second-stage classifier accuracy");
  loop->add_option("--dpi-delay-ms", loop_args.dpi_delay_ms, "Second-stage verdict delay");
  loop->add_option("--trace", loop_args.trace_path, "Event trace (JSON lines)");
  loop->add_option("--timeline", loop_args.timeline_path, "Per-device timeline CSV");
  loop->add_option("--occupancy", loop_args.occupancy_path, "Rule-table occupancy CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags, sim_out, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags, sweep_args, out);
    if (analytic->parsed()) return cmd_analytic(analytic_args, out);
    if (reassign->parsed()) return cmd_reassign(reassign_flags, reassign_args, out);
    if (validate->parsed()) return cmd_validate(validate_flags, tolerance, out);
    if (loop->parsed()) return cmd_loop(loop_flags, loop_args, out);
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kCapacity;
  } catch (const AssumptionViolation& e) {
    err << "error: assumption violated: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace qslice::cli
