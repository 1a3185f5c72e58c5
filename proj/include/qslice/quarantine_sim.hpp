#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qslice/rng.hpp"
#include "qslice/traffic_model.hpp"

namespace qslice {

using UeId = std::size_t;
using FlowId = std::size_t;

enum class SliceId { Iot, Quarantine };
enum class GatewayLifecycle { NotDeployed, Deploying, Initializing, Ready };

/// How much of the quarantine slice exists before a flow is moved into it.
enum class ReassignmentMode {
  Reactive,             // deploy + initialize + replicate + reconfigure
  ProactiveDeployed,    // gateway already running: replicate + reconfigure
  ProactiveReplicated,  // contexts already mirrored: reconfigure only
};

enum class TimingSampling { Constant, Uniform, Triangular, Maximum };

enum class Stage { Deploy, Initialize, Replicate, Reconfigure };

std::string_view to_string(ReassignmentMode mode);
std::string_view to_string(TimingSampling sampling);
std::string_view to_string(Stage stage);
std::string_view to_string(GatewayLifecycle lifecycle);
ReassignmentMode parse_reassignment_mode(std::string_view name);
TimingSampling parse_timing_sampling(std::string_view name);

/// Summary statistics of one pipeline stage, in milliseconds.
struct StageTiming {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double p95 = 0.0;

  void validate() const;
  /// Constant returns the mean, Uniform draws in [min, max], Triangular uses
  /// (min, median, max) as (low, mode, high), Maximum returns max.
  double sample(TimingSampling sampling, Rng& rng) const;
};

struct ReassignmentTimings {
  StageTiming deploy;       // gateway container deployment
  StageTiming initialize;   // gateway application start-up
  StageTiming replicate;    // UE context replication
  StageTiming reconfigure;  // switch flow-rule update
  TimingSampling sampling = TimingSampling::Constant;

  /// Statistics measured over 100 reassignments on the container testbed.
  static ReassignmentTimings measured_testbed();
  const StageTiming& of(Stage stage) const;
  void validate() const;
};

/// Total reassignment latency statistics reported alongside the stages.
StageTiming measured_testbed_total();

struct TraceEvent {
  double time_ms = 0.0;
  std::string entity;
  std::string kind;
  std::string detail;
};

struct StageSample {
  Stage stage;
  double start_ms = 0.0;
  double duration_ms = 0.0;
};

struct ReassignmentResult {
  std::vector<TraceEvent> trace;
  std::vector<StageSample> stages;
  double latency_ms = 0.0;
};

struct UeContext {
  UeId ue = 0;
  FlowId flow = 0;
  SliceId current_slice = SliceId::Iot;
  std::set<SliceId> context_present_on;
  bool blocked = false;
};

struct GatewayNode {
  std::string id;
  SliceId slice = SliceId::Iot;
  GatewayLifecycle lifecycle = GatewayLifecycle::NotDeployed;
  std::set<UeId> held_contexts;
};

/// Switch rule table: one base forwarding rule per aggregated flow, an
/// optional higher-priority redirect per quarantined flow, and per-UE drop
/// rules for blocked devices.
class FlowRuleTable {
 public:
  enum class Kind { FlowBase, FlowRedirect, UeBlock };
  enum class Action { ToIotGateway, ToQuarantineGateway, Drop };
  struct Key {
    Kind kind;
    std::size_t id;
    auto operator<=>(const Key&) const = default;
  };

  explicit FlowRuleTable(std::size_t capacity = 4000) : capacity_(capacity) {}

  /// Throws CapacityError when a new key would exceed capacity.
  void install(Key key, Action action);
  void remove(Key key);
  bool contains(Key key) const { return rules_.contains(key); }
  std::size_t size() const { return rules_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Redirect rule if any, else the base rule.
  std::optional<Action> flow_target(FlowId flow) const;

 private:
  std::size_t capacity_;
  std::map<Key, Action> rules_;
};

/// SDN controller moving aggregated flows between the IoT slice and the
/// quarantine slice. Keeps a virtual clock; each operation runs its stages
/// back to back starting at now() and leaves the clock at their end.
class SliceController {
 public:
  using Observer = std::function<void(const SliceController&, const TraceEvent&)>;

  /// flow_sizes[f] UEs in flow f, numbered consecutively. `provisioning`
  /// sets the initial quarantine gateway: NotDeployed (Reactive), Ready and
  /// empty (ProactiveDeployed) or Ready with every context (ProactiveReplicated).
  SliceController(std::span<const std::size_t> flow_sizes, ReassignmentMode provisioning,
                  std::size_t rule_capacity = 4000);

  /// Moves `flow` to the quarantine slice. The quarantine gateway must match
  /// `mode` (see ReassignmentMode). Throws PreconditionError / CapacityError
  /// without touching any state.
  ReassignmentResult quarantine_flow(FlowId flow, ReassignmentMode mode, const ReassignmentTimings& timings, Rng& rng);

  /// Sends a quarantined flow back to the IoT slice with one data-plane
  /// reconfiguration. UEs in `block` get drop rules installed in the same
  /// update.
  ReassignmentResult release_flow(FlowId flow, const ReassignmentTimings& timings, Rng& rng,
                                  std::span<const UeId> block = {});

  /// Tears the quarantine gateway down; only when no flow uses it.
  void decommission_quarantine_gateway();

  bool in_quarantine(FlowId flow) const;
  std::size_t quarantined_flows() const;
  std::size_t flow_count() const { return members_.size(); }
  const std::vector<UeId>& flow_members(FlowId flow) const { return members_.at(flow); }
  const UeContext& context(UeId ue) const { return contexts_.at(ue); }
  const GatewayNode& gateway(SliceId slice) const { return slice == SliceId::Iot ? iot_gw_ : quarantine_gw_; }
  const FlowRuleTable& rules() const { return rules_; }
  ReassignmentMode provisioning() const { return provisioning_; }

  double now() const { return now_; }
  void advance_to(double time_ms);
  void set_observer(Observer observer) { observer_ = std::move(observer); }

  /// Every flow's rule target is a Ready gateway holding all of the flow's
  /// contexts, UE slices agree with the rules, and the table is within
  /// capacity. Throws PreconditionError naming the first violation.
  void check_continuity() const;

 private:
  void emit(ReassignmentResult& result, std::string entity, std::string kind, std::string detail = {});
  double run_stage(ReassignmentResult& result, Stage stage, const ReassignmentTimings& timings, Rng& rng);
  bool holds_all(const GatewayNode& gw, FlowId flow) const;
  GatewayNode& gw(SliceId slice) { return slice == SliceId::Iot ? iot_gw_ : quarantine_gw_; }

  ReassignmentMode provisioning_;
  std::vector<std::vector<UeId>> members_;
  std::vector<UeContext> contexts_;
  GatewayNode iot_gw_;
  GatewayNode quarantine_gw_;
  FlowRuleTable rules_;
  double now_ = 0.0;
  Observer observer_;
};

/// Repeats a single-UE quarantine (and release) on fresh controllers.
struct ReassignmentStudy {
  std::vector<double> total_ms;
  std::vector<std::vector<double>> stage_ms;  // indexed by executed stage order
  std::vector<Stage> stages;
  std::vector<double> release_ms;
};
ReassignmentStudy run_reassignment_study(ReassignmentMode mode, const ReassignmentTimings& timings,
                                         std::size_t repetitions, Rng& rng);

/// Order statistics use linear interpolation between neighbours.
StageTiming summarize(std::vector<double> samples);

// ---- closed loop -----------------------------------------------------------

/// Second, per-device inspection stage inside the quarantine slice.
class SecondStageClassifier {
 public:
  virtual ~SecondStageClassifier() = default;
  /// Time from quarantine completion to verdicts for every device of the flow.
  virtual double delay_ms() const = 0;
  virtual bool judge_malicious(const Device& device, Rng& rng) = 0;
};

class PerfectClassifier final : public SecondStageClassifier {
 public:
  explicit PerfectClassifier(double delay_ms = 0.0) : delay_(delay_ms) {}
  double delay_ms() const override { return delay_; }
  bool judge_malicious(const Device& device, Rng&) override { return device.malicious; }

 private:
  double delay_;
};

/// Correct with probability `accuracy`, independently per device.
class NoisyClassifier final : public SecondStageClassifier {
 public:
  NoisyClassifier(double accuracy, double delay_ms);
  double delay_ms() const override { return delay_; }
  bool judge_malicious(const Device& device, Rng& rng) override;

 private:
  double accuracy_;
  double delay_;
};

struct ClosedLoopConfig {
  std::size_t flows = 1;
  double duration_ms = 10'000.0;
  std::size_t rule_capacity = 4000;
  ReassignmentMode mode = ReassignmentMode::Reactive;
  ReassignmentTimings timings = ReassignmentTimings::measured_testbed();
};

struct DeviceTimeline {
  UeId ue = 0;
  FlowId flow = 0;
  std::size_t type_index = 0;
  bool malicious = false;
  std::size_t times_quarantined = 0;
  /// Summed time from the flag that triggered a quarantine to the release.
  double quarantine_dwell_ms = 0.0;
  /// When the drop rule took effect, measured from simulation start.
  std::optional<double> blocked_at_ms;
};

struct OccupancySample {
  double time_ms = 0.0;
  std::size_t rules = 0;
};

struct ClosedLoopResult {
  std::vector<TraceEvent> trace;
  std::vector<DeviceTimeline> devices;
  std::vector<OccupancySample> rule_occupancy;
  std::size_t quarantines = 0;
  std::size_t releases = 0;
  std::size_t dropped_actions = 0;
};

/// Samples `config.flows` populations and runs the two-stage loop on them.
ClosedLoopResult run_closed_loop(const ScenarioParams& params, const ClosedLoopConfig& config,
                                 SecondStageClassifier& second_stage, Rng& rng);

/// Same loop over given populations (config.flows is ignored). Every s_p the
/// first stage checks each monitored flow; flagged flows are quarantined
/// through a sequential controller queue, inspected after the classifier
/// delay, then released with drop rules for the devices judged malicious.
ClosedLoopResult run_closed_loop(const std::vector<FlowPopulation>& flows, const ScenarioParams& params,
                                 const ClosedLoopConfig& config, SecondStageClassifier& second_stage, Rng& rng);

/// One JSON object per line: {"t_ms", "entity", "event", "detail"}.
void write_trace_jsonl(std::ostream& out, std::span<const TraceEvent> trace);
void write_timeline_csv(std::ostream& out, const ClosedLoopResult& result);
void write_occupancy_csv(std::ostream& out, const ClosedLoopResult& result);

}  // namespace qslice
