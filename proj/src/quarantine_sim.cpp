#include "qslice/quarantine_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <queue>
#include <random>
#include <string>

#include <json.hpp>

#include "qslice/detection.hpp"
#include "qslice/errors.hpp"

namespace qslice {

std::string_view to_string(ReassignmentMode mode) {
  switch (mode) {
    case ReassignmentMode::Reactive: return "reactive";
    case ReassignmentMode::ProactiveDeployed: return "proactive-deployed";
    case ReassignmentMode::ProactiveReplicated: return "proactive-replicated";
  }
  return "?";
}

std::string_view to_string(TimingSampling sampling) {
  switch (sampling) {
    case TimingSampling::Constant: return "constant";
    case TimingSampling::Uniform: return "uniform";
    case TimingSampling::Triangular: return "triangular";
    case TimingSampling::Maximum: return "max";
  }
  return "?";
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Deploy: return "deploy";
    case Stage::Initialize: return "initialize";
    case Stage::Replicate: return "replicate";
    case Stage::Reconfigure: return "reconfigure";
  }
  return "?";
}

std::string_view to_string(GatewayLifecycle lifecycle) {
  switch (lifecycle) {
    case GatewayLifecycle::NotDeployed: return "not-deployed";
    case GatewayLifecycle::Deploying: return "deploying";
    case GatewayLifecycle::Initializing: return "initializing";
    case GatewayLifecycle::Ready: return "ready";
  }
  return "?";
}

ReassignmentMode parse_reassignment_mode(std::string_view name) {
  if (name == "reactive") return ReassignmentMode::Reactive;
  if (name == "proactive-deployed") return ReassignmentMode::ProactiveDeployed;
  if (name == "proactive-replicated") return ReassignmentMode::ProactiveReplicated;
  throw InvalidInput("unknown reassignment mode '" + std::string(name) +
                     "' (expected reactive, proactive-deployed or proactive-replicated)");
}

TimingSampling parse_timing_sampling(std::string_view name) {
  if (name == "constant") return TimingSampling::Constant;
  if (name == "uniform") return TimingSampling::Uniform;
  if (name == "triangular") return TimingSampling::Triangular;
  if (name == "max") return TimingSampling::Maximum;
  throw InvalidInput("unknown timing model '" + std::string(name) + "' (expected constant, uniform, triangular or max)");
}

void StageTiming::validate() const {
  if (!(min >= 0.0 && min <= median && median <= max && min <= mean && mean <= max)) {
    throw InvalidInput("stage timing needs 0 <= min <= median, mean <= max");
  }
}

double StageTiming::sample(TimingSampling sampling, Rng& rng) const {
  switch (sampling) {
    case TimingSampling::Constant: return mean;
    case TimingSampling::Maximum: return max;
    case TimingSampling::Uniform: return std::uniform_real_distribution<double>(min, max)(rng);
    case TimingSampling::Triangular: {
      if (max == min) return min;
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const double split = (median - min) / (max - min);
      if (u < split) return min + std::sqrt(u * (max - min) * (median - min));
      return max - std::sqrt((1.0 - u) * (max - min) * (max - median));
    }
  }
  return mean;
}

ReassignmentTimings ReassignmentTimings::measured_testbed() {
  ReassignmentTimings t;
  t.deploy = {570.11, 571.48, 505.27, 630.98, 606.04};
  t.initialize = {381.68, 381.46, 361.89, 397.13, 392.32};
  t.replicate = {33.92, 33.71, 32.91, 37.67, 35.38};
  t.reconfigure = {3.98, 3.84, 0.61, 9.98, 6.03};
  return t;
}

StageTiming measured_testbed_total() { return {989.69, 992.20, 918.32, 1057.86, 1027.05}; }

const StageTiming& ReassignmentTimings::of(Stage stage) const {
  switch (stage) {
    case Stage::Deploy: return deploy;
    case Stage::Initialize: return initialize;
    case Stage::Replicate: return replicate;
    case Stage::Reconfigure: return reconfigure;
  }
  return reconfigure;
}

void ReassignmentTimings::validate() const {
  deploy.validate();
  initialize.validate();
  replicate.validate();
  reconfigure.validate();
}

// ---- rule table -------------------------------------------------------------

void FlowRuleTable::install(Key key, Action action) {
  if (!rules_.contains(key) && rules_.size() >= capacity_) {
    throw CapacityError("flow table full (" + std::to_string(capacity_) + " rules)");
  }
  rules_[key] = action;
}

void FlowRuleTable::remove(Key key) { rules_.erase(key); }

std::optional<FlowRuleTable::Action> FlowRuleTable::flow_target(FlowId flow) const {
  if (auto it = rules_.find({Kind::FlowRedirect, flow}); it != rules_.end()) return it->second;
  if (auto it = rules_.find({Kind::FlowBase, flow}); it != rules_.end()) return it->second;
  return std::nullopt;
}

// ---- controller -------------------------------------------------------------

SliceController::SliceController(std::span<const std::size_t> flow_sizes, ReassignmentMode provisioning,
                                 std::size_t rule_capacity)
    : provisioning_(provisioning), rules_(rule_capacity) {
  if (flow_sizes.size() > rule_capacity) throw CapacityError("more flows than flow-table capacity");
  iot_gw_ = {"iot-gw", SliceId::Iot, GatewayLifecycle::Ready, {}};
  quarantine_gw_ = {"quarantine-gw", SliceId::Quarantine, GatewayLifecycle::NotDeployed, {}};
  if (provisioning != ReassignmentMode::Reactive) quarantine_gw_.lifecycle = GatewayLifecycle::Ready;

  for (FlowId f = 0; f < flow_sizes.size(); ++f) {
    members_.emplace_back();
    for (std::size_t i = 0; i < flow_sizes[f]; ++i) {
      const UeId ue = contexts_.size();
      UeContext ctx{ue, f, SliceId::Iot, {SliceId::Iot}, false};
      iot_gw_.held_contexts.insert(ue);
      if (provisioning == ReassignmentMode::ProactiveReplicated) {
        ctx.context_present_on.insert(SliceId::Quarantine);
        quarantine_gw_.held_contexts.insert(ue);
      }
      contexts_.push_back(std::move(ctx));
      members_.back().push_back(ue);
    }
    rules_.install({FlowRuleTable::Kind::FlowBase, f}, FlowRuleTable::Action::ToIotGateway);
  }
}

void SliceController::advance_to(double time_ms) {
  if (time_ms < now_) throw PreconditionError("controller clock cannot move backwards");
  now_ = time_ms;
}

bool SliceController::in_quarantine(FlowId flow) const {
  return rules_.contains({FlowRuleTable::Kind::FlowRedirect, flow});
}

std::size_t SliceController::quarantined_flows() const {
  std::size_t n = 0;
  for (FlowId f = 0; f < members_.size(); ++f) n += in_quarantine(f) ? 1 : 0;
  return n;
}

bool SliceController::holds_all(const GatewayNode& g, FlowId flow) const {
  return std::all_of(members_[flow].begin(), members_[flow].end(),
                     [&](UeId ue) { return g.held_contexts.contains(ue); });
}

void SliceController::emit(ReassignmentResult& result, std::string entity, std::string kind, std::string detail) {
  result.trace.push_back({now_, std::move(entity), std::move(kind), std::move(detail)});
  if (observer_) observer_(*this, result.trace.back());
}

double SliceController::run_stage(ReassignmentResult& result, Stage stage, const ReassignmentTimings& timings,
                                  Rng& rng) {
  const double d = timings.of(stage).sample(timings.sampling, rng);
  result.stages.push_back({stage, now_, d});
  now_ += d;
  result.latency_ms += d;
  return d;
}

ReassignmentResult SliceController::quarantine_flow(FlowId flow, ReassignmentMode mode,
                                                    const ReassignmentTimings& timings, Rng& rng) {
  if (flow >= members_.size()) throw PreconditionError("unknown flow " + std::to_string(flow));
  if (in_quarantine(flow)) throw PreconditionError("flow " + std::to_string(flow) + " is already quarantined");
  const auto lifecycle = quarantine_gw_.lifecycle;
  const bool mirrored = holds_all(quarantine_gw_, flow);
  switch (mode) {
    case ReassignmentMode::Reactive:
      if (lifecycle != GatewayLifecycle::NotDeployed) {
        throw PreconditionError("reactive quarantine needs an undeployed quarantine gateway");
      }
      break;
    case ReassignmentMode::ProactiveDeployed:
      if (lifecycle != GatewayLifecycle::Ready || mirrored) {
        throw PreconditionError("proactive-deployed quarantine needs a ready gateway without the flow's contexts");
      }
      break;
    case ReassignmentMode::ProactiveReplicated:
      if (lifecycle != GatewayLifecycle::Ready || !mirrored) {
        throw PreconditionError("proactive-replicated quarantine needs a ready gateway holding the flow's contexts");
      }
      break;
  }
  if (rules_.size() + 1 > rules_.capacity()) {
    throw CapacityError("no room for the redirect rule of flow " + std::to_string(flow));
  }

  ReassignmentResult result;
  const std::string gw_name = "gateway:" + quarantine_gw_.id;
  const std::string flow_name = "flow:" + std::to_string(flow);
  if (mode == ReassignmentMode::Reactive) {
    quarantine_gw_.lifecycle = GatewayLifecycle::Deploying;
    emit(result, gw_name, "deploy_start");
    run_stage(result, Stage::Deploy, timings, rng);
    quarantine_gw_.lifecycle = GatewayLifecycle::Initializing;
    emit(result, gw_name, "deploy_end");
    emit(result, gw_name, "initialize_start");
    run_stage(result, Stage::Initialize, timings, rng);
    quarantine_gw_.lifecycle = GatewayLifecycle::Ready;
    emit(result, gw_name, "initialize_end");
  }
  if (mode != ReassignmentMode::ProactiveReplicated) {
    emit(result, flow_name, "replicate_start");
    run_stage(result, Stage::Replicate, timings, rng);
    for (UeId ue : members_[flow]) {
      quarantine_gw_.held_contexts.insert(ue);
      contexts_[ue].context_present_on.insert(SliceId::Quarantine);
    }
    emit(result, flow_name, "replicate_end");
  }
  emit(result, flow_name, "reconfigure_start");
  run_stage(result, Stage::Reconfigure, timings, rng);
  rules_.install({FlowRuleTable::Kind::FlowRedirect, flow}, FlowRuleTable::Action::ToQuarantineGateway);
  for (UeId ue : members_[flow]) contexts_[ue].current_slice = SliceId::Quarantine;
  emit(result, flow_name, "reconfigure_end");
  emit(result, flow_name, "quarantined", std::string(to_string(mode)));
  return result;
}

ReassignmentResult SliceController::release_flow(FlowId flow, const ReassignmentTimings& timings, Rng& rng,
                                                 std::span<const UeId> block) {
  if (flow >= members_.size()) throw PreconditionError("unknown flow " + std::to_string(flow));
  if (!in_quarantine(flow)) throw PreconditionError("flow " + std::to_string(flow) + " is not quarantined");
  if (iot_gw_.lifecycle != GatewayLifecycle::Ready || !holds_all(iot_gw_, flow)) {
    throw PreconditionError("serving gateway lacks the contexts of flow " + std::to_string(flow));
  }
  std::size_t new_blocks = 0;
  for (UeId ue : block) {
    if (ue >= contexts_.size() || contexts_[ue].flow != flow) {
      throw PreconditionError("UE " + std::to_string(ue) + " does not belong to flow " + std::to_string(flow));
    }
    if (!rules_.contains({FlowRuleTable::Kind::UeBlock, ue})) ++new_blocks;
  }
  // Drop rules go in before the redirect is removed.
  if (rules_.size() + new_blocks > rules_.capacity()) {
    throw CapacityError("no room for " + std::to_string(new_blocks) + " drop rules");
  }

  ReassignmentResult result;
  const std::string flow_name = "flow:" + std::to_string(flow);
  emit(result, flow_name, "reconfigure_start");
  run_stage(result, Stage::Reconfigure, timings, rng);
  for (UeId ue : block) {
    rules_.install({FlowRuleTable::Kind::UeBlock, ue}, FlowRuleTable::Action::Drop);
    contexts_[ue].blocked = true;
  }
  rules_.remove({FlowRuleTable::Kind::FlowRedirect, flow});
  for (UeId ue : members_[flow]) {
    contexts_[ue].current_slice = SliceId::Iot;
    if (provisioning_ != ReassignmentMode::ProactiveReplicated) {
      quarantine_gw_.held_contexts.erase(ue);
      contexts_[ue].context_present_on.erase(SliceId::Quarantine);
    }
  }
  emit(result, flow_name, "reconfigure_end");
  for (UeId ue : block) emit(result, "ue:" + std::to_string(ue), "blocked");
  emit(result, flow_name, "released");
  return result;
}

void SliceController::decommission_quarantine_gateway() {
  if (quarantine_gw_.lifecycle != GatewayLifecycle::Ready) {
    throw PreconditionError("quarantine gateway is not running");
  }
  if (quarantined_flows() > 0) throw PreconditionError("quarantine gateway still serves flows");
  for (UeId ue : quarantine_gw_.held_contexts) contexts_[ue].context_present_on.erase(SliceId::Quarantine);
  quarantine_gw_.held_contexts.clear();
  quarantine_gw_.lifecycle = GatewayLifecycle::NotDeployed;
  ReassignmentResult scratch;
  emit(scratch, "gateway:" + quarantine_gw_.id, "decommissioned");
}

void SliceController::check_continuity() const {
  if (rules_.size() > rules_.capacity()) throw PreconditionError("flow table over capacity");
  for (FlowId f = 0; f < members_.size(); ++f) {
    const auto target = rules_.flow_target(f);
    if (!target) throw PreconditionError("flow " + std::to_string(f) + " has no forwarding rule");
    const SliceId slice = *target == FlowRuleTable::Action::ToQuarantineGateway ? SliceId::Quarantine : SliceId::Iot;
    const GatewayNode& g = gateway(slice);
    if (g.lifecycle != GatewayLifecycle::Ready) {
      throw PreconditionError("flow " + std::to_string(f) + " forwards to a gateway that is not ready");
    }
    for (UeId ue : members_[f]) {
      if (!g.held_contexts.contains(ue)) {
        throw PreconditionError("flow " + std::to_string(f) + " forwards UE " + std::to_string(ue) +
                                " to a gateway without its context");
      }
      const auto& ctx = contexts_[ue];
      if (ctx.current_slice != slice || !ctx.context_present_on.contains(slice)) {
        throw PreconditionError("UE " + std::to_string(ue) + " slice bookkeeping disagrees with the rule table");
      }
    }
  }
}

// ---- studies ----------------------------------------------------------------

StageTiming summarize(std::vector<double> samples) {
  if (samples.empty()) throw InvalidInput("no samples to summarize");
  std::sort(samples.begin(), samples.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    return samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
  };
  double sum = 0.0;
  for (double s : samples) sum += s;
  return {sum / static_cast<double>(samples.size()), quantile(0.5), samples.front(), samples.back(), quantile(0.95)};
}

ReassignmentStudy run_reassignment_study(ReassignmentMode mode, const ReassignmentTimings& timings,
                                         std::size_t repetitions, Rng& rng) {
  timings.validate();
  if (repetitions < 1) throw InvalidInput("need at least one repetition");
  ReassignmentStudy study;
  const std::size_t one_ue[] = {1};
  for (std::size_t r = 0; r < repetitions; ++r) {
    SliceController controller(one_ue, mode);
    const auto moved = controller.quarantine_flow(0, mode, timings, rng);
    if (r == 0) {
      for (const auto& s : moved.stages) study.stages.push_back(s.stage);
      study.stage_ms.resize(study.stages.size());
    }
    for (std::size_t i = 0; i < moved.stages.size(); ++i) study.stage_ms[i].push_back(moved.stages[i].duration_ms);
    study.total_ms.push_back(moved.latency_ms);
    study.release_ms.push_back(controller.release_flow(0, timings, rng).latency_ms);
  }
  return study;
}

// ---- closed loop ------------------------------------------------------------

NoisyClassifier::NoisyClassifier(double accuracy, double delay_ms) : accuracy_(accuracy), delay_(delay_ms) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw InvalidInput("classifier accuracy must lie in [0, 1]");
  if (!(delay_ms >= 0.0)) throw InvalidInput("classifier delay must be non-negative");
}

bool NoisyClassifier::judge_malicious(const Device& device, Rng& rng) {
  const bool correct = std::bernoulli_distribution(accuracy_)(rng);
  return correct ? device.malicious : !device.malicious;
}

ClosedLoopResult run_closed_loop(const ScenarioParams& params, const ClosedLoopConfig& config,
                                 SecondStageClassifier& second_stage, Rng& rng) {
  params.validate();
  std::vector<FlowPopulation> flows;
  for (std::size_t f = 0; f < config.flows; ++f) flows.push_back(sample_population(params, rng));
  return run_closed_loop(flows, params, config, second_stage, rng);
}

namespace {

enum class FlowStatus { Monitored, Busy };

struct LoopEvent {
  enum Kind { WindowEnd, InspectionDone, ControllerFree } kind;
  double time_ms;
  std::uint64_t seq;
  std::size_t arg;

  bool operator>(const LoopEvent& o) const {
    return time_ms != o.time_ms ? time_ms > o.time_ms : seq > o.seq;
  }
};

struct Job {
  bool release;
  FlowId flow;
  std::vector<UeId> block;
};

class ClosedLoop {
 public:
  ClosedLoop(const std::vector<FlowPopulation>& flows, const ScenarioParams& params, const ClosedLoopConfig& config,
             SecondStageClassifier& second_stage, Rng& rng)
      : flows_(flows),
        params_(params),
        config_(config),
        second_stage_(second_stage),
        rng_(rng),
        threshold_(params.threshold_ratio),
        controller_(sizes(flows), config.mode, config.rule_capacity),
        status_(flows.size(), FlowStatus::Monitored),
        monitor_from_(flows.size(), 0.0),
        flag_time_(flows.size(), 0.0),
        window_ms_(params.sampling_period_s * 1000.0) {
    for (FlowId f = 0; f < flows.size(); ++f) {
      const auto& members = controller_.flow_members(f);
      for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& d = flows[f].devices[i];
        result_.devices.push_back({members[i], f, d.type_index, d.malicious, 0, 0.0, std::nullopt});
      }
    }
    result_.rule_occupancy.push_back({0.0, controller_.rules().size()});
    controller_.set_observer([this](const SliceController& c, const TraceEvent& e) {
      result_.trace.push_back(e);
      if (c.rules().size() != result_.rule_occupancy.back().rules) {
        result_.rule_occupancy.push_back({e.time_ms, c.rules().size()});
      }
    });
  }

  ClosedLoopResult run() {
    if (window_ms_ <= config_.duration_ms) push(LoopEvent::WindowEnd, window_ms_, 0);
    while (!events_.empty()) {
      const LoopEvent ev = events_.top();
      events_.pop();
      switch (ev.kind) {
        case LoopEvent::WindowEnd: on_window(ev.arg, ev.time_ms); break;
        case LoopEvent::InspectionDone: on_inspection(ev.arg, ev.time_ms); break;
        case LoopEvent::ControllerFree: free_pending_ = false; break;
      }
      dispatch(ev.time_ms);
    }
    std::stable_sort(result_.trace.begin(), result_.trace.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.time_ms < b.time_ms; });
    return std::move(result_);
  }

 private:
  static std::vector<std::size_t> sizes(const std::vector<FlowPopulation>& flows) {
    std::vector<std::size_t> s;
    for (const auto& f : flows) s.push_back(f.devices.size());
    return s;
  }

  void push(LoopEvent::Kind kind, double t, std::size_t arg) { events_.push({kind, t, seq_++, arg}); }

  void note(double t, std::string entity, std::string kind, std::string detail = {}) {
    result_.trace.push_back({t, std::move(entity), std::move(kind), std::move(detail)});
  }

  DeviceTimeline& timeline(UeId ue) { return result_.devices[ue]; }

  void on_window(std::size_t k, double end) {
    const double start = end - window_ms_;
    for (FlowId f = 0; f < flows_.size(); ++f) {
      if (status_[f] != FlowStatus::Monitored || start < monitor_from_[f]) continue;
      double measured = 0.0, expected = 0.0;
      const auto& members = controller_.flow_members(f);
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (controller_.context(members[i]).blocked) continue;
        const auto& d = flows_[f].devices[i];
        const auto& spec = params_.catalog.type(d.type_index);
        const double bits = static_cast<double>(spec.frame_size_bytes) * 8.0;
        measured += static_cast<double>(frames_between(effective_period_ms(d, params_), d.phase_ms, start, end)) * bits;
        expected += bits * window_ms_ / spec.transmission_period_ms;
      }
      if (expected > 0.0 && threshold_.exceeded(measured, expected)) {
        status_[f] = FlowStatus::Busy;
        flag_time_[f] = end;
        note(end, "flow:" + std::to_string(f), "flagged", std::to_string(measured / expected));
        jobs_.push_back({false, f, {}});
      }
    }
    const double next = end + window_ms_;
    if (next <= config_.duration_ms) push(LoopEvent::WindowEnd, next, k + 1);
  }

  void on_inspection(FlowId f, double t) {
    std::vector<UeId> block;
    const auto& members = controller_.flow_members(f);
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (controller_.context(members[i]).blocked) continue;
      if (second_stage_.judge_malicious(flows_[f].devices[i], rng_)) block.push_back(members[i]);
    }
    note(t, "flow:" + std::to_string(f), "inspected", std::to_string(block.size()) + " malicious");
    jobs_.push_back({true, f, std::move(block)});
  }

  void dispatch(double t) {
    while (!jobs_.empty() && controller_.now() <= t) {
      controller_.advance_to(t);
      Job job = std::move(jobs_.front());
      jobs_.pop_front();
      if (job.release) {
        run_release(job);
      } else {
        run_quarantine(job.flow);
      }
    }
    if (!jobs_.empty() && !free_pending_) {
      free_pending_ = true;
      push(LoopEvent::ControllerFree, controller_.now(), 0);
    }
  }

  ReassignmentMode effective_mode() const {
    if (config_.mode == ReassignmentMode::Reactive &&
        controller_.gateway(SliceId::Quarantine).lifecycle == GatewayLifecycle::Ready) {
      return ReassignmentMode::ProactiveDeployed;
    }
    return config_.mode;
  }

  void run_quarantine(FlowId f) {
    try {
      controller_.quarantine_flow(f, effective_mode(), config_.timings, rng_);
    } catch (const CapacityError& e) {
      ++result_.dropped_actions;
      note(controller_.now(), "flow:" + std::to_string(f), "dropped_action", e.what());
      status_[f] = FlowStatus::Monitored;
      monitor_from_[f] = controller_.now();
      return;
    }
    ++result_.quarantines;
    for (UeId ue : controller_.flow_members(f)) ++timeline(ue).times_quarantined;
    push(LoopEvent::InspectionDone, controller_.now() + second_stage_.delay_ms(), f);
  }

  void run_release(const Job& job) {
    const FlowId f = job.flow;
    try {
      controller_.release_flow(f, config_.timings, rng_, job.block);
    } catch (const CapacityError& e) {
      ++result_.dropped_actions;
      note(controller_.now(), "flow:" + std::to_string(f), "dropped_action", e.what());
      const double retry = controller_.now() + second_stage_.delay_ms();
      if (retry <= config_.duration_ms) push(LoopEvent::InspectionDone, retry, f);
      return;
    }
    ++result_.releases;
    const double now = controller_.now();
    for (UeId ue : controller_.flow_members(f)) {
      auto& tl = timeline(ue);
      if (tl.blocked_at_ms) continue;
      tl.quarantine_dwell_ms += now - flag_time_[f];
    }
    for (UeId ue : job.block) timeline(ue).blocked_at_ms = now;
    status_[f] = FlowStatus::Monitored;
    monitor_from_[f] = now;
    if (config_.mode == ReassignmentMode::Reactive && controller_.quarantined_flows() == 0) {
      controller_.decommission_quarantine_gateway();
    }
  }

  const std::vector<FlowPopulation>& flows_;
  const ScenarioParams& params_;
  const ClosedLoopConfig& config_;
  SecondStageClassifier& second_stage_;
  Rng& rng_;
  FlowThreshold threshold_;
  SliceController controller_;
  std::vector<FlowStatus> status_;
  std::vector<double> monitor_from_;
  std::vector<double> flag_time_;
  double window_ms_;
  std::priority_queue<LoopEvent, std::vector<LoopEvent>, std::greater<>> events_;
  std::deque<Job> jobs_;
  bool free_pending_ = false;
  std::uint64_t seq_ = 0;
  ClosedLoopResult result_;
};

}  // namespace

ClosedLoopResult run_closed_loop(const std::vector<FlowPopulation>& flows, const ScenarioParams& params,
                                 const ClosedLoopConfig& config, SecondStageClassifier& second_stage, Rng& rng) {
  params.validate();
  config.timings.validate();
  if (!(config.duration_ms > 0.0)) throw InvalidInput("closed loop duration must be positive");
  for (const auto& f : flows) {
    for (const auto& d : f.devices) {
      if (d.type_index >= params.catalog.size()) throw InvalidInput("device type outside the catalog");
    }
  }
  return ClosedLoop(flows, params, config, second_stage, rng).run();
}

void write_trace_jsonl(std::ostream& out, std::span<const TraceEvent> trace) {
  for (const auto& e : trace) {
    nlohmann::json j{{"t_ms", e.time_ms}, {"entity", e.entity}, {"event", e.kind}};
    if (!e.detail.empty()) j["detail"] = e.detail;
    out << j.dump() << '\n';
  }
}

void write_timeline_csv(std::ostream& out, const ClosedLoopResult& result) {
  out << "ue,flow,type,malicious,times_quarantined,quarantine_dwell_ms,blocked_at_ms\n";
  for (const auto& d : result.devices) {
    out << d.ue << ',' << d.flow << ',' << d.type_index << ',' << (d.malicious ? 1 : 0) << ',' << d.times_quarantined
        << ',' << d.quarantine_dwell_ms << ',';
    if (d.blocked_at_ms) out << *d.blocked_at_ms;
    out << '\n';
  }
}

void write_occupancy_csv(std::ostream& out, const ClosedLoopResult& result) {
  out << "t_ms,rules\n";
  for (const auto& s : result.rule_occupancy) out << s.time_ms << ',' << s.rules << '\n';
}

}  // namespace qslice
