#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "psm/workload.hpp"

namespace psm {

struct PowerParams {
  double p_active = 190.0;      // p1, watts
  double p_sleep = 9.0;         // p2
  double p_switch_on = 190.0;   // p3
  double p_switch_off = 9.0;    // p4
  double t_switch_on = 2700.0;  // T_son, seconds (45 min)
  double t_switch_off = 1800.0; // T_soff, seconds (30 min)
};

enum class NodeState : int { Active = 0, Sleep = 1, SwitchingOn = 2, SwitchingOff = 3 };

struct Node {
  NodeState state = NodeState::Active;
  bool computing = false;
  double idle_since = 0;              // valid while Active and not computing
  double transition_complete_at = 0;  // valid while switching
  std::int64_t running_job = -1;
  double release_at = 0;  // finish time of the running job
  // Cumulative accumulators
  double wasted_energy = 0;      // joules
  double switching_seconds = 0;  // total time spent in transitions
};

enum class Intent : int { Hold = 0, On = 1, Off = 2 };

struct PolicyDecision {
  std::vector<Intent> intents;  // one per node
};

enum class IntentOutcome : int { Hold = 0, Applied = 1, Masked = 2, Noop = 3 };

struct AppliedReport {
  std::vector<IntentOutcome> outcomes;
  int applied = 0;
  int masked = 0;
};

struct RunningJob {
  JobSpec job;
  double start_time = 0;
  double finish_time = 0;
  std::vector<int> node_ids;
};

struct CompletedJob {
  JobSpec job;
  double start_time = 0;
  double finish_time = 0;
};

enum class EventKind : int {
  JobFinish = 0,
  TransitionComplete = 1,
  JobSubmit = 2,
  PolicyCheck = 3,
};

struct Event {
  double time = 0;
  EventKind kind = EventKind::PolicyCheck;
  std::int64_t key = 0;  // job id / node id / trace index, by kind

  bool operator>(const Event& other) const {
    if (time != other.time) return time > other.time;
    if (kind != other.kind) return static_cast<int>(kind) > static_cast<int>(other.kind);
    return key > other.key;
  }
};

struct EnergyTotals {
  double total_energy = 0;   // joules across all nodes and states
  double wasted_energy = 0;  // active-idle + switching energy
  double compute_node_seconds = 0;
  double sleep_node_seconds = 0;
  double active_idle_node_seconds = 0;
  double switch_on_node_seconds = 0;
  double switch_off_node_seconds = 0;
  std::int64_t shutdown_count = 0;
};

// Reward bookkeeping for the interval since the last action step.
struct IntervalStats {
  double queue_seconds = 0;  // integral of queue length over the interval
  int distinct_queued = 0;   // jobs that spent positive time queued
  int arrivals = 0;
  double wasted_at_start = 0;
  double total_at_start = 0;
};

enum class WakeupMode : int { Reactive = 0, Agent = 1 };

struct SimConfig {
  int node_count = 128;
  PowerParams power;
  double dt = 1800.0;  // action interval, seconds
  WakeupMode wakeup_mode = WakeupMode::Reactive;
  bool failsafe = false;            // agent mode: reactive rescue of a starved head
  double failsafe_wait = 86400.0;   // seconds the head must wait to trigger it
  std::optional<double> horizon_cap;  // default: last submit + 30 days
};

struct ClusterState {
  SimConfig config;
  double clock = 0;
  std::vector<Node> nodes;
  std::vector<JobSpec> queue;  // FCFS order
  std::vector<RunningJob> running;
  std::vector<CompletedJob> completed;
  EnergyTotals totals;
  IntervalStats interval;
  int last_interval_arrivals = 0;  // arrivals over the previous action interval
  std::vector<std::int64_t> pending_uncounted;  // queued ids not yet in distinct_queued
  std::vector<int> reserved_ids;  // nodes held for the blocked queue head
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> event_heap;
  std::vector<JobSpec> trace_jobs;  // submissions indexed by heap key
  std::size_t submitted = 0;        // count of processed submissions
  int transitions_in_flight = 0;
  bool complete = false;  // all jobs finished, queue empty
  bool finished = false;  // complete and no transition in flight
  double termination_time = 0;

  int active_idle_count() const;
  int sleeping_count() const;
  int switching_on_count() const;
};

// One record per action step. `interval_*` fields describe the interval that
// ENDED at this snapshot; reward fields are filled by the episode runner.
struct StepSnapshot {
  int step = 0;
  double time = 0;
  double cumulative_wasted = 0;
  double cumulative_total = 0;
  double interval_queue_seconds = 0;
  int interval_distinct_queued = 0;
  int interval_arrivals = 0;
  int queue_length = 0;
  double r1 = 0;
  double r2 = 0;
  double j = 0;
  double reward = 0;
};

struct SimulationResult {
  std::vector<CompletedJob> completed;
  EnergyTotals totals;
  std::vector<StepSnapshot> snapshots;
  double termination_time = 0;
  bool truncated = false;
  int failsafe_triggers = 0;
  int dropped_jobs = 0;
};

// Read-only projection handed to policies.
struct PolicyView {
  const ClusterState& state;

  double clock() const { return state.clock; }
  int node_count() const { return static_cast<int>(state.nodes.size()); }
  const Node& node(int i) const { return state.nodes[static_cast<std::size_t>(i)]; }
  bool reserved(int i) const;
  double idle_duration(int i) const;
  std::size_t queue_length() const { return state.queue.size(); }
};

class PowerPolicy {
 public:
  virtual ~PowerPolicy() = default;
  // Stepped policies act only at action-step boundaries; continuous ones run
  // after every event as well.
  virtual bool stepped() const { return false; }
  virtual PolicyDecision decide(const PolicyView& view) = 0;
  // Next instant a continuous policy wants to run with no event in between
  // (infinity when nothing is scheduled).
  virtual double next_check_time(const PolicyView& view) {
    (void)view;
    return std::numeric_limits<double>::infinity();
  }
};

ClusterState init_cluster(int node_count, const PowerParams& power);

// Validates job sizes against the cluster and queues submission events.
// Returns the number of rejected oversized jobs; each rejection is reported
// through `reject_log` when provided.
int load_trace(ClusterState& state, const WorkloadTrace& trace,
               std::vector<std::string>* reject_log = nullptr);

AppliedReport apply_power_intents(ClusterState& state,
                                  const std::vector<Intent>& intents);

std::vector<JobSpec> schedule_pass(ClusterState& state);

// On intents for the minimal set of Sleep nodes needed to serve the queue
// head once Active-idle and SwitchingOn nodes are counted.
std::vector<Intent> reactive_wakeup_intents(const ClusterState& state);

using EventHook = std::function<void(ClusterState&, const Event&)>;

// Advances the clock to `t`, processing events in (time, kind, key) order
// with a scheduling pass after every event and piecewise-constant energy
// integration between them. `hook` runs after each processed event (used for
// continuous policies); it is skipped once all jobs have completed.
std::vector<Event> advance_to(ClusterState& state, double t,
                              const EventHook& hook = {});

// Drives one full episode: policy invocations at k*dt (and continuously for
// non-stepped policies), wakeup handling per config, snapshot recording.
//
// The step cycle is advance_next() -> act(); advance_next() processes events
// up to the next k*dt boundary and records a snapshot there, act() resets the
// interval accumulators and applies the stepped decision for the new
// interval. run() interleaves both until termination. The RL environment
// calls the two primitives directly so it can observe between them.
class EpisodeRunner {
 public:
  EpisodeRunner(const WorkloadTrace& trace, PowerPolicy* policy, SimConfig config,
                double alpha = 0.5, double beta = 0.5);

  // Advances to the next action boundary (or termination/horizon), records a
  // snapshot there, and returns true while the episode is still live.
  bool advance_next();

  // Begins the next interval at the current boundary: resets interval
  // accumulators, runs the failsafe if armed, and applies `forced` (or the
  // owned stepped policy's decision) as power intents.
  void act(const PolicyDecision* forced = nullptr);

  void run();
  SimulationResult take_result();

  const ClusterState& state() const { return state_; }
  ClusterState& mutable_state() { return state_; }
  int current_step() const { return step_index_; }
  bool done() const { return done_; }
  bool truncated() const { return truncated_; }
  const StepSnapshot& last_snapshot() const { return snapshots_.back(); }
  int failsafe_triggers() const { return failsafe_triggers_; }

  // Observation hook invoked after every processed event (tests, tracing).
  void set_event_hook(EventHook hook) { event_hook_ = std::move(hook); }

 private:
  void snapshot_now();
  void run_continuous_policy();

  ClusterState state_;
  PowerPolicy* policy_;
  double alpha_;
  double beta_;
  double horizon_cap_;
  int step_index_ = 0;
  bool done_ = false;
  bool truncated_ = false;
  int failsafe_triggers_ = 0;
  int dropped_jobs_ = 0;
  std::vector<StepSnapshot> snapshots_;
  double pending_check_ = std::numeric_limits<double>::infinity();
  EventHook event_hook_;
};

SimulationResult run_episode(const WorkloadTrace& trace, PowerPolicy* policy,
                             const SimConfig& config, double alpha = 0.5,
                             double beta = 0.5);

}  // namespace psm
