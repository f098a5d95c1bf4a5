#include "psm/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psm {

namespace {

double node_power(const Node& node, const PowerParams& p) {
  switch (node.state) {
    case NodeState::Active:
      return p.p_active;
    case NodeState::Sleep:
      return p.p_sleep;
    case NodeState::SwitchingOn:
      return p.p_switch_on;
    case NodeState::SwitchingOff:
      return p.p_switch_off;
  }
  return 0;
}

// Piecewise-constant energy integration up to t1 (states only change at
// events, so this is exact).
void integrate(ClusterState& s, double t1) {
  const double dt = t1 - s.clock;
  if (dt <= 0) {
    s.clock = std::max(s.clock, t1);
    return;
  }
  const PowerParams& p = s.config.power;
  EnergyTotals& tot = s.totals;
  for (Node& node : s.nodes) {
    const double rate = node_power(node, p);
    const double joules = rate * dt;
    tot.total_energy += joules;
    switch (node.state) {
      case NodeState::Active:
        if (node.computing) {
          tot.compute_node_seconds += dt;
        } else {
          tot.active_idle_node_seconds += dt;
          tot.wasted_energy += joules;
          node.wasted_energy += joules;
        }
        break;
      case NodeState::Sleep:
        tot.sleep_node_seconds += dt;
        break;
      case NodeState::SwitchingOn:
        tot.switch_on_node_seconds += dt;
        tot.wasted_energy += joules;
        node.wasted_energy += joules;
        node.switching_seconds += dt;
        break;
      case NodeState::SwitchingOff:
        tot.switch_off_node_seconds += dt;
        tot.wasted_energy += joules;
        node.wasted_energy += joules;
        node.switching_seconds += dt;
        break;
    }
  }
  if (!s.queue.empty()) {
    s.interval.queue_seconds += static_cast<double>(s.queue.size()) * dt;
  }
  // Positive time passed: every job currently queued has now waited within
  // this interval and counts toward the distinct-queued normalizer.
  s.interval.distinct_queued += static_cast<int>(s.pending_uncounted.size());
  s.pending_uncounted.clear();
  s.clock = t1;
}

void start_job(ClusterState& s, std::size_t queue_index,
               const std::vector<int>& node_ids, std::vector<JobSpec>& started) {
  JobSpec job = s.queue[queue_index];
  RunningJob run;
  run.job = job;
  run.start_time = s.clock;
  run.finish_time = s.clock + job.runtime;
  run.node_ids = node_ids;
  for (int id : node_ids) {
    Node& node = s.nodes[static_cast<std::size_t>(id)];
    node.computing = true;
    node.running_job = job.id;
    node.release_at = run.finish_time;
  }
  s.event_heap.push(Event{run.finish_time, EventKind::JobFinish, job.id});
  s.running.push_back(std::move(run));
  s.queue.erase(s.queue.begin() + static_cast<std::ptrdiff_t>(queue_index));
  auto it = std::find(s.pending_uncounted.begin(), s.pending_uncounted.end(), job.id);
  if (it != s.pending_uncounted.end()) s.pending_uncounted.erase(it);
  started.push_back(job);
}

std::vector<int> lowest_idle_ids(const ClusterState& s, int needed) {
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(needed));
  for (std::size_t i = 0; i < s.nodes.size() && static_cast<int>(ids.size()) < needed;
       ++i) {
    const Node& node = s.nodes[i];
    if (node.state == NodeState::Active && !node.computing) {
      ids.push_back(static_cast<int>(i));
    }
  }
  return ids;
}

void process_event(ClusterState& s, const Event& ev) {
  switch (ev.kind) {
    case EventKind::JobSubmit: {
      const JobSpec& job = s.trace_jobs[static_cast<std::size_t>(ev.key)];
      s.queue.push_back(job);
      s.pending_uncounted.push_back(job.id);
      ++s.interval.arrivals;
      ++s.submitted;
      break;
    }
    case EventKind::JobFinish: {
      auto it = std::find_if(s.running.begin(), s.running.end(),
                             [&](const RunningJob& r) { return r.job.id == ev.key; });
      if (it == s.running.end()) break;
      for (int id : it->node_ids) {
        Node& node = s.nodes[static_cast<std::size_t>(id)];
        node.computing = false;
        node.running_job = -1;
        node.release_at = 0;
        node.idle_since = s.clock;
      }
      s.completed.push_back(CompletedJob{it->job, it->start_time, it->finish_time});
      s.running.erase(it);
      break;
    }
    case EventKind::TransitionComplete: {
      Node& node = s.nodes[static_cast<std::size_t>(ev.key)];
      if (node.state == NodeState::SwitchingOn) {
        node.state = NodeState::Active;
        node.computing = false;
        node.idle_since = s.clock;
      } else if (node.state == NodeState::SwitchingOff) {
        node.state = NodeState::Sleep;
      }
      --s.transitions_in_flight;
      break;
    }
    case EventKind::PolicyCheck:
      break;  // the post-event hook does the work
  }
}

void maybe_reactive_wakeup(ClusterState& s) {
  if (s.config.wakeup_mode != WakeupMode::Reactive) return;
  const std::vector<Intent> wake = reactive_wakeup_intents(s);
  if (std::find(wake.begin(), wake.end(), Intent::On) != wake.end()) {
    apply_power_intents(s, wake);
  }
}

void update_completion(ClusterState& s) {
  if (!s.complete) {
    s.complete = s.submitted == s.trace_jobs.size() && s.queue.empty() &&
                 s.running.empty();
  }
  if (s.complete && !s.finished && s.transitions_in_flight == 0) {
    s.finished = true;
    s.termination_time = s.clock;
  }
}

}  // namespace

int ClusterState::active_idle_count() const {
  int n = 0;
  for (const Node& node : nodes) {
    if (node.state == NodeState::Active && !node.computing) ++n;
  }
  return n;
}

int ClusterState::sleeping_count() const {
  int n = 0;
  for (const Node& node : nodes) {
    if (node.state == NodeState::Sleep) ++n;
  }
  return n;
}

int ClusterState::switching_on_count() const {
  int n = 0;
  for (const Node& node : nodes) {
    if (node.state == NodeState::SwitchingOn) ++n;
  }
  return n;
}

bool PolicyView::reserved(int i) const {
  return std::find(state.reserved_ids.begin(), state.reserved_ids.end(), i) !=
         state.reserved_ids.end();
}

double PolicyView::idle_duration(int i) const {
  const Node& node = state.nodes[static_cast<std::size_t>(i)];
  if (node.state != NodeState::Active || node.computing) return 0;
  return state.clock - node.idle_since;
}

ClusterState init_cluster(int node_count, const PowerParams& power) {
  if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");
  ClusterState state;
  state.config.node_count = node_count;
  state.config.power = power;
  state.nodes.resize(static_cast<std::size_t>(node_count));
  for (Node& node : state.nodes) {
    node.state = NodeState::Active;
    node.computing = false;
    node.idle_since = 0;
  }
  return state;
}

int load_trace(ClusterState& state, const WorkloadTrace& trace,
               std::vector<std::string>* reject_log) {
  int rejected = 0;
  state.trace_jobs.clear();
  state.trace_jobs.reserve(trace.jobs.size());
  for (const JobSpec& job : trace.jobs) {
    if (job.requested_nodes > static_cast<int>(state.nodes.size())) {
      ++rejected;
      if (reject_log) {
        reject_log->push_back("job " + std::to_string(job.id) + " requests " +
                              std::to_string(job.requested_nodes) +
                              " nodes, cluster has " +
                              std::to_string(state.nodes.size()));
      }
      continue;
    }
    state.event_heap.push(Event{job.submit_time, EventKind::JobSubmit,
                                static_cast<std::int64_t>(state.trace_jobs.size())});
    state.trace_jobs.push_back(job);
  }
  update_completion(state);
  return rejected;
}

AppliedReport apply_power_intents(ClusterState& state,
                                  const std::vector<Intent>& intents) {
  if (intents.size() != state.nodes.size()) {
    throw std::invalid_argument("intent vector length must equal node count");
  }
  const PowerParams& p = state.config.power;
  AppliedReport report;
  report.outcomes.resize(intents.size(), IntentOutcome::Hold);
  for (std::size_t i = 0; i < intents.size(); ++i) {
    const Intent intent = intents[i];
    if (intent == Intent::Hold) continue;
    Node& node = state.nodes[i];
    IntentOutcome outcome = IntentOutcome::Noop;
    if (node.state == NodeState::SwitchingOn || node.state == NodeState::SwitchingOff) {
      // A transition must run to completion before the node can be redirected.
      outcome = IntentOutcome::Masked;
    } else if (intent == Intent::Off) {
      const bool reserved =
          std::find(state.reserved_ids.begin(), state.reserved_ids.end(),
                    static_cast<int>(i)) != state.reserved_ids.end();
      if (node.computing || reserved) {
        outcome = IntentOutcome::Masked;
      } else if (node.state == NodeState::Active) {
        node.state = NodeState::SwitchingOff;
        node.transition_complete_at = state.clock + p.t_switch_off;
        state.event_heap.push(Event{node.transition_complete_at,
                                    EventKind::TransitionComplete,
                                    static_cast<std::int64_t>(i)});
        ++state.transitions_in_flight;
        ++state.totals.shutdown_count;
        outcome = IntentOutcome::Applied;
      }  // Off on Sleep: no-op
    } else {  // Intent::On
      if (node.state == NodeState::Sleep) {
        node.state = NodeState::SwitchingOn;
        node.transition_complete_at = state.clock + p.t_switch_on;
        state.event_heap.push(Event{node.transition_complete_at,
                                    EventKind::TransitionComplete,
                                    static_cast<std::int64_t>(i)});
        ++state.transitions_in_flight;
        outcome = IntentOutcome::Applied;
      }  // On on Active: no-op
    }
    report.outcomes[i] = outcome;
    if (outcome == IntentOutcome::Applied) ++report.applied;
    if (outcome == IntentOutcome::Masked) ++report.masked;
  }
  return report;
}

std::vector<JobSpec> schedule_pass(ClusterState& state) {
  std::vector<JobSpec> started;
  // FCFS: dispatch heads while enough Active idle nodes exist.
  while (!state.queue.empty()) {
    const int needed = state.queue.front().requested_nodes;
    std::vector<int> ids = lowest_idle_ids(state, needed);
    if (static_cast<int>(ids.size()) < needed) break;
    start_job(state, 0, ids, started);
  }
  state.reserved_ids.clear();
  if (state.queue.empty()) return started;

  // Blocked head: reserve the nodes that become free earliest. Sleep and
  // SwitchingOff nodes are not candidates; waking them is the wakeup policy's
  // responsibility.
  const JobSpec& head = state.queue.front();
  std::vector<std::pair<double, int>> avail;
  avail.reserve(state.nodes.size());
  for (std::size_t i = 0; i < state.nodes.size(); ++i) {
    const Node& node = state.nodes[i];
    if (node.state == NodeState::Active) {
      avail.emplace_back(node.computing ? node.release_at : state.clock,
                         static_cast<int>(i));
    } else if (node.state == NodeState::SwitchingOn) {
      avail.emplace_back(node.transition_complete_at, static_cast<int>(i));
    }
  }
  std::sort(avail.begin(), avail.end());
  double reservation_time = std::numeric_limits<double>::infinity();
  const auto needed = static_cast<std::size_t>(head.requested_nodes);
  if (avail.size() >= needed) {
    reservation_time = avail[needed - 1].first;
    for (std::size_t i = 0; i < needed; ++i) state.reserved_ids.push_back(avail[i].second);
  } else {
    for (const auto& [t, id] : avail) state.reserved_ids.push_back(id);
  }

  // EASY backfilling: a later job may start now iff it fits on idle nodes and
  // its walltime ends before the head's reservation.
  int idle_count = state.active_idle_count();
  std::size_t i = 1;
  while (i < state.queue.size() && idle_count > 0) {
    const JobSpec& job = state.queue[i];
    if (job.requested_nodes <= idle_count &&
        state.clock + job.walltime <= reservation_time) {
      std::vector<int> ids = lowest_idle_ids(state, job.requested_nodes);
      idle_count -= job.requested_nodes;
      start_job(state, i, ids, started);
    } else {
      ++i;
    }
  }
  return started;
}

std::vector<Intent> reactive_wakeup_intents(const ClusterState& state) {
  std::vector<Intent> intents(state.nodes.size(), Intent::Hold);
  if (state.queue.empty()) return intents;
  // Wake for the aggregate queue demand, not just the head: queued jobs boot
  // their nodes in parallel instead of serially as each reaches the head.
  int needed = 0;
  for (const JobSpec& job : state.queue) {
    needed += job.requested_nodes;
    if (needed >= static_cast<int>(state.nodes.size())) {
      needed = static_cast<int>(state.nodes.size());
      break;
    }
  }
  const int ready = state.active_idle_count() + state.switching_on_count();
  int deficit = needed - ready;
  for (std::size_t i = 0; i < state.nodes.size() && deficit > 0; ++i) {
    if (state.nodes[i].state == NodeState::Sleep) {
      intents[i] = Intent::On;
      --deficit;
    }
  }
  return intents;
}

std::vector<Event> advance_to(ClusterState& state, double t, const EventHook& hook) {
  if (state.finished) return {};
  if (t < state.clock) throw std::invalid_argument("advance_to target before clock");
  std::vector<Event> processed;
  while (!state.event_heap.empty() && state.event_heap.top().time <= t) {
    const Event ev = state.event_heap.top();
    state.event_heap.pop();
    integrate(state, ev.time);
    process_event(state, ev);
    processed.push_back(ev);
    const bool jobs_remaining = state.submitted < state.trace_jobs.size() ||
                                !state.queue.empty() || !state.running.empty();
    if (jobs_remaining) {
      // Wake sleepers for the current head, dispatch/backfill, then wake again
      // in case the pass promoted a new head that cannot be served.
      maybe_reactive_wakeup(state);
      schedule_pass(state);
      maybe_reactive_wakeup(state);
      if (hook) hook(state, ev);
    }
    update_completion(state);
    if (state.finished) return processed;
  }
  integrate(state, t);
  return processed;
}

EpisodeRunner::EpisodeRunner(const WorkloadTrace& trace, PowerPolicy* policy,
                             SimConfig config, double alpha, double beta)
    : policy_(policy), alpha_(alpha), beta_(beta) {
  if (std::abs(alpha + beta - 1.0) > 1e-12) {
    throw std::invalid_argument("reward weights must satisfy alpha + beta = 1");
  }
  state_ = init_cluster(config.node_count, config.power);
  state_.config = config;
  dropped_jobs_ = load_trace(state_, trace);
  const double last_submit = trace.jobs.empty() ? 0.0 : trace.jobs.back().submit_time;
  horizon_cap_ = config.horizon_cap.value_or(last_submit + 30.0 * 86400.0);
  // An initial scheduling pass covers jobs submitted exactly at t = 0 only
  // via the event loop; nothing runs before the first advance.
}

void EpisodeRunner::run_continuous_policy() {
  if (!policy_ || policy_->stepped() || state_.complete) return;
  const PolicyView view{state_};
  apply_power_intents(state_, policy_->decide(view).intents);
  const double next = policy_->next_check_time(PolicyView{state_});
  if (next > state_.clock && next < pending_check_ &&
      next < std::numeric_limits<double>::infinity()) {
    state_.event_heap.push(Event{next, EventKind::PolicyCheck, 0});
    pending_check_ = next;
  }
}

bool EpisodeRunner::advance_next() {
  if (done_) return false;
  const double target = static_cast<double>(step_index_) * state_.config.dt;
  const bool continuous = policy_ && !policy_->stepped();
  EventHook hook;
  if (continuous || event_hook_) {
    hook = [this, continuous](ClusterState& state, const Event& ev) {
      if (continuous) {
        if (ev.kind == EventKind::PolicyCheck && ev.time >= pending_check_) {
          pending_check_ = std::numeric_limits<double>::infinity();
        }
        run_continuous_policy();
      }
      if (event_hook_) event_hook_(state, ev);
    };
  }
  advance_to(state_, target, hook);
  run_continuous_policy();
  snapshot_now();
  if (state_.finished) {
    done_ = true;
  } else if (target >= horizon_cap_) {
    done_ = true;
    truncated_ = true;
  }
  return !done_;
}

void EpisodeRunner::snapshot_now() {
  StepSnapshot snap;
  snap.step = step_index_;
  snap.time = state_.clock;
  snap.cumulative_wasted = state_.totals.wasted_energy;
  snap.cumulative_total = state_.totals.total_energy;
  snap.interval_queue_seconds = state_.interval.queue_seconds;
  snap.interval_distinct_queued = state_.interval.distinct_queued;
  snap.interval_arrivals = state_.interval.arrivals;
  snap.queue_length = static_cast<int>(state_.queue.size());
  if (step_index_ > 0) {
    const SimConfig& cfg = state_.config;
    snap.r1 = state_.totals.wasted_energy - state_.interval.wasted_at_start;
    snap.r2 = state_.interval.queue_seconds;
    snap.j = cfg.dt * state_.interval.distinct_queued;
    const double max_waste =
        static_cast<double>(cfg.node_count) * cfg.power.p_active * cfg.dt;
    double reward = -alpha_ * snap.r1 / max_waste;
    if (snap.j > 0) reward -= beta_ * snap.r2 / snap.j;
    snap.reward = reward;
  }
  snapshots_.push_back(snap);
}

void EpisodeRunner::act(const PolicyDecision* forced) {
  if (done_) throw std::logic_error("act() after episode end");
  state_.last_interval_arrivals = state_.interval.arrivals;
  state_.interval = IntervalStats{};
  state_.interval.wasted_at_start = state_.totals.wasted_energy;
  state_.interval.total_at_start = state_.totals.total_energy;
  state_.pending_uncounted.clear();
  for (const JobSpec& job : state_.queue) state_.pending_uncounted.push_back(job.id);

  // Once every job has completed only in-flight transitions remain; no more
  // intents are issued so the termination time stays put.
  if (!state_.complete) {
    if (state_.config.wakeup_mode == WakeupMode::Agent && state_.config.failsafe &&
        !state_.queue.empty() &&
        state_.clock - state_.queue.front().submit_time > state_.config.failsafe_wait) {
      const std::vector<Intent> wake = reactive_wakeup_intents(state_);
      if (std::find(wake.begin(), wake.end(), Intent::On) != wake.end()) {
        apply_power_intents(state_, wake);
        ++failsafe_triggers_;
      }
    }
    if (forced) {
      apply_power_intents(state_, forced->intents);
      schedule_pass(state_);
    } else if (policy_ && policy_->stepped()) {
      const PolicyDecision decision = policy_->decide(PolicyView{state_});
      apply_power_intents(state_, decision.intents);
      schedule_pass(state_);
    }
    if (state_.config.wakeup_mode == WakeupMode::Reactive) {
      const std::vector<Intent> wake = reactive_wakeup_intents(state_);
      if (std::find(wake.begin(), wake.end(), Intent::On) != wake.end()) {
        apply_power_intents(state_, wake);
      }
    }
  }
  ++step_index_;
}

void EpisodeRunner::run() {
  advance_next();
  while (!done_) {
    act();
    advance_next();
  }
}

SimulationResult EpisodeRunner::take_result() {
  SimulationResult result;
  result.completed = std::move(state_.completed);
  result.totals = state_.totals;
  result.snapshots = std::move(snapshots_);
  result.termination_time = state_.finished ? state_.termination_time : state_.clock;
  result.truncated = truncated_;
  result.failsafe_triggers = failsafe_triggers_;
  result.dropped_jobs = dropped_jobs_;
  return result;
}

SimulationResult run_episode(const WorkloadTrace& trace, PowerPolicy* policy,
                             const SimConfig& config, double alpha, double beta) {
  EpisodeRunner runner(trace, policy, config, alpha, beta);
  runner.run();
  return runner.take_result();
}

}  // namespace psm
