#include "psm/rlenv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psm {

Eigen::MatrixXd observe_raw(const ClusterState& state, int window_arrivals) {
  const auto m = static_cast<Eigen::Index>(state.nodes.size());
  Eigen::MatrixXd features(m, 11);
  const double clock = state.clock;
  const double queue_len = static_cast<double>(state.queue.size());
  double mean_wait = 0;
  double mean_runtime = 0;
  if (!state.queue.empty()) {
    for (const JobSpec& job : state.queue) {
      mean_wait += clock - job.submit_time;
      mean_runtime += job.walltime;
    }
    mean_wait /= queue_len;
    mean_runtime /= queue_len;
  }
  const double arrival_rate = state.config.dt > 0
                                  ? static_cast<double>(window_arrivals) / state.config.dt
                                  : 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Node& node = state.nodes[static_cast<std::size_t>(i)];
    features(i, 0) = queue_len;
    features(i, 1) = arrival_rate;
    features(i, 2) = mean_wait;
    features(i, 3) = state.totals.wasted_energy;
    features(i, 4) = mean_runtime;
    features(i, 5) = static_cast<double>(static_cast<int>(node.state));
    features(i, 6) = (node.state == NodeState::Active && !node.computing) ? 1.0 : 0.0;
    features(i, 7) = (node.state == NodeState::Active && !node.computing)
                         ? clock - node.idle_since
                         : 0.0;
    double release = 0;
    if (node.computing) {
      release = node.release_at - clock;
    } else if (node.state == NodeState::SwitchingOn ||
               node.state == NodeState::SwitchingOff) {
      release = node.transition_complete_at - clock;
    }
    features(i, 8) = release;
    features(i, 9) = node.wasted_energy;
    features(i, 10) = node.switching_seconds;
  }
  return features;
}

Eigen::MatrixXd normalize_features(const Eigen::MatrixXd& raw, const SimConfig& config,
                                   const FeatureConfig& fc) {
  Eigen::MatrixXd out = raw;
  const double dt = config.dt;
  const double max_waste =
      static_cast<double>(config.node_count) * config.power.p_active * dt;
  const double transition_span = config.power.t_switch_on + config.power.t_switch_off;
  auto clamp = [](double v, double hi) { return std::min(v, hi); };
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out(i, 0) = clamp(raw(i, 0) / fc.queue_divisor, fc.time_clamp);
    out(i, 1) = clamp(raw(i, 1) / fc.rate_reference, fc.time_clamp);
    out(i, 2) = clamp(raw(i, 2) / dt, fc.time_clamp);
    out(i, 3) = clamp(raw(i, 3) / max_waste, fc.energy_clamp);
    out(i, 4) = clamp(raw(i, 4) / dt, fc.time_clamp);
    // state code 0..3 kept as-is; idle flag already 0/1
    out(i, 7) = clamp(raw(i, 7) / dt, fc.time_clamp);
    out(i, 8) = clamp(raw(i, 8) / dt, fc.time_clamp);
    out(i, 9) = clamp(raw(i, 9) / max_waste, fc.energy_clamp);
    out(i, 10) = clamp(raw(i, 10) / transition_span, fc.switching_clamp);
    if (!fc.idle_flag_means_not_computing) {
      // Literal reading of the flag: active and computing.
      const bool active = raw(i, 5) == 0.0;
      out(i, 6) = (active && raw(i, 8) > 0.0) ? 1.0 : 0.0;
    }
  }
  return out;
}

Eigen::MatrixXd observe(const ClusterState& state, int window_arrivals,
                        const FeatureConfig& fc) {
  return normalize_features(observe_raw(state, window_arrivals), state.config, fc);
}

RewardTerms compute_reward(const StepSnapshot& at_k, const StepSnapshot& at_k1,
                           double alpha, double beta, const SimConfig& config) {
  if (std::abs(alpha + beta - 1.0) > 1e-12) {
    throw std::invalid_argument("reward weights must satisfy alpha + beta = 1");
  }
  RewardTerms terms;
  terms.r1 = at_k1.cumulative_wasted - at_k.cumulative_wasted;
  terms.r2 = at_k1.interval_queue_seconds;
  terms.j = config.dt * at_k1.interval_distinct_queued;
  const double max_waste =
      static_cast<double>(config.node_count) * config.power.p_active * config.dt;
  terms.reward = -alpha * terms.r1 / max_waste;
  if (terms.j > 0) terms.reward -= beta * terms.r2 / terms.j;
  return terms;
}

std::vector<bool> action_mask(const ClusterState& state) {
  std::vector<bool> mask(state.nodes.size(), false);
  for (std::size_t i = 0; i < state.nodes.size(); ++i) {
    const Node& node = state.nodes[i];
    if (node.computing || node.state == NodeState::SwitchingOn ||
        node.state == NodeState::SwitchingOff) {
      mask[i] = true;
    }
  }
  for (int id : state.reserved_ids) mask[static_cast<std::size_t>(id)] = true;
  return mask;
}

Environment::Environment(WorkloadTrace trace, SimConfig config, double alpha,
                         double beta, FeatureConfig fc)
    : trace_(std::move(trace)),
      config_(config),
      alpha_(alpha),
      beta_(beta),
      fc_(fc) {}

Eigen::MatrixXd Environment::reset() {
  runner_ = std::make_unique<EpisodeRunner>(trace_, nullptr, config_, alpha_, beta_);
  runner_->advance_next();
  last_arrivals_ = runner_->last_snapshot().interval_arrivals;
  return observe(runner_->state(), last_arrivals_, fc_);
}

std::vector<bool> Environment::current_mask() const {
  return action_mask(runner_->state());
}

EnvStep Environment::step(const std::vector<int>& action) {
  if (!runner_) throw std::logic_error("step() before reset()");
  if (runner_->done()) throw std::logic_error("step() after episode end");
  if (action.size() != runner_->state().nodes.size()) {
    throw std::invalid_argument("action length must equal node count");
  }
  EnvStep result;
  result.mask = action_mask(runner_->state());
  PolicyDecision decision;
  decision.intents.reserve(action.size());
  for (int a : action) {
    decision.intents.push_back(a != 0 ? Intent::On : Intent::Off);
  }
  const StepSnapshot before = runner_->last_snapshot();
  runner_->act(&decision);
  runner_->advance_next();
  const StepSnapshot& after = runner_->last_snapshot();
  result.reward = compute_reward(before, after, alpha_, beta_, config_);
  result.done = runner_->done();
  last_arrivals_ = after.interval_arrivals;
  result.features = observe(runner_->state(), last_arrivals_, fc_);
  return result;
}

std::vector<WorkloadTrace> make_episodes(const WorkloadTrace& trace,
                                         double segment_length) {
  if (segment_length <= 0) throw std::invalid_argument("segment_length must be > 0");
  std::vector<WorkloadTrace> episodes;
  if (trace.jobs.empty()) return episodes;
  std::size_t i = 0;
  int segment = 0;
  while (i < trace.jobs.size()) {
    const double seg_start = segment * segment_length;
    const double seg_end = seg_start + segment_length;
    WorkloadTrace episode;
    episode.label = trace.label;
    if (trace.origin_timestamp) {
      episode.origin_timestamp =
          *trace.origin_timestamp + static_cast<std::int64_t>(seg_start);
    }
    while (i < trace.jobs.size() && trace.jobs[i].submit_time < seg_end) {
      JobSpec job = trace.jobs[i];
      job.submit_time -= seg_start;
      episode.jobs.push_back(job);
      ++i;
    }
    ++segment;
    if (!episode.jobs.empty()) episodes.push_back(std::move(episode));
  }
  return episodes;
}

}  // namespace psm
