#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "psm/simcore.hpp"

namespace psm {

// Normalization constants for the 11-column observation. Times are divided by
// the action interval and clamped, energies by the full-interval all-active
// waste M*p1*dt, cumulative switching time by one on+off round trip with a
// 100-transition cap. All clamps keep every entry finite and of similar scale.
struct FeatureConfig {
  double queue_divisor = 64.0;
  double rate_reference = 1.0 / 60.0;  // one arrival per minute
  double time_clamp = 10.0;
  double energy_clamp = 10.0;
  double switching_clamp = 100.0;
  // Column 7 reads "flag for idling": 1 for an Active node with no job. The
  // alternative literal reading (active AND computing) is kept as an option.
  bool idle_flag_means_not_computing = true;
};

struct RewardTerms {
  double r1 = 0;  // wasted joules over the interval
  double r2 = 0;  // queued job-seconds over the interval
  double j = 0;   // dt * distinct queued jobs
  double reward = 0;
};

// M x 11 observation, unnormalized. Columns: queue length, arrival rate,
// mean queue wait, cumulative wasted energy, mean requested runtime of queued
// jobs, node state code, idle flag, idle time, release time, node wasted
// energy, node switching time. Columns 0-4 repeat across rows.
Eigen::MatrixXd observe_raw(const ClusterState& state, int window_arrivals);

Eigen::MatrixXd normalize_features(const Eigen::MatrixXd& raw,
                                   const SimConfig& config,
                                   const FeatureConfig& fc = {});

Eigen::MatrixXd observe(const ClusterState& state, int window_arrivals,
                        const FeatureConfig& fc = {});

// Reward over the interval between two consecutive snapshots.
RewardTerms compute_reward(const StepSnapshot& at_k, const StepSnapshot& at_k1,
                           double alpha, double beta, const SimConfig& config);

// Per-node action mask: true when the node cannot act this step (computing,
// reserved for the queue head, or mid-transition), so its log-probability is
// excluded from the actor objective.
std::vector<bool> action_mask(const ClusterState& state);

struct EnvStep {
  Eigen::MatrixXd features;
  RewardTerms reward;
  bool done = false;
  std::vector<bool> mask;  // mask that applied to the action just taken
};

// MDP wrapper: observe at k*dt, act, advance dt, reward for the interval.
class Environment {
 public:
  Environment(WorkloadTrace trace, SimConfig config, double alpha = 0.5,
              double beta = 0.5, FeatureConfig fc = {});

  Eigen::MatrixXd reset();
  // action[m]: 1 switches node m on, 0 switches it off.
  EnvStep step(const std::vector<int>& action);

  bool done() const { return runner_ && runner_->done(); }
  int node_count() const { return config_.node_count; }
  const EpisodeRunner& runner() const { return *runner_; }
  std::vector<bool> current_mask() const;
  const SimConfig& config() const { return config_; }

 private:
  WorkloadTrace trace_;
  SimConfig config_;
  double alpha_;
  double beta_;
  FeatureConfig fc_;
  std::unique_ptr<EpisodeRunner> runner_;
  int last_arrivals_ = 0;
};

// Splits a trace into contiguous time segments (default one week), each
// rebased to start at t = 0; empty segments are dropped.
std::vector<WorkloadTrace> make_episodes(const WorkloadTrace& trace,
                                         double segment_length = 7 * 86400.0);

}  // namespace psm
