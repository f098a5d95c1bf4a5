#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psm/nn.hpp"
#include "psm/rlenv.hpp"
#include "psm/workload.hpp"

namespace psm {

struct TrainConfig {
  double learning_rate = 1e-5;
  double gamma = 0.99;
  double grad_clip_norm = 2.0;
  int rollout_length = 64;  // N_b
  double alpha = 0.5;
  double beta = 0.5;
  int epochs_per_stage = 10;
  std::uint64_t seed = 1;
  // Plain SGD by default; "adam" is available as an option.
  std::string optimizer = "sgd";
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double episode_segment_seconds = 7 * 86400.0;
  NetConfig net;
};

struct TransitionRec {
  Eigen::MatrixXd features;  // s_k (normalized)
  std::vector<int> action;   // a_k, 1 = on
  std::vector<bool> mask;    // nodes excluded from the actor objective
  double reward = 0;
  bool done = false;
};

struct Rollout {
  std::vector<TransitionRec> steps;
  Eigen::MatrixXd bootstrap_features;  // state after the last step
  bool terminal = false;  // episode ended inside the rollout (no bootstrap)
};

struct UpdateStats {
  double actor_loss = 0;
  double critic_loss = 0;
  double grad_norm_pre_clip = 0;
  double mean_reward = 0;
};

struct OptimizerState {
  Eigen::VectorXd adam_m;
  Eigen::VectorXd adam_v;
  std::int64_t step = 0;
};

struct EpochLog {
  int epoch = 0;
  double mean_reward = 0;
  double actor_loss = 0;
  double critic_loss = 0;
  double grad_norm = 0;
  double wasted_energy = 0;  // summed over the epoch's episodes
  int updates = 0;
  int episodes = 0;
};

struct StageLog {
  std::string label;
  std::vector<EpochLog> epochs;
};

struct CurriculumStage {
  std::string label;  // sampled | real | synthetic
  WorkloadTrace trace;
};

struct CurriculumPlan {
  std::vector<CurriculumStage> stages;  // 1 to 3, distinct labels
};

NetworkParams init_params(std::uint64_t seed, const NetConfig& cfg = {});

// Frozen learning targets for one rollout: n-step bootstrapped returns
// G_k = r_k + gamma * G_{k+1} (G_N = V(s_N), or 0 on terminal) and advantages
// A_k = G_k - V(s_k), both treated as constants by the loss.
struct RolloutTargets {
  Eigen::VectorXd returns;
  Eigen::VectorXd advantages;
  Eigen::Index unmasked = 0;  // total unmasked (step, node) pairs
};

RolloutTargets compute_targets(const NetworkParams& params, const Rollout& rollout,
                               const TrainConfig& cfg);

// Combined loss at `params` against frozen targets; accumulates the analytic
// gradient when `grad` is given. Returns (actor_loss, critic_loss).
std::pair<double, double> rollout_loss(const NetworkParams& params,
                                       const Rollout& rollout,
                                       const RolloutTargets& targets,
                                       Eigen::VectorXd* grad);

// One A2C update in place: targets, combined gradient, global-norm clip,
// single optimizer step.
UpdateStats a2c_update(NetworkParams& params, const Rollout& rollout,
                       const TrainConfig& cfg, OptimizerState* opt = nullptr);

// Central finite differences against the analytic gradient on `coords`
// randomly chosen coordinates. `corrupt` (tests only) mutates the analytic
// gradient before comparison to prove the check can fail.
double gradient_check(const NetworkParams& params, const Rollout& rollout,
                      const TrainConfig& cfg, double epsilon, int coords,
                      std::uint64_t seed,
                      const std::function<void(const NetworkParams&, Eigen::VectorXd&)>&
                          corrupt = nullptr);

StageLog train_stage(NetworkParams& params, const std::string& label,
                     const WorkloadTrace& trace, const SimConfig& sim_config,
                     const TrainConfig& cfg, OptimizerState* opt = nullptr,
                     std::uint64_t stage_index = 0);

// Runs the stages in order, carrying parameters (and optimizer state) across;
// writes a checkpoint per stage into checkpoint_dir when given.
std::vector<StageLog> train_curriculum(NetworkParams& params,
                                       const CurriculumPlan& plan,
                                       const SimConfig& sim_config,
                                       const TrainConfig& cfg,
                                       const std::string& checkpoint_dir = "");

void save_checkpoint(const std::string& path, const NetworkParams& params,
                     const TrainConfig& cfg);

std::pair<NetworkParams, TrainConfig> load_checkpoint(const std::string& path);

}  // namespace psm
