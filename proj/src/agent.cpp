#include "psm/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "psm/rng.hpp"

namespace psm {

namespace {

using nlohmann::json;

double log_sigmoid(double z) {
  // log(sigmoid(z)) computed stably for both signs.
  if (z >= 0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

void validate(const TrainConfig& cfg) {
  if (cfg.gamma < 0 || cfg.gamma > 1) throw std::invalid_argument("gamma must be in [0,1]");
  if (cfg.learning_rate <= 0) throw std::invalid_argument("learning_rate must be > 0");
  if (cfg.rollout_length < 1) throw std::invalid_argument("rollout_length must be >= 1");
  if (std::abs(cfg.alpha + cfg.beta - 1.0) > 1e-12) {
    throw std::invalid_argument("alpha + beta must equal 1");
  }
}

}  // namespace

NetworkParams init_params(std::uint64_t seed, const NetConfig& cfg) {
  return NetworkParams::init(cfg, seed);
}

RolloutTargets compute_targets(const NetworkParams& params, const Rollout& rollout,
                               const TrainConfig& cfg) {
  if (rollout.steps.empty()) throw std::invalid_argument("empty rollout");
  const auto n = static_cast<Eigen::Index>(rollout.steps.size());
  RolloutTargets targets;
  targets.returns.resize(n);
  targets.advantages.resize(n);
  Eigen::VectorXd values(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    values(k) = forward_critic(params, rollout.steps[static_cast<std::size_t>(k)].features);
    for (bool m : rollout.steps[static_cast<std::size_t>(k)].mask) {
      if (!m) ++targets.unmasked;
    }
  }
  double g = rollout.terminal
                 ? 0.0
                 : forward_critic(params, rollout.bootstrap_features);
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    g = rollout.steps[static_cast<std::size_t>(k)].reward + cfg.gamma * g;
    targets.returns(k) = g;
    targets.advantages(k) = g - values(k);
  }
  return targets;
}

std::pair<double, double> rollout_loss(const NetworkParams& params,
                                       const Rollout& rollout,
                                       const RolloutTargets& targets,
                                       Eigen::VectorXd* grad) {
  const auto n = static_cast<Eigen::Index>(rollout.steps.size());
  const double inv_steps = 1.0 / static_cast<double>(n);
  const double inv_unmasked =
      targets.unmasked > 0 ? 1.0 / static_cast<double>(targets.unmasked) : 0.0;
  double actor_loss = 0;
  double critic_loss = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const TransitionRec& step = rollout.steps[static_cast<std::size_t>(k)];
    ForwardCache cache;
    const ForwardResult out = forward(params, step.features, grad ? &cache : nullptr);
    const double advantage = targets.advantages(k);
    const double td = targets.returns(k) - out.value;
    critic_loss += td * td * inv_steps;
    Eigen::VectorXd dlogits = Eigen::VectorXd::Zero(out.logits.size());
    for (Eigen::Index i = 0; i < out.logits.size(); ++i) {
      if (step.mask[static_cast<std::size_t>(i)]) continue;
      const int a = step.action[static_cast<std::size_t>(i)];
      const double z = out.logits(i);
      const double logp = a == 1 ? log_sigmoid(z) : log_sigmoid(-z);
      actor_loss -= logp * advantage * inv_unmasked;
      // d(-logpi*A)/dz = -A * (a - p)
      dlogits(i) = -advantage * inv_unmasked *
                   (static_cast<double>(a) - out.probs(i));
    }
    if (grad) {
      const double dvalue = -2.0 * td * inv_steps;
      backward(params, cache, dlogits, dvalue, *grad);
    }
  }
  return {actor_loss, critic_loss};
}

UpdateStats a2c_update(NetworkParams& params, const Rollout& rollout,
                       const TrainConfig& cfg, OptimizerState* opt) {
  validate(cfg);
  const RolloutTargets targets = compute_targets(params, rollout, cfg);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
  auto [actor_loss, critic_loss] = rollout_loss(params, rollout, targets, &grad);

  UpdateStats stats;
  stats.actor_loss = actor_loss;
  stats.critic_loss = critic_loss;
  stats.grad_norm_pre_clip = grad.norm();
  double reward_sum = 0;
  for (const TransitionRec& s : rollout.steps) reward_sum += s.reward;
  stats.mean_reward = reward_sum / static_cast<double>(rollout.steps.size());

  if (stats.grad_norm_pre_clip > cfg.grad_clip_norm && stats.grad_norm_pre_clip > 0) {
    grad *= cfg.grad_clip_norm / stats.grad_norm_pre_clip;
  }
  if (cfg.optimizer == "adam" && opt != nullptr) {
    if (opt->adam_m.size() != params.size()) {
      opt->adam_m = Eigen::VectorXd::Zero(params.size());
      opt->adam_v = Eigen::VectorXd::Zero(params.size());
      opt->step = 0;
    }
    ++opt->step;
    opt->adam_m = cfg.adam_beta1 * opt->adam_m + (1 - cfg.adam_beta1) * grad;
    opt->adam_v = cfg.adam_beta2 * opt->adam_v.array().matrix() +
                  (1 - cfg.adam_beta2) * grad.array().square().matrix();
    const double bc1 = 1 - std::pow(cfg.adam_beta1, static_cast<double>(opt->step));
    const double bc2 = 1 - std::pow(cfg.adam_beta2, static_cast<double>(opt->step));
    params.flat().array() -=
        cfg.learning_rate * (opt->adam_m.array() / bc1) /
        ((opt->adam_v.array() / bc2).sqrt() + cfg.adam_epsilon);
  } else {
    params.flat() -= cfg.learning_rate * grad;
  }
  return stats;
}

double gradient_check(const NetworkParams& params, const Rollout& rollout,
                      const TrainConfig& cfg, double epsilon, int coords,
                      std::uint64_t seed,
                      const std::function<void(const NetworkParams&, Eigen::VectorXd&)>&
                          corrupt) {
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be > 0");
  const RolloutTargets targets = compute_targets(params, rollout, cfg);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
  rollout_loss(params, rollout, targets, &grad);
  if (corrupt) corrupt(params, grad);

  Rng rng = Rng::stream(seed, 0xFD);
  std::set<Eigen::Index> picked;
  while (static_cast<int>(picked.size()) < coords &&
         static_cast<Eigen::Index>(picked.size()) < params.size()) {
    picked.insert(rng.uniform_int(0, params.size() - 1));
  }

  NetworkParams probe = params;
  double max_rel = 0;
  for (Eigen::Index idx : picked) {
    const double original = probe.flat()(idx);
    probe.flat()(idx) = original + epsilon;
    auto [ap, cp] = rollout_loss(probe, rollout, targets, nullptr);
    probe.flat()(idx) = original - epsilon;
    auto [am, cm] = rollout_loss(probe, rollout, targets, nullptr);
    probe.flat()(idx) = original;
    const double fd = ((ap + cp) - (am + cm)) / (2 * epsilon);
    const double an = grad(idx);
    const double rel =
        std::abs(fd - an) / std::max({1e-3, std::abs(fd), std::abs(an)});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

StageLog train_stage(NetworkParams& params, const std::string& label,
                     const WorkloadTrace& trace, const SimConfig& sim_config,
                     const TrainConfig& cfg, OptimizerState* opt,
                     std::uint64_t stage_index) {
  validate(cfg);
  for (const JobSpec& job : trace.jobs) {
    if (job.requested_nodes > sim_config.node_count) {
      throw std::invalid_argument("job " + std::to_string(job.id) +
                                  " exceeds the cluster size, cannot train");
    }
  }
  StageLog log;
  log.label = label;
  const std::vector<WorkloadTrace> episodes =
      make_episodes(trace, cfg.episode_segment_seconds);
  for (int epoch = 0; epoch < cfg.epochs_per_stage; ++epoch) {
    Rng rng = Rng::stream(cfg.seed, (stage_index << 20) ^
                                        (static_cast<std::uint64_t>(epoch) + 1));
    EpochLog elog;
    elog.epoch = epoch;
    double reward_sum = 0;
    std::int64_t reward_count = 0;
    for (const WorkloadTrace& episode : episodes) {
      Environment env(episode, sim_config, cfg.alpha, cfg.beta);
      Eigen::MatrixXd features = env.reset();
      bool done = env.done();
      Rollout rollout;
      while (!done) {
        TransitionRec rec;
        rec.features = features;
        rec.mask = env.current_mask();
        const Eigen::VectorXd probs = forward_actor(params, features, rec.mask);
        rec.action.resize(static_cast<std::size_t>(probs.size()));
        for (Eigen::Index i = 0; i < probs.size(); ++i) {
          rec.action[static_cast<std::size_t>(i)] = rng.bernoulli(probs(i)) ? 1 : 0;
        }
        EnvStep step = env.step(rec.action);
        rec.reward = step.reward.reward;
        rec.done = step.done;
        reward_sum += rec.reward;
        ++reward_count;
        features = step.features;
        done = step.done;
        rollout.steps.push_back(std::move(rec));
        if (static_cast<int>(rollout.steps.size()) >= cfg.rollout_length || done) {
          rollout.terminal = done;
          rollout.bootstrap_features = features;
          const UpdateStats stats = a2c_update(params, rollout, cfg, opt);
          elog.actor_loss += stats.actor_loss;
          elog.critic_loss += stats.critic_loss;
          elog.grad_norm += stats.grad_norm_pre_clip;
          ++elog.updates;
          rollout = Rollout{};
        }
      }
      elog.wasted_energy += env.runner().state().totals.wasted_energy;
      ++elog.episodes;
    }
    if (elog.updates > 0) {
      elog.actor_loss /= elog.updates;
      elog.critic_loss /= elog.updates;
      elog.grad_norm /= elog.updates;
    }
    elog.mean_reward = reward_count > 0 ? reward_sum / static_cast<double>(reward_count) : 0;
    log.epochs.push_back(elog);
  }
  return log;
}

std::vector<StageLog> train_curriculum(NetworkParams& params,
                                       const CurriculumPlan& plan,
                                       const SimConfig& sim_config,
                                       const TrainConfig& cfg,
                                       const std::string& checkpoint_dir) {
  if (plan.stages.empty() || plan.stages.size() > 3) {
    throw std::invalid_argument("curriculum needs 1 to 3 stages");
  }
  std::set<std::string> labels;
  for (const CurriculumStage& stage : plan.stages) {
    if (!labels.insert(stage.label).second) {
      throw std::invalid_argument("curriculum stage labels must be distinct");
    }
  }
  std::vector<StageLog> logs;
  OptimizerState opt;
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const CurriculumStage& stage = plan.stages[i];
    logs.push_back(train_stage(params, stage.label, stage.trace, sim_config, cfg,
                               &opt, i));
    if (!checkpoint_dir.empty()) {
      save_checkpoint(checkpoint_dir + "/stage_" + std::to_string(i + 1) + "_" +
                          stage.label + ".ckpt",
                      params, cfg);
    }
  }
  return logs;
}

namespace {

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"learning_rate", cfg.learning_rate},
              {"gamma", cfg.gamma},
              {"grad_clip_norm", cfg.grad_clip_norm},
              {"rollout_length", cfg.rollout_length},
              {"alpha", cfg.alpha},
              {"beta", cfg.beta},
              {"epochs_per_stage", cfg.epochs_per_stage},
              {"seed", cfg.seed},
              {"optimizer", cfg.optimizer},
              {"adam_beta1", cfg.adam_beta1},
              {"adam_beta2", cfg.adam_beta2},
              {"adam_epsilon", cfg.adam_epsilon},
              {"episode_segment_seconds", cfg.episode_segment_seconds},
              {"net",
               {{"input_dim", cfg.net.input_dim},
                {"embed_dim", cfg.net.embed_dim},
                {"num_heads", cfg.net.num_heads},
                {"num_blocks", cfg.net.num_blocks},
                {"ffn_mult", cfg.net.ffn_mult},
                {"ln_epsilon", cfg.net.ln_epsilon},
                {"head_gain", cfg.net.head_gain}}}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.grad_clip_norm = j.value("grad_clip_norm", cfg.grad_clip_norm);
  cfg.rollout_length = j.value("rollout_length", cfg.rollout_length);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.epochs_per_stage = j.value("epochs_per_stage", cfg.epochs_per_stage);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.optimizer = j.value("optimizer", cfg.optimizer);
  cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
  cfg.adam_epsilon = j.value("adam_epsilon", cfg.adam_epsilon);
  cfg.episode_segment_seconds =
      j.value("episode_segment_seconds", cfg.episode_segment_seconds);
  if (j.contains("net")) {
    const json& n = j["net"];
    cfg.net.input_dim = n.value("input_dim", cfg.net.input_dim);
    cfg.net.embed_dim = n.value("embed_dim", cfg.net.embed_dim);
    cfg.net.num_heads = n.value("num_heads", cfg.net.num_heads);
    cfg.net.num_blocks = n.value("num_blocks", cfg.net.num_blocks);
    cfg.net.ffn_mult = n.value("ffn_mult", cfg.net.ffn_mult);
    cfg.net.ln_epsilon = n.value("ln_epsilon", cfg.net.ln_epsilon);
    cfg.net.head_gain = n.value("head_gain", cfg.net.head_gain);
  }
  return cfg;
}

constexpr char kCheckpointMagic[8] = {'P', 'S', 'M', 'C', 'K', 'P', 'T', '1'};

}  // namespace

void save_checkpoint(const std::string& path, const NetworkParams& params,
                     const TrainConfig& cfg) {
  json header;
  header["version"] = 1;
  header["train_config"] = train_config_to_json(cfg);
  header["tensors"] = json::array();
  for (const TensorSpec& s : params.specs()) {
    header["tensors"].push_back(
        {{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}, {"offset", s.offset}});
  }
  header["param_count"] = params.size();
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint64_t head_len = head.size();
  out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  // Parameters as little-endian IEEE doubles (the only supported host layout).
  out.write(reinterpret_cast<const char*>(params.flat().data()),
            static_cast<std::streamsize>(sizeof(double)) * params.size());
  if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

std::pair<NetworkParams, TrainConfig> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  std::uint64_t head_len = 0;
  in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len));
  if (!in || head_len > (1u << 20)) throw std::runtime_error("corrupt checkpoint header");
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  const json header = json::parse(head);
  if (header.value("version", 0) != 1) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  const TrainConfig cfg = train_config_from_json(header["train_config"]);
  NetworkParams params(cfg.net);
  const auto expected = header.value("param_count", static_cast<Eigen::Index>(0));
  if (expected != params.size()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.specs().size(); ++i) {
    const TensorSpec& s = params.specs()[i];
    const json& t = header["tensors"][i];
    if (t.value("name", "") != s.name || t.value("rows", -1) != s.rows ||
        t.value("cols", -1) != s.cols) {
      throw std::runtime_error("checkpoint tensor layout mismatch at " + s.name);
    }
  }
  in.read(reinterpret_cast<char*>(params.flat().data()),
          static_cast<std::streamsize>(sizeof(double)) * params.size());
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return {std::move(params), cfg};
}

}  // namespace psm
