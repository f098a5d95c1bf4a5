#include "psm/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "psm/rlenv.hpp"

namespace psm {

PolicyDecision AlwaysOnPolicy::decide(const PolicyView& view) {
  return PolicyDecision{std::vector<Intent>(
      static_cast<std::size_t>(view.node_count()), Intent::Hold)};
}

TimeoutPolicy::TimeoutPolicy(double threshold_seconds) : threshold_(threshold_seconds) {
  if (threshold_ <= 0) throw std::invalid_argument("timeout threshold must be > 0");
}

PolicyDecision TimeoutPolicy::decide(const PolicyView& view) {
  PolicyDecision decision;
  decision.intents.assign(static_cast<std::size_t>(view.node_count()), Intent::Hold);
  for (int i = 0; i < view.node_count(); ++i) {
    const Node& node = view.node(i);
    if (node.state == NodeState::Active && !node.computing && !view.reserved(i) &&
        view.idle_duration(i) >= threshold_) {
      decision.intents[static_cast<std::size_t>(i)] = Intent::Off;
    }
  }
  return decision;
}

double TimeoutPolicy::next_check_time(const PolicyView& view) {
  double next = std::numeric_limits<double>::infinity();
  for (int i = 0; i < view.node_count(); ++i) {
    const Node& node = view.node(i);
    if (node.state == NodeState::Active && !node.computing && !view.reserved(i)) {
      const double due = node.idle_since + threshold_;
      if (due > view.clock()) next = std::min(next, due);
    }
  }
  return next;
}

RandomPolicy::RandomPolicy(double p_off, std::uint64_t seed)
    : p_off_(p_off), rng_(Rng::stream(seed, 0x7A0D)) {
  if (p_off < 0 || p_off > 1) throw std::invalid_argument("p_off must be in [0,1]");
}

PolicyDecision RandomPolicy::decide(const PolicyView& view) {
  PolicyDecision decision;
  decision.intents.reserve(static_cast<std::size_t>(view.node_count()));
  for (int i = 0; i < view.node_count(); ++i) {
    decision.intents.push_back(rng_.bernoulli(p_off_) ? Intent::Off : Intent::On);
  }
  return decision;
}

PolicyDecision random_decide(const PolicyView& view, double p_off, std::uint64_t seed) {
  RandomPolicy policy(p_off, seed);
  return policy.decide(view);
}

AgentPolicy::AgentPolicy(NetworkParams params, AgentMode mode, std::uint64_t seed,
                         FeatureConfig fc)
    : params_(std::move(params)), mode_(mode), rng_(Rng::stream(seed, 0xA6E7)), fc_(fc) {}

PolicyDecision AgentPolicy::decide(const PolicyView& view) {
  const Eigen::MatrixXd features =
      observe(view.state, view.state.last_interval_arrivals, fc_);
  const std::vector<bool> mask = action_mask(view.state);
  const Eigen::VectorXd probs = forward_actor(params_, features, mask);
  PolicyDecision decision;
  decision.intents.reserve(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    bool on = true;
    if (mode_ == AgentMode::Greedy) {
      on = probs(i) >= 0.5;  // tie resolves to On
    } else {
      on = rng_.bernoulli(probs(i));
    }
    decision.intents.push_back(on ? Intent::On : Intent::Off);
  }
  return decision;
}

std::unique_ptr<PowerPolicy> parse_policy(const std::string& text, std::uint64_t seed,
                                          AgentMode agent_mode) {
  if (text == "always-on") return std::make_unique<AlwaysOnPolicy>();
  const auto colon = text.find(':');
  const std::string kind = colon == std::string::npos ? text : text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "timeout") {
    if (arg.empty()) throw std::invalid_argument("timeout policy needs minutes: timeout:<minutes>");
    const double minutes = std::stod(arg);
    return std::make_unique<TimeoutPolicy>(minutes * 60.0);
  }
  if (kind == "random") {
    if (arg.empty()) throw std::invalid_argument("random policy needs p_off: random:<p_off>");
    return std::make_unique<RandomPolicy>(std::stod(arg), seed);
  }
  if (kind == "agent") {
    if (arg.empty()) throw std::invalid_argument("agent policy needs a checkpoint: agent:<path>");
    auto [params, train_cfg] = load_checkpoint(arg);
    (void)train_cfg;
    return std::make_unique<AgentPolicy>(std::move(params), agent_mode, seed);
  }
  throw std::invalid_argument(
      "unknown policy '" + text +
      "' (expected always-on, timeout:<minutes>, random:<p_off>, agent:<path>)");
}

}  // namespace psm
