#pragma once

#include <memory>
#include <string>

#include "psm/agent.hpp"
#include "psm/rng.hpp"
#include "psm/simcore.hpp"

namespace psm {

// Baseline with reactive wakeup: every node stays on forever.
class AlwaysOnPolicy : public PowerPolicy {
 public:
  PolicyDecision decide(const PolicyView& view) override;
};

// Switches off any node idle for at least `threshold` seconds; wake-ups are
// the reactive scheduler's job. Runs continuously (every event plus timer
// checks at upcoming threshold crossings).
class TimeoutPolicy : public PowerPolicy {
 public:
  explicit TimeoutPolicy(double threshold_seconds);
  PolicyDecision decide(const PolicyView& view) override;
  double next_check_time(const PolicyView& view) override;
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

// Training sanity baseline: independent Bernoulli(p_off) per node per step.
class RandomPolicy : public PowerPolicy {
 public:
  RandomPolicy(double p_off, std::uint64_t seed);
  bool stepped() const override { return true; }
  PolicyDecision decide(const PolicyView& view) override;

 private:
  double p_off_;
  Rng rng_;
};

// Pure single-shot form of the random baseline.
PolicyDecision random_decide(const PolicyView& view, double p_off, std::uint64_t seed);

enum class AgentMode { Sample, Greedy };

// Learned policy: observes, runs the actor, samples or thresholds at 0.5
// (ties resolve to On).
class AgentPolicy : public PowerPolicy {
 public:
  AgentPolicy(NetworkParams params, AgentMode mode = AgentMode::Greedy,
              std::uint64_t seed = 1, FeatureConfig fc = {});
  bool stepped() const override { return true; }
  PolicyDecision decide(const PolicyView& view) override;
  const NetworkParams& params() const { return params_; }

 private:
  NetworkParams params_;
  AgentMode mode_;
  Rng rng_;
  FeatureConfig fc_;
};

// Builds a policy from its CLI string: `always-on`, `timeout:<minutes>`,
// `random:<p_off>`, `agent:<checkpoint-path>`.
std::unique_ptr<PowerPolicy> parse_policy(const std::string& text,
                                          std::uint64_t seed = 1,
                                          AgentMode agent_mode = AgentMode::Greedy);

}  // namespace psm
