// Acceptance gate. Each criterion is a self-contained check that prints one
// pass/fail line and sets the exit code. Usage:
//   acceptance --criterion N [--cli path/to/psmsim] [--workdir dir]
// The CLI path is only needed by criterion 11; the workdir holds its files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "psm/agent.hpp"
#include "psm/experiment.hpp"
#include "psm/metrics.hpp"
#include "psm/nn.hpp"
#include "psm/policy.hpp"
#include "psm/reference.hpp"
#include "psm/rlenv.hpp"
#include "psm/rng.hpp"
#include "psm/simcore.hpp"
#include "psm/workload.hpp"
#include "support/brute_force.hpp"
#include "support/scenarios.hpp"

namespace fs = std::filesystem;
using namespace psm;

namespace {

struct Context {
  std::string cli;
  fs::path workdir = "acceptance_work";
};

bool report(int criterion, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s - %s\n", criterion, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  return ok;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: engine vs brute-force oracle on the hand-crafted scenarios.

bool criterion_1() {
  const double kTol = 1e-9;
  int scenarios = 0;
  double worst = 0;
  std::string failure;

  for (const auto& sc : testing::oracle_scenarios()) {
    std::unique_ptr<PowerPolicy> policy;
    if (sc.kind == testing::OraclePolicyKind::AlwaysOn)
      policy = std::make_unique<AlwaysOnPolicy>();
    else
      policy = std::make_unique<TimeoutPolicy>(sc.threshold);

    SimConfig config;
    config.node_count = sc.node_count;
    config.power = sc.power;
    const SimulationResult res = run_episode(sc.trace, policy.get(), config);
    const auto oracle =
        testing::brute_force_run(sc.trace, sc.node_count, sc.power, sc.kind, sc.threshold);

    worst = std::max(worst, rel_err(res.totals.total_energy, oracle.total_energy));
    worst = std::max(worst, rel_err(res.totals.wasted_energy, oracle.wasted_energy));
    worst = std::max(worst, rel_err(res.termination_time, oracle.termination_time));
    if (res.completed.size() != oracle.wait_by_job.size())
      failure = sc.name + ": completed " + std::to_string(res.completed.size()) + " vs oracle " +
                std::to_string(oracle.wait_by_job.size());
    for (const auto& c : res.completed) {
      const auto it = oracle.wait_by_job.find(c.job.id);
      if (it == oracle.wait_by_job.end()) {
        failure = sc.name + ": job " + std::to_string(c.job.id) + " missing from oracle";
        continue;
      }
      worst = std::max(worst, rel_err(c.start_time - c.job.submit_time, it->second));
    }
    ++scenarios;
  }

  const bool ok = scenarios == 10 && failure.empty() && worst <= kTol;
  std::string detail = std::to_string(scenarios) +
                       " scenarios, worst relative error " + fmt(worst) + " (tolerance 1e-9)";
  if (!failure.empty()) detail += "; " + failure;
  return report(1, ok, detail);
}

// ---------------------------------------------------------------------------
// Criteria 2-4 share one randomized episode suite: small traces, mixed
// policies and wake-up modes, varied power envelopes and intervals.

struct RandomEpisode {
  WorkloadTrace trace;
  SimConfig config;
  std::unique_ptr<PowerPolicy> policy;
};

RandomEpisode make_random_episode(Rng& rng, int index) {
  RandomEpisode ep;
  const int nodes = static_cast<int>(rng.uniform_int(1, 4));
  ep.trace = testing::random_small_trace(rng, nodes, 6);

  ep.config.node_count = nodes;
  ep.config.power.p_active = 100.0 + 20.0 * static_cast<double>(rng.uniform_int(0, 5));
  ep.config.power.p_sleep = 4.0 + static_cast<double>(rng.uniform_int(0, 8));
  ep.config.power.p_switch_on = 80.0 + 30.0 * static_cast<double>(rng.uniform_int(0, 4));
  ep.config.power.p_switch_off = 3.0 + static_cast<double>(rng.uniform_int(0, 6));
  const double on_times[] = {60, 120, 300};
  const double off_times[] = {45, 90, 240};
  ep.config.power.t_switch_on = on_times[rng.uniform_int(0, 2)];
  ep.config.power.t_switch_off = off_times[rng.uniform_int(0, 2)];
  const double dts[] = {450, 900, 1800};
  ep.config.dt = dts[rng.uniform_int(0, 2)];

  switch (index % 4) {
    case 0:
      ep.policy = std::make_unique<AlwaysOnPolicy>();
      break;
    case 1: {
      const double thresholds[] = {45, 200, 1200};
      ep.policy = std::make_unique<TimeoutPolicy>(thresholds[rng.uniform_int(0, 2)]);
      break;
    }
    case 2:
      ep.policy = std::make_unique<RandomPolicy>(rng.uniform(), 1000 + index);
      break;
    default:
      ep.policy = std::make_unique<RandomPolicy>(rng.uniform(), 2000 + index);
      ep.config.wakeup_mode = WakeupMode::Agent;
      ep.config.failsafe = true;
      ep.config.failsafe_wait = 3600;
      break;
  }
  return ep;
}

// Structural checks applied after every processed event.
struct InvariantTracker {
  std::map<std::int64_t, std::pair<double, std::vector<int>>> started;
  long violations = 0;
  std::string first;

  void note(const std::string& msg) {
    ++violations;
    if (first.empty()) first = msg;
  }

  void check(const ClusterState& state) {
    std::vector<std::int64_t> owner(state.nodes.size(), -1);
    for (const auto& run : state.running) {
      if (static_cast<int>(run.node_ids.size()) != run.job.requested_nodes)
        note("allocation size mismatch for job " + std::to_string(run.job.id));
      std::set<int> uniq(run.node_ids.begin(), run.node_ids.end());
      if (uniq.size() != run.node_ids.size())
        note("duplicate node in allocation of job " + std::to_string(run.job.id));
      for (int id : run.node_ids) {
        if (id < 0 || id >= static_cast<int>(state.nodes.size())) {
          note("node id out of range");
          continue;
        }
        if (owner[static_cast<std::size_t>(id)] != -1)
          note("node " + std::to_string(id) + " held by two jobs");
        owner[static_cast<std::size_t>(id)] = run.job.id;
        const Node& n = state.nodes[static_cast<std::size_t>(id)];
        if (n.state != NodeState::Active) note("allocated node not active");
        if (!n.computing) note("allocated node not computing");
        if (n.running_job != run.job.id) note("node/job link mismatch");
      }
      if (run.start_time + 1e-9 < run.job.submit_time)
        note("job " + std::to_string(run.job.id) + " started before submission");
      const auto it = started.find(run.job.id);
      std::vector<int> sorted_ids = run.node_ids;
      std::sort(sorted_ids.begin(), sorted_ids.end());
      if (it == started.end()) {
        started.emplace(run.job.id, std::make_pair(run.start_time, std::move(sorted_ids)));
      } else if (it->second.first != run.start_time || it->second.second != sorted_ids) {
        note("job " + std::to_string(run.job.id) + " preempted or migrated");
      }
    }
    for (std::size_t i = 0; i < state.nodes.size(); ++i) {
      const Node& n = state.nodes[i];
      if (n.computing != (owner[i] != -1)) note("computing flag disagrees with allocations");
      if (n.computing && n.state != NodeState::Active) note("computing in a non-active state");
    }
  }
};

bool criterion_2() {
  const int kEpisodes = 1000;
  Rng rng(20240817);
  InvariantTracker tracker;
  long events = 0;
  long episodes_done = 0;

  for (int i = 0; i < kEpisodes; ++i) {
    RandomEpisode ep = make_random_episode(rng, i);
    tracker.started.clear();
    EpisodeRunner runner(ep.trace, ep.policy.get(), ep.config);
    runner.set_event_hook([&](ClusterState& state, const Event&) {
      ++events;
      tracker.check(state);
    });
    runner.run();
    const SimulationResult res = runner.take_result();
    if (res.completed.size() != ep.trace.jobs.size())
      tracker.note("episode left jobs unfinished");
    for (const auto& c : res.completed) {
      if (std::abs((c.finish_time - c.start_time) - c.job.runtime) > 1e-9)
        tracker.note("runtime not honored for job " + std::to_string(c.job.id));
      if (c.start_time + 1e-9 < c.job.submit_time)
        tracker.note("job started before submission");
    }
    ++episodes_done;
  }

  const bool ok = episodes_done == kEpisodes && tracker.violations == 0;
  std::string detail = std::to_string(episodes_done) + " episodes, " + std::to_string(events) +
                       " events checked, " + std::to_string(tracker.violations) + " violations";
  if (!tracker.first.empty()) detail += "; first: " + tracker.first;
  return report(2, ok, detail);
}

bool criterion_3() {
  const int kEpisodes = 1000;
  const double kTol = 1e-6;
  Rng rng(20240817);
  double worst = 0;

  for (int i = 0; i < kEpisodes; ++i) {
    RandomEpisode ep = make_random_episode(rng, i);
    const SimulationResult res = run_episode(ep.trace, ep.policy.get(), ep.config);
    const EnergyTotals& t = res.totals;
    const double rebuilt = t.wasted_energy +
                           t.compute_node_seconds * ep.config.power.p_active +
                           t.sleep_node_seconds * ep.config.power.p_sleep;
    worst = std::max(worst, rel_err(t.total_energy, rebuilt));
  }

  const bool ok = worst <= kTol;
  return report(3, ok, "decomposition identity over 1000 episodes, worst relative error " +
                           fmt(worst) + " (tolerance 1e-6)");
}

bool criterion_4() {
  const int kEpisodes = 1000;
  const double kEps = 1e-9;
  Rng rng(20240817);
  long steps = 0;
  long bound_violations = 0;
  std::string first;

  for (int i = 0; i < kEpisodes; ++i) {
    RandomEpisode ep = make_random_episode(rng, i);
    const SimulationResult res = run_episode(ep.trace, ep.policy.get(), ep.config);
    for (const auto& s : res.snapshots) {
      ++steps;
      if (s.reward > kEps || s.reward < -1.0 - kEps || s.r2 > s.j + kEps) {
        ++bound_violations;
        if (first.empty())
          first = "episode " + std::to_string(i) + " step " + std::to_string(s.step) +
                  ": reward " + fmt(s.reward) + ", r2 " + fmt(s.r2) + ", j " + fmt(s.j);
      }
    }
  }

  // Analytic corner cases: a fully idle cluster, a fully sleeping cluster,
  // and a busy cluster with five jobs queued for the whole interval.
  SimConfig config;
  StepSnapshot base;
  bool corners_ok = true;

  StepSnapshot idle;
  idle.step = 1;
  idle.cumulative_wasted = 128 * 190.0 * 1800.0;
  corners_ok = corners_ok && compute_reward(base, idle, 0.5, 0.5, config).reward == -0.5;

  StepSnapshot asleep;
  asleep.step = 1;
  corners_ok = corners_ok && compute_reward(base, asleep, 0.5, 0.5, config).reward == 0.0;

  StepSnapshot busy;
  busy.step = 1;
  busy.interval_queue_seconds = 5 * 1800.0;
  busy.interval_distinct_queued = 5;
  corners_ok = corners_ok && compute_reward(base, busy, 0.5, 0.5, config).reward == -0.5;

  const bool ok = bound_violations == 0 && corners_ok;
  std::string detail = std::to_string(steps) + " rewards in [-1, 0] with r2 <= j, " +
                       std::to_string(bound_violations) + " violations; corner cases " +
                       (corners_ok ? "-0.5 / 0 / -0.5 exact" : "WRONG");
  if (!first.empty()) detail += "; first: " + first;
  return report(4, ok, detail);
}

// ---------------------------------------------------------------------------
// Criteria 5-8: workload toolkit fidelity and the published baseline numbers
// on the reference trace.

bool criterion_5() {
  const double kTol = 0.01;
  const WorkloadTrace trace = make_reference_trace(nasa_like_preset(), 1);
  const auto [train, test] = split_trace(trace, 0.8);
  const WorkloadTrace sampled = generate_sampled(train, 10000, 1);
  const auto [rmse, rel] = validate_exponential(sampled);
  const bool ok = rmse <= kTol;
  return report(5, ok, "10000-job sampled trace, inter-arrival CDF RMSE " + fmt(rmse) +
                           " (tolerance 0.01), relative " + fmt(rel));
}

bool criterion_6() {
  const double kTol = 0.05;
  const WorkloadTrace trace = make_reference_trace(nasa_like_preset(), 1);
  const WorkloadPatterns patterns = extract_patterns(trace);
  const WorkloadTrace synthetic =
      generate_synthetic(patterns, *trace.origin_timestamp, 365, 1);
  const DatasetStats stats = dataset_stats(synthetic, patterns);
  const bool ok = stats.jobsize_tv_distance <= kTol && stats.walltime_tv_distance <= kTol;
  return report(6, ok, "one-year synthetic trace (" + std::to_string(synthetic.jobs.size()) +
                           " jobs), jobsize TV " + fmt(stats.jobsize_tv_distance) +
                           ", walltime TV " + fmt(stats.walltime_tv_distance) +
                           " (tolerance 0.05)");
}

bool criterion_7() {
  const WorkloadTrace trace = make_reference_trace(nasa_like_preset(), 1);
  const auto [train, test] = split_trace(trace, 0.8);

  SweepSpec spec;
  spec.axis = "timeout_minutes";
  const std::vector<SweepRow> rows = run_sweep(test, spec);

  double best_minutes = 0;
  double best_wasted = std::numeric_limits<double>::infinity();
  double wasted15 = 0, wasted60 = 0;
  bool rows_ok = rows.size() == 12;
  for (const auto& row : rows) {
    if (!row.metrics) {
      rows_ok = false;
      continue;
    }
    const double minutes = std::stod(row.axis_value);
    const double wasted = row.metrics->wasted_energy;
    if (wasted < best_wasted) {
      best_wasted = wasted;
      best_minutes = minutes;
    }
    if (minutes == 15) wasted15 = wasted;
    if (minutes == 60) wasted60 = wasted;
  }

  RunConfig always_on;
  const double on_wasted = run_simulation(test, always_on).metrics.wasted_energy;

  const bool ordered = wasted15 < wasted60 && wasted60 < on_wasted;
  const bool minimum_in_band = best_minutes >= 10 && best_minutes <= 25;
  const bool ok = rows_ok && ordered && minimum_in_band;
  return report(7, ok, "sweep minimum at " + fmt(best_minutes) +
                           " min (band [10, 25]); wasted J: timeout:15 " + fmt(wasted15) +
                           " < timeout:60 " + fmt(wasted60) + " < always-on " + fmt(on_wasted) +
                           (ordered ? "" : " ORDER VIOLATED"));
}

bool criterion_8() {
  const double kTargetPct = 48.17;
  const double kTolPct = 3.0;
  const WorkloadTrace trace = make_reference_trace(nasa_like_preset(), 1);
  const auto [train, test] = split_trace(trace, 0.8);
  RunConfig always_on;
  const MetricsReport metrics = run_simulation(test, always_on).metrics;
  const double pct = metrics.job_filling_rate * 100.0;
  const bool ok = std::abs(pct - kTargetPct) <= kTolPct;
  return report(8, ok, "always-on job-filling rate " + fmt(pct) + "% vs " + fmt(kTargetPct) +
                           "% +/- " + fmt(kTolPct) + " pp on the " +
                           std::to_string(test.jobs.size()) + "-job test split");
}

// ---------------------------------------------------------------------------
// Criterion 9: analytic gradient vs central finite differences.

Rollout make_check_rollout(Rng& rng, int steps, int nodes) {
  auto random_features = [&]() {
    Eigen::MatrixXd m(nodes, 11);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform() * 2.0 - 1.0;
    return m;
  };
  Rollout roll;
  for (int k = 0; k < steps; ++k) {
    TransitionRec rec;
    rec.features = random_features();
    rec.action.resize(static_cast<std::size_t>(nodes));
    rec.mask.resize(static_cast<std::size_t>(nodes));
    for (int m = 0; m < nodes; ++m) {
      rec.action[static_cast<std::size_t>(m)] = rng.bernoulli(0.5) ? 1 : 0;
      rec.mask[static_cast<std::size_t>(m)] = rng.bernoulli(0.25);
    }
    rec.reward = -0.3 * rng.uniform();
    roll.steps.push_back(std::move(rec));
  }
  roll.bootstrap_features = random_features();
  roll.terminal = false;
  return roll;
}

bool criterion_9() {
  const int kCoords = 1200;
  const double kEps = 1e-5;
  const double kTol = 1e-4;
  const double kDetect = 1e-2;

  NetConfig net;
  net.embed_dim = 16;
  net.num_heads = 2;
  net.num_blocks = 2;
  net.ffn_mult = 2;
  const NetworkParams params = init_params(7, net);

  Rng rng(99);
  const Rollout rollout = make_check_rollout(rng, 6, 5);
  TrainConfig cfg;
  cfg.gamma = 0.9;

  const double max_rel = gradient_check(params, rollout, cfg, kEps, kCoords, 99);
  const double corrupted = gradient_check(
      params, rollout, cfg, kEps, kCoords, 99,
      [](const NetworkParams&, Eigen::VectorXd& grad) { grad.array() += 1.0; });

  const bool ok = max_rel <= kTol && corrupted > kDetect;
  return report(9, ok, std::to_string(kCoords) + " coordinates, max relative error " +
                           fmt(max_rel) + " (tolerance 1e-4); corrupted gradient error " +
                           fmt(corrupted) + (corrupted > kDetect ? " detected" : " MISSED"));
}

// ---------------------------------------------------------------------------
// Criterion 10: desk-scale learning signal on the mini workload.

double eval_greedy_wasted(const NetworkParams& params, const WorkloadTrace& trace,
                          const SimConfig& sim, std::uint64_t seed) {
  AgentPolicy policy(params, AgentMode::Greedy, seed);
  return run_episode(trace, &policy, sim).totals.wasted_energy;
}

bool criterion_10() {
  const int kSeeds = 5;
  const int kEpochsPerStage = 3;

  SimConfig sim;
  sim.node_count = 8;
  sim.wakeup_mode = WakeupMode::Agent;
  sim.failsafe = true;

  int wins = 0;
  double curriculum_sum = 0;
  double control_sum = 0;
  std::string per_seed;

  for (int s = 0; s < kSeeds; ++s) {
    const std::uint64_t seed = 100 + static_cast<std::uint64_t>(s);
    const WorkloadTrace real = make_reference_trace(mini_preset(), seed);
    const WorkloadTrace sampled = generate_sampled(real, real.jobs.size(), seed);
    const WorkloadPatterns patterns = extract_patterns(real);
    const WorkloadTrace synthetic =
        generate_synthetic(patterns, *real.origin_timestamp, 7, seed);

    // Desk-scale hyperparameters: a small encoder and Adam with a higher
    // learning rate and short rollouts so three epochs per stage carry a
    // visible signal.
    TrainConfig cfg;
    cfg.net.embed_dim = 32;
    cfg.net.num_heads = 4;
    cfg.net.num_blocks = 2;
    cfg.net.ffn_mult = 2;
    cfg.optimizer = "adam";
    cfg.learning_rate = 3e-3;
    cfg.rollout_length = 8;
    cfg.epochs_per_stage = kEpochsPerStage;
    cfg.seed = seed;

    CurriculumPlan plan;
    plan.stages.push_back({"sampled", sampled});
    plan.stages.push_back({"real", real});
    plan.stages.push_back({"synthetic", synthetic});
    NetworkParams params = init_params(seed, cfg.net);
    train_curriculum(params, plan, sim, cfg);
    const double agent_wasted = eval_greedy_wasted(params, real, sim, seed);

    TrainConfig control_cfg = cfg;
    control_cfg.epochs_per_stage = 3 * kEpochsPerStage;
    CurriculumPlan control_plan;
    control_plan.stages.push_back({"real", real});
    NetworkParams control_params = init_params(seed, control_cfg.net);
    train_curriculum(control_params, control_plan, sim, control_cfg);
    const double control_wasted = eval_greedy_wasted(control_params, real, sim, seed);

    RandomPolicy random_policy(0.5, seed);
    const double random_wasted = run_episode(real, &random_policy, sim).totals.wasted_energy;

    SimConfig on_sim = sim;
    on_sim.wakeup_mode = WakeupMode::Reactive;
    on_sim.failsafe = false;
    AlwaysOnPolicy always_on;
    const double on_wasted = run_episode(real, &always_on, on_sim).totals.wasted_energy;

    const bool win = agent_wasted <= random_wasted && agent_wasted <= on_wasted;
    if (win) ++wins;
    curriculum_sum += agent_wasted;
    control_sum += control_wasted;
    per_seed += (s ? " " : "") + std::string("seed") + std::to_string(seed) +
                (win ? "+" : "-");
  }

  const double curriculum_mean = curriculum_sum / kSeeds;
  const double control_mean = control_sum / kSeeds;
  const bool ok = wins >= 4 && curriculum_mean <= control_mean;
  return report(10, ok, "beats random and always-on in " + std::to_string(wins) + "/5 seeds [" +
                            per_seed + "]; curriculum mean wasted " + fmt(curriculum_mean) +
                            " J vs no-curriculum " + fmt(control_mean) + " J");
}

// ---------------------------------------------------------------------------
// Criterion 11: byte-identical artifacts through the command line.

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing " + path.string() + ">";
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool criterion_11(const Context& ctx) {
  if (ctx.cli.empty())
    return report(11, false, "needs --cli pointing at the psmsim binary");

  const fs::path wd = ctx.workdir / "c11";
  fs::remove_all(wd);
  fs::create_directories(wd);

  const std::string cli = "\"" + ctx.cli + "\"";
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };

  const fs::path trace = wd / "mini.swf";
  if (!run("gen-reference --preset mini --output " + q(trace) + " --seed 5"))
    return report(11, false, "gen-reference invocation failed");

  std::vector<std::string> mismatches;
  auto compare = [&](const fs::path& a, const fs::path& b) {
    if (slurp(a) != slurp(b)) mismatches.push_back(a.filename().string());
  };

  const std::string sim_flags = " --policy timeout:10 --nodes 8 --seed 3";
  for (const char* side : {"simA", "simB"})
    if (!run("simulate --input " + q(trace) + " --output-dir " + q(wd / side) + sim_flags))
      return report(11, false, "simulate invocation failed");
  for (const char* name : {"metrics.json", "steps.csv", "jobs.csv"})
    compare(wd / "simA" / name, wd / "simB" / name);

  const std::string sweep_flags =
      " --axis timeout_minutes --values 5,15,25 --nodes 8 --seed 3 --workers 4";
  for (const char* side : {"sweepA.csv", "sweepB.csv"})
    if (!run("sweep --input " + q(trace) + " --output " + q(wd / side) + sweep_flags))
      return report(11, false, "sweep invocation failed");
  compare(wd / "sweepA.csv", wd / "sweepB.csv");

  const std::string train_flags =
      " --order real --nodes 8 --seed 3 --epochs 1 --lr 0.001 --optimizer adam"
      " --rollout 8 --embed 8 --heads 2 --blocks 1 --failsafe --failsafe-hours 2"
      " --horizon-days 10";
  for (const char* side : {"trainA", "trainB"})
    if (!run("train --real " + q(trace) + " --output-dir " + q(wd / side) + train_flags))
      return report(11, false, "train invocation failed");
  for (const char* name : {"final.ckpt", "stage_1_real.ckpt", "train_log.csv"})
    compare(wd / "trainA" / name, wd / "trainB" / name);

  const bool ok = mismatches.empty();
  std::string detail = "simulate/sweep/train artifacts byte-identical across repeated runs";
  if (!ok) {
    detail = "artifacts differ:";
    for (const auto& name : mismatches) detail += " " + name;
  }
  return report(11, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  int criterion = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      criterion = std::atoi(argv[++i]);
    } else if (arg == "--cli" && i + 1 < argc) {
      ctx.cli = argv[++i];
    } else if (arg == "--workdir" && i + 1 < argc) {
      ctx.workdir = argv[++i];
    } else {
      std::fprintf(stderr, "unknown argument '%s'\n", arg.c_str());
      return 2;
    }
  }
  if (criterion < 1 || criterion > 11) {
    std::fprintf(stderr, "usage: acceptance --criterion 1..11 [--cli psmsim] [--workdir dir]\n");
    return 2;
  }
  fs::create_directories(ctx.workdir);

  try {
    bool ok = false;
    switch (criterion) {
      case 1: ok = criterion_1(); break;
      case 2: ok = criterion_2(); break;
      case 3: ok = criterion_3(); break;
      case 4: ok = criterion_4(); break;
      case 5: ok = criterion_5(); break;
      case 6: ok = criterion_6(); break;
      case 7: ok = criterion_7(); break;
      case 8: ok = criterion_8(); break;
      case 9: ok = criterion_9(); break;
      case 10: ok = criterion_10(); break;
      case 11: ok = criterion_11(ctx); break;
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    return report(criterion, false, std::string("exception: ") + e.what()) ? 0 : 1;
  }
}
