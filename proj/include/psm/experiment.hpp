#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psm/agent.hpp"
#include "psm/metrics.hpp"
#include "psm/simcore.hpp"
#include "psm/workload.hpp"

namespace psm {

struct RunConfig {
  std::string policy = "always-on";  // always-on | timeout:<min> | random:<p> | agent:<ckpt>
  int node_count = 128;
  PowerParams power;
  double dt_seconds = 1800.0;
  std::string wakeup_mode = "reactive";  // reactive | agent
  bool failsafe = false;
  double failsafe_wait_seconds = 86400.0;
  double alpha = 0.5;
  double beta = 0.5;
  std::uint64_t seed = 1;
  std::optional<double> horizon_days;
  std::string agent_mode = "greedy";  // greedy | sample, for agent:<ckpt> policies
};

SimConfig to_sim_config(const RunConfig& cfg);

// Flat key=value view of the effective configuration, echoed into artifacts.
std::map<std::string, std::string> effective_config(const RunConfig& cfg);

struct RunArtifacts {
  MetricsReport metrics;
  SimulationResult result;
};

// Runs one episode. When output_dir is non-empty, writes metrics.json,
// steps.csv and jobs.csv there. Configuration errors (bad policy string,
// missing checkpoint) surface before any simulation work starts.
RunArtifacts run_simulation(const WorkloadTrace& trace, const RunConfig& cfg,
                            const std::string& output_dir = "");

struct SweepSpec {
  RunConfig base;
  std::string axis;                   // timeout_minutes | switch_times | power_levels | node_counts
  std::vector<std::string> values;    // empty -> axis default
  std::vector<std::string> policies;  // non-timeout axes; empty -> {base.policy}
  int workers = 0;                    // <=0 -> hardware concurrency
};

struct SweepRow {
  std::string axis_value;
  std::string policy;
  std::optional<MetricsReport> metrics;
  std::string error;  // non-empty when the run failed
};

std::vector<std::string> default_axis_values(const std::string& axis);

// One row per (axis value, policy), in the order given regardless of which
// worker finished first. A failed run contributes an error-note row instead
// of aborting the sweep.
std::vector<SweepRow> run_sweep(const WorkloadTrace& trace, const SweepSpec& spec);

void write_sweep_csv(const std::string& path, const std::string& axis,
                     const std::vector<SweepRow>& rows,
                     const std::map<std::string, std::string>& config);

struct CurriculumTraces {
  WorkloadTrace sampled;
  WorkloadTrace real;
  WorkloadTrace synthetic;
};

struct CurriculumResult {
  std::string label;  // e.g. "sampled>real>synthetic" or "no-curriculum"
  MetricsReport metrics;
  std::vector<StageLog> stages;
};

// Trains the six stage orderings of {sampled, real, synthetic} plus a
// no-curriculum control (real trace only, same total epoch budget) and
// evaluates each trained agent on eval_trace with the greedy head.
std::vector<CurriculumResult> compare_curricula(const CurriculumTraces& traces,
                                                const WorkloadTrace& eval_trace,
                                                const SimConfig& sim_config,
                                                const TrainConfig& train_config,
                                                const std::string& checkpoint_dir = "");

void write_curricula_csv(const std::string& path, const std::vector<CurriculumResult>& rows,
                         const std::map<std::string, std::string>& config);

std::string metrics_to_json(const MetricsReport& metrics,
                            const std::map<std::string, std::string>& config);

// Inverse of metrics_to_json for the `report` command; validates the schema tag.
MetricsReport metrics_from_json(const std::string& json_text);

void write_radar_csv(const std::string& path, const std::vector<std::string>& labels,
                     const std::vector<MetricsReport>& reports);

void write_steps_csv(const std::string& path, const SimulationResult& result,
                     const std::map<std::string, std::string>& config);

void write_jobs_csv(const std::string& path, const SimulationResult& result,
                    const std::map<std::string, std::string>& config);

void write_text_file(const std::string& path, const std::string& content);

std::string format_double(double v);

}  // namespace psm
