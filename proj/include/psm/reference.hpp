#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psm/workload.hpp"

namespace psm {

// Deterministic stand-in for the historical archive trace the experiments
// were built around (the original log is not redistributed here). The preset
// is calibrated so the headline aggregates match the published ones: job
// count and span, power-of-two job sizes, day/night and weekday/weekend
// submission rhythm, and an always-on job-filling rate near 48% on the
// chronological test split of a 128-node cluster.
struct ReferencePreset {
  std::string name;
  std::int64_t start_epoch = 0;
  int node_count = 128;
  int total_jobs = 18067;
  double weekday_rate[7] = {};    // Monday..Sunday, jobs per day
  double hourly_weights[24] = {};  // relative submission weight per hour
  struct RuntimeClass {
    double weight;
    double min_seconds;
    double max_seconds;  // log-uniform within [min, max]
    // Size histogram for this class; empty falls back to jobsize_weights.
    std::vector<std::pair<int, double>> sizes;
  };
  std::vector<RuntimeClass> runtime_classes;
  std::vector<std::pair<int, double>> jobsize_weights;  // node count, weight
  // Cron-driven service batch: a fixed-width job resubmitted around the
  // clock at a near-constant cadence. Period 0 disables the train.
  double cron_period_seconds = 0.0;
  double cron_runtime_seconds = 0.0;
  int cron_nodes = 0;
  double cron_jitter_seconds = 0.0;
};

// 128-node, 18,067-job preset spanning roughly 15 weeks from 1993-10-01.
ReferencePreset nasa_like_preset();

// 8-node, ~200-job, one-week preset for desk-scale training runs.
ReferencePreset mini_preset();

WorkloadTrace make_reference_trace(const ReferencePreset& preset, std::uint64_t seed);

}  // namespace psm
