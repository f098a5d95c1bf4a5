#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "psm/simcore.hpp"

namespace psm {

struct MetricsReport {
  double total_energy = 0.0;   // joules
  double wasted_energy = 0.0;  // joules
  std::optional<double> avg_wait;      // seconds, absent when no job completed
  std::optional<double> max_wait;      // seconds
  std::optional<double> avg_response;  // seconds
  std::optional<double> avg_slowdown;  // response / max(runtime, 1)
  double job_filling_rate = 0.0;  // compute node-seconds / (compute + active-idle)
  std::int64_t shutdown_count = 0;
  std::int64_t completed_jobs = 0;
  double termination_time = 0.0;
  bool truncated = false;
  int failsafe_triggers = 0;
  int dropped_jobs = 0;
};

MetricsReport compute_metrics(const SimulationResult& result);

// Rescales reports onto a common [0, 1] radar scale where 1.0 is the best
// value observed across the batch. Wait, response and slowdown are inverted
// (smaller is better); the filling rate is divided by the batch maximum.
// Throws if any required metric is missing or non-positive.
struct RadarScores {
  double max_wait = 0.0;
  double avg_response = 0.0;
  double avg_slowdown = 0.0;
  double job_filling_rate = 0.0;
};

std::vector<RadarScores> normalize_radar(const std::vector<MetricsReport>& reports);

}  // namespace psm
