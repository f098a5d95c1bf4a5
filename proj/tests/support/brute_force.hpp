#pragma once

#include <cstdint>
#include <map>

#include "psm/simcore.hpp"
#include "psm/workload.hpp"

namespace psm::testing {

// Reference results computed by the second-by-second integrator below.
struct BruteForceResult {
  double total_energy = 0;
  double wasted_energy = 0;
  double compute_seconds = 0;
  double active_idle_seconds = 0;
  double sleep_seconds = 0;
  double switch_on_seconds = 0;
  double switch_off_seconds = 0;
  double termination_time = 0;
  std::int64_t shutdown_count = 0;
  std::map<std::int64_t, double> wait_by_job;  // id -> start - submit
};

enum class OraclePolicyKind { AlwaysOn, Timeout };

// Independent brute-force re-implementation of the cluster rules advancing
// one whole second at a time: FCFS head dispatch, EASY backfilling against
// the head reservation, reactive wake-ups, and a timeout shutdown rule. All
// scenario times must be whole seconds, which makes 1 Hz integration exact.
BruteForceResult brute_force_run(const WorkloadTrace& trace, int node_count,
                                 const PowerParams& power, OraclePolicyKind kind,
                                 double timeout_threshold = 0);

}  // namespace psm::testing
