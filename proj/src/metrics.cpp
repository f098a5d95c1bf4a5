#include "psm/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace psm {

MetricsReport compute_metrics(const SimulationResult& result) {
  MetricsReport m;
  m.total_energy = result.totals.total_energy;
  m.wasted_energy = result.totals.wasted_energy;
  m.shutdown_count = result.totals.shutdown_count;
  m.completed_jobs = static_cast<std::int64_t>(result.completed.size());
  m.termination_time = result.termination_time;
  m.truncated = result.truncated;
  m.failsafe_triggers = result.failsafe_triggers;
  m.dropped_jobs = result.dropped_jobs;

  const double compute = result.totals.compute_node_seconds;
  const double idle = result.totals.active_idle_node_seconds;
  m.job_filling_rate = (compute + idle) > 0.0 ? compute / (compute + idle) : 0.0;

  if (!result.completed.empty()) {
    double wait_sum = 0.0, wait_max = 0.0, response_sum = 0.0, slowdown_sum = 0.0;
    for (const auto& c : result.completed) {
      const double wait = c.start_time - c.job.submit_time;
      const double response = c.finish_time - c.job.submit_time;
      wait_sum += wait;
      wait_max = std::max(wait_max, wait);
      response_sum += response;
      slowdown_sum += response / std::max(c.job.runtime, 1.0);
    }
    const double n = static_cast<double>(result.completed.size());
    m.avg_wait = wait_sum / n;
    m.max_wait = wait_max;
    m.avg_response = response_sum / n;
    m.avg_slowdown = slowdown_sum / n;
  }
  return m;
}

std::vector<RadarScores> normalize_radar(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("normalize_radar needs at least one report");

  double max_inv_wait = 0.0, max_inv_response = 0.0, max_inv_slowdown = 0.0, max_fill = 0.0;
  for (const auto& r : reports) {
    if (!r.max_wait || !r.avg_response || !r.avg_slowdown)
      throw std::invalid_argument("normalize_radar: report is missing wait or response metrics");
    if (*r.max_wait <= 0.0 || *r.avg_response <= 0.0 || *r.avg_slowdown <= 0.0 ||
        r.job_filling_rate <= 0.0)
      throw std::invalid_argument("normalize_radar: metrics must be positive");
    max_inv_wait = std::max(max_inv_wait, 1.0 / *r.max_wait);
    max_inv_response = std::max(max_inv_response, 1.0 / *r.avg_response);
    max_inv_slowdown = std::max(max_inv_slowdown, 1.0 / *r.avg_slowdown);
    max_fill = std::max(max_fill, r.job_filling_rate);
  }

  std::vector<RadarScores> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    RadarScores s;
    s.max_wait = (1.0 / *r.max_wait) / max_inv_wait;
    s.avg_response = (1.0 / *r.avg_response) / max_inv_response;
    s.avg_slowdown = (1.0 / *r.avg_slowdown) / max_inv_slowdown;
    s.job_filling_rate = r.job_filling_rate / max_fill;
    out.push_back(s);
  }
  return out;
}

}  // namespace psm
