#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "psm/metrics.hpp"

using namespace psm;

namespace {

CompletedJob completed(std::int64_t id, double submit, double start, double finish,
                       double runtime_override = -1) {
  CompletedJob job;
  job.job.id = id;
  job.job.submit_time = submit;
  job.job.runtime = runtime_override >= 0 ? runtime_override : finish - start;
  job.job.walltime = job.job.runtime;
  job.job.requested_nodes = 1;
  job.start_time = start;
  job.finish_time = finish;
  return job;
}

SimulationResult sample_result() {
  SimulationResult result;
  // waits 0, 100, 50; responses 200, 400, 150.
  result.completed.push_back(completed(1, 0, 0, 200));
  result.completed.push_back(completed(2, 100, 200, 500));
  result.completed.push_back(completed(3, 400, 450, 550));
  result.totals.total_energy = 5e6;
  result.totals.wasted_energy = 2e6;
  result.totals.compute_node_seconds = 600;
  result.totals.active_idle_node_seconds = 200;
  result.totals.shutdown_count = 7;
  result.termination_time = 550;
  result.failsafe_triggers = 2;
  result.dropped_jobs = 1;
  return result;
}

}  // namespace

TEST_CASE("compute_metrics aggregates waits, responses, and slowdowns") {
  SimulationResult result = sample_result();
  MetricsReport report = compute_metrics(result);

  CHECK(report.total_energy == 5e6);
  CHECK(report.wasted_energy == 2e6);
  CHECK(report.completed_jobs == 3);
  CHECK(report.shutdown_count == 7);
  CHECK(report.termination_time == 550);
  CHECK(report.failsafe_triggers == 2);
  CHECK(report.dropped_jobs == 1);
  CHECK_FALSE(report.truncated);

  REQUIRE(report.avg_wait.has_value());
  CHECK(*report.avg_wait == doctest::Approx((0.0 + 100.0 + 50.0) / 3));
  REQUIRE(report.max_wait.has_value());
  CHECK(*report.max_wait == 100.0);
  REQUIRE(report.avg_response.has_value());
  CHECK(*report.avg_response == doctest::Approx((200.0 + 400.0 + 150.0) / 3));
  REQUIRE(report.avg_slowdown.has_value());
  CHECK(*report.avg_slowdown ==
        doctest::Approx((200.0 / 200 + 400.0 / 300 + 150.0 / 100) / 3));

  CHECK(report.job_filling_rate == doctest::Approx(600.0 / 800.0));
}

TEST_CASE("slowdown clamps the runtime at one second") {
  SimulationResult result;
  result.completed.push_back(completed(1, 0, 10, 10.5, 0.5));
  MetricsReport report = compute_metrics(result);
  REQUIRE(report.avg_slowdown.has_value());
  // Response 10.5 over max(0.5, 1) = 10.5.
  CHECK(*report.avg_slowdown == doctest::Approx(10.5));
}

TEST_CASE("no completed jobs leaves the wait metrics absent") {
  SimulationResult result;
  result.totals.total_energy = 100;
  result.totals.wasted_energy = 40;
  result.truncated = true;
  MetricsReport report = compute_metrics(result);
  CHECK(report.completed_jobs == 0);
  CHECK_FALSE(report.avg_wait.has_value());
  CHECK_FALSE(report.max_wait.has_value());
  CHECK_FALSE(report.avg_response.has_value());
  CHECK_FALSE(report.avg_slowdown.has_value());
  CHECK(report.truncated);
  // No compute or idle time recorded at all.
  CHECK(report.job_filling_rate == 0.0);
}

TEST_CASE("filling rate is compute time over compute plus active idle") {
  SimulationResult result = sample_result();
  result.totals.compute_node_seconds = 300;
  result.totals.active_idle_node_seconds = 700;
  CHECK(compute_metrics(result).job_filling_rate == doctest::Approx(0.3));

  result.totals.compute_node_seconds = 0;
  result.totals.active_idle_node_seconds = 0;
  CHECK(compute_metrics(result).job_filling_rate == 0.0);
}

TEST_CASE("normalize_radar marks the best report with 1.0 on every axis") {
  SimulationResult base = sample_result();
  MetricsReport a = compute_metrics(base);  // max_wait 100, filling 0.75

  SimulationResult worse = sample_result();
  worse.completed[1] = completed(2, 100, 400, 700);  // wait 300
  worse.totals.compute_node_seconds = 400;
  worse.totals.active_idle_node_seconds = 400;
  MetricsReport b = compute_metrics(worse);

  std::vector<RadarScores> scores = normalize_radar({a, b});
  REQUIRE(scores.size() == 2);

  // Report a wins every axis here.
  CHECK(scores[0].max_wait == doctest::Approx(1.0));
  CHECK(scores[0].avg_response == doctest::Approx(1.0));
  CHECK(scores[0].avg_slowdown == doctest::Approx(1.0));
  CHECK(scores[0].job_filling_rate == doctest::Approx(1.0));

  // Inverted axes: score = (1/x) / max(1/x) = min_x / x.
  CHECK(scores[1].max_wait == doctest::Approx(100.0 / 300.0));
  REQUIRE(b.avg_response.has_value());
  CHECK(scores[1].avg_response ==
        doctest::Approx(*a.avg_response / *b.avg_response));
  CHECK(scores[1].avg_slowdown ==
        doctest::Approx(*a.avg_slowdown / *b.avg_slowdown));
  CHECK(scores[1].job_filling_rate == doctest::Approx(0.5 / 0.75));

  for (const RadarScores& s : scores) {
    CHECK(s.max_wait <= 1.0);
    CHECK(s.avg_response <= 1.0);
    CHECK(s.avg_slowdown <= 1.0);
    CHECK(s.job_filling_rate <= 1.0);
    CHECK(s.max_wait > 0.0);
  }
}

TEST_CASE("normalize_radar rejects unusable inputs") {
  CHECK_THROWS_AS(normalize_radar({}), std::invalid_argument);

  SimulationResult empty;
  MetricsReport no_jobs = compute_metrics(empty);
  CHECK_THROWS_AS(normalize_radar({no_jobs}), std::invalid_argument);

  // A zero max wait cannot be inverted.
  SimulationResult zero_wait;
  zero_wait.completed.push_back(completed(1, 0, 0, 100));
  zero_wait.totals.compute_node_seconds = 100;
  MetricsReport z = compute_metrics(zero_wait);
  REQUIRE(z.max_wait.has_value());
  CHECK(*z.max_wait == 0.0);
  CHECK_THROWS_AS(normalize_radar({z}), std::invalid_argument);
}
