#include "psm/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "psm/calendar.hpp"
#include "psm/rng.hpp"

namespace psm {

namespace {

constexpr std::uint64_t kReferenceStream = 0x5245;

int pick_weighted(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

}  // namespace

ReferencePreset nasa_like_preset() {
  ReferencePreset p;
  p.name = "nasa-like";
  p.start_epoch = to_epoch_seconds({1993, 10, 1, 0, 0, 0});
  p.node_count = 128;
  p.total_jobs = 18067;
  const double weekday[7] = {108, 112, 110, 108, 104, 55, 48};
  std::copy(weekday, weekday + 7, p.weekday_rate);
  const double hourly[24] = {1.0, 0.8, 0.7, 0.6, 0.6, 0.8, 1.2, 2.2,
                             4.5, 7.0, 8.0, 8.2, 7.6, 7.8, 8.0, 7.6,
                             6.8, 5.4, 3.8, 2.8, 2.2, 1.8, 1.5, 1.2};
  std::copy(hourly, hourly + 24, p.hourly_weights);
  // Three job families, each with its own width profile: an interactive
  // stream of small short jobs, mid-size runs, and wide long batch blocks.
  p.runtime_classes = {
      {0.745, 300, 2400, {{1, 0.55}, {2, 0.30}, {4, 0.15}}},
      {0.15, 2400, 7200, {{2, 0.40}, {4, 0.35}, {8, 0.25}}},
      {0.105, 14400, 43200, {{8, 0.45}, {16, 0.35}, {32, 0.20}}}};
  // Recurring 32-node analysis sweep, resubmitted every 23 minutes.
  p.cron_period_seconds = 1380.0;
  p.cron_runtime_seconds = 600.0;
  p.cron_nodes = 32;
  p.cron_jitter_seconds = 60.0;
  return p;
}

ReferencePreset mini_preset() {
  ReferencePreset p;
  p.name = "mini";
  p.start_epoch = to_epoch_seconds({1993, 10, 1, 0, 0, 0});
  p.node_count = 8;
  p.total_jobs = 200;
  const double weekday[7] = {32, 32, 32, 32, 32, 12, 12};
  std::copy(weekday, weekday + 7, p.weekday_rate);
  const double hourly[24] = {1.0, 0.8, 0.7, 0.6, 0.6, 0.8, 1.2, 2.2,
                             4.5, 7.0, 8.0, 8.2, 7.6, 7.8, 8.0, 7.6,
                             6.8, 5.4, 3.8, 2.8, 2.2, 1.8, 1.5, 1.2};
  std::copy(hourly, hourly + 24, p.hourly_weights);
  p.runtime_classes = {{0.50, 60, 600}, {0.40, 600, 3600}, {0.10, 3600, 14400}};
  p.jobsize_weights = {{1, 0.40}, {2, 0.30}, {4, 0.20}, {8, 0.10}};
  return p;
}

WorkloadTrace make_reference_trace(const ReferencePreset& preset, std::uint64_t seed) {
  if (preset.total_jobs < 1) throw std::invalid_argument("reference preset needs at least one job");
  if (preset.runtime_classes.empty())
    throw std::invalid_argument("reference preset is missing runtime classes");
  for (const auto& c : preset.runtime_classes)
    if (c.sizes.empty() && preset.jobsize_weights.empty())
      throw std::invalid_argument("reference preset is missing size weights");

  Rng rng = Rng::stream(seed, kReferenceStream);

  std::vector<double> hour_cdf(24);
  double acc = 0.0;
  for (int h = 0; h < 24; ++h) {
    acc += preset.hourly_weights[h];
    hour_cdf[h] = acc;
  }
  if (acc <= 0.0) throw std::invalid_argument("reference preset hourly weights sum to zero");

  std::vector<double> class_cdf;
  acc = 0.0;
  for (const auto& c : preset.runtime_classes) {
    acc += c.weight;
    class_cdf.push_back(acc);
  }
  std::vector<double> fallback_cdf;
  acc = 0.0;
  for (const auto& [nodes, weight] : preset.jobsize_weights) {
    acc += weight;
    fallback_cdf.push_back(acc);
  }
  std::vector<std::vector<double>> class_size_cdf;
  for (const auto& c : preset.runtime_classes) {
    std::vector<double> cdf;
    acc = 0.0;
    for (const auto& [nodes, weight] : c.sizes) {
      acc += weight;
      cdf.push_back(acc);
    }
    class_size_cdf.push_back(std::move(cdf));
  }

  WorkloadTrace trace;
  trace.label = "real";
  trace.origin_timestamp = preset.start_epoch;
  trace.jobs.reserve(static_cast<std::size_t>(preset.total_jobs));

  for (int day = 0; static_cast<int>(trace.jobs.size()) < preset.total_jobs; ++day) {
    const std::int64_t day_start = preset.start_epoch + static_cast<std::int64_t>(day) * 86400;
    const int w = weekday(day_start);
    const int count = static_cast<int>(std::llround(preset.weekday_rate[w]));

    if (preset.cron_period_seconds > 0) {
      for (double t = 0; t < 86400.0 && static_cast<int>(trace.jobs.size()) < preset.total_jobs;
           t += preset.cron_period_seconds) {
        JobSpec job;
        job.id = static_cast<std::int64_t>(trace.jobs.size()) + 1;
        job.submit_time = day * 86400.0 + t + rng.uniform(0.0, preset.cron_jitter_seconds);
        job.runtime = preset.cron_runtime_seconds;
        job.walltime = job.runtime;
        job.requested_nodes = preset.cron_nodes;
        trace.jobs.push_back(job);
      }
    }

    std::vector<double> offsets;
    offsets.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const int hour = pick_weighted(hour_cdf, rng.uniform());
      offsets.push_back(hour * 3600.0 + rng.uniform_int(0, 3599));
    }
    std::sort(offsets.begin(), offsets.end());

    for (double off : offsets) {
      if (static_cast<int>(trace.jobs.size()) >= preset.total_jobs) break;
      const std::size_t ci = static_cast<std::size_t>(pick_weighted(class_cdf, rng.uniform()));
      const auto& cls = preset.runtime_classes[ci];
      const double log_r = rng.uniform(std::log(cls.min_seconds), std::log(cls.max_seconds));
      const double runtime = std::max(1.0, std::floor(std::exp(log_r)));
      const auto& size_table = cls.sizes.empty() ? preset.jobsize_weights : cls.sizes;
      const auto& size_cdf = cls.sizes.empty() ? fallback_cdf : class_size_cdf[ci];
      const int nodes =
          size_table[static_cast<std::size_t>(pick_weighted(size_cdf, rng.uniform()))].first;
      JobSpec job;
      job.id = static_cast<std::int64_t>(trace.jobs.size()) + 1;
      job.submit_time = day * 86400.0 + off;
      job.runtime = runtime;
      // Archive records carry run time only; the requested time mirrors it.
      job.walltime = runtime;
      job.requested_nodes = nodes;
      trace.jobs.push_back(job);
    }
  }

  std::stable_sort(trace.jobs.begin(), trace.jobs.end(),
                   [](const JobSpec& a, const JobSpec& b) { return a.submit_time < b.submit_time; });
  for (std::size_t i = 0; i < trace.jobs.size(); ++i)
    trace.jobs[i].id = static_cast<std::int64_t>(i) + 1;
  return trace;
}

}  // namespace psm
