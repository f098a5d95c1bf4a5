#include "psm/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "psm/calendar.hpp"

namespace psm {

namespace {

bool parse_fields(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) return false;
      out.push_back(v);
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

std::string format_field(double v) {
  char buf[64];
  if (v == std::floor(v) && std::abs(v) < 9e15) {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
  }
  return buf;
}

}  // namespace

ParseResult parse_swf(const std::string& text) {
  ParseResult result;
  result.trace.label = "real";
  std::istringstream stream(text);
  std::string line;
  std::vector<double> fields;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == ';') {
      const std::string header = line.substr(first + 1);
      std::size_t pos = header.find("StartTime:");
      if (pos != std::string::npos) {
        std::string value = header.substr(pos + 10);
        std::size_t start = value.find_first_not_of(" \t");
        if (start != std::string::npos) {
          std::size_t end = value.find_last_not_of(" \t");
          auto ts = parse_datetime(value.substr(start, end - start + 1));
          if (ts) result.trace.origin_timestamp = *ts;
        }
      }
      pos = header.find("UnixStartTime:");
      if (pos != std::string::npos && !result.trace.origin_timestamp) {
        long long value = 0;
        if (std::sscanf(header.c_str() + pos + 14, "%lld", &value) == 1) {
          result.trace.origin_timestamp = value;
        }
      }
      continue;
    }
    if (!parse_fields(line, fields)) {
      throw std::runtime_error("swf parse error at line " + std::to_string(line_no) +
                               ": non-numeric field");
    }
    if (fields.size() < 5) {
      throw std::runtime_error("swf parse error at line " + std::to_string(line_no) +
                               ": expected at least 5 fields, got " +
                               std::to_string(fields.size()));
    }
    JobSpec job;
    job.id = static_cast<std::int64_t>(fields[0]);
    job.submit_time = fields[1];
    job.runtime = fields[3];
    job.requested_nodes = static_cast<int>(fields[4]);
    job.walltime = job.runtime;
    if (job.submit_time < 0 || job.runtime <= 0 || job.requested_nodes <= 0) {
      ++result.dropped_records;
      continue;
    }
    result.trace.jobs.push_back(job);
  }
  std::stable_sort(result.trace.jobs.begin(), result.trace.jobs.end(),
                   [](const JobSpec& a, const JobSpec& b) {
                     return a.submit_time < b.submit_time;
                   });
  return result;
}

std::string write_swf(const WorkloadTrace& trace) {
  std::ostringstream out;
  out << "; Version: 2.2\n";
  out << "; Computer: simulated cluster\n";
  if (trace.origin_timestamp) {
    out << "; UnixStartTime: " << *trace.origin_timestamp << "\n";
    out << "; StartTime: " << format_datetime(*trace.origin_timestamp) << "\n";
  }
  if (!trace.label.empty()) out << "; Note: " << trace.label << " trace\n";
  for (const JobSpec& job : trace.jobs) {
    // 18 SWF fields: id, submit, wait, runtime, procs used, avg cpu, memory,
    // procs requested, walltime requested, mem requested, status, uid, gid,
    // executable, queue, partition, preceding job, think time.
    out << job.id << ' ' << format_field(job.submit_time) << " -1 "
        << format_field(job.runtime) << ' ' << job.requested_nodes << " -1 -1 "
        << job.requested_nodes << ' ' << format_field(job.walltime)
        << " -1 1 -1 -1 -1 -1 -1 -1 -1\n";
  }
  return out.str();
}

std::pair<WorkloadTrace, WorkloadTrace> split_trace(const WorkloadTrace& trace,
                                                    double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("split ratio must lie in (0,1)");
  }
  const auto cut = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(trace.jobs.size())));
  WorkloadTrace train;
  WorkloadTrace test;
  train.label = trace.label;
  test.label = trace.label;
  train.origin_timestamp = trace.origin_timestamp;
  train.jobs.assign(trace.jobs.begin(),
                    trace.jobs.begin() + static_cast<std::ptrdiff_t>(cut));
  test.jobs.assign(trace.jobs.begin() + static_cast<std::ptrdiff_t>(cut),
                   trace.jobs.end());
  if (!test.jobs.empty()) {
    const double base = test.jobs.front().submit_time;
    for (JobSpec& job : test.jobs) job.submit_time -= base;
    if (trace.origin_timestamp) {
      test.origin_timestamp = *trace.origin_timestamp + static_cast<std::int64_t>(base);
    }
  }
  return {std::move(train), std::move(test)};
}

double mean_interarrival(const WorkloadTrace& trace) {
  if (trace.jobs.size() < 2) {
    throw std::invalid_argument("mean_interarrival needs at least 2 jobs");
  }
  const double span = trace.jobs.back().submit_time - trace.jobs.front().submit_time;
  return span / static_cast<double>(trace.jobs.size() - 1);
}

std::size_t walltime_bin(double walltime, const WalltimeBins& bins) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < bins.edges.size(); ++i) {
    if (walltime >= bins.edges[i]) idx = i;
  }
  return idx;
}

WorkloadPatterns extract_patterns(const WorkloadTrace& trace,
                                  const WalltimeBins& bins) {
  if (!trace.origin_timestamp) {
    throw std::invalid_argument("extract_patterns requires an origin timestamp");
  }
  WorkloadPatterns patterns;
  patterns.walltime_bins = bins;
  if (trace.jobs.size() >= 2) {
    patterns.mean_interarrival = mean_interarrival(trace);
  }
  double weekday_totals[7] = {};
  double hour_counts[24] = {};
  const std::int64_t origin = *trace.origin_timestamp;
  std::int64_t last_day = origin / 86400;
  for (const JobSpec& job : trace.jobs) {
    const std::int64_t t = origin + static_cast<std::int64_t>(job.submit_time);
    weekday_totals[weekday(t)] += 1.0;
    hour_counts[from_epoch_seconds(t).hour] += 1.0;
    patterns.jobsize_histogram[job.requested_nodes] += 1.0;
    patterns.walltime_histogram[static_cast<std::int64_t>(
        walltime_bin(job.walltime, bins))] += 1.0;
    patterns.walltimes.push_back(job.walltime);
    patterns.jobsizes.push_back(job.requested_nodes);
    last_day = std::max(last_day, t / 86400);
  }
  // Count how many times each weekday occurs between the origin day and the
  // last submission day, inclusive.
  int weekday_occurrences[7] = {};
  for (std::int64_t day = origin / 86400; day <= last_day; ++day) {
    ++weekday_occurrences[weekday(day * 86400)];
  }
  for (int w = 0; w < 7; ++w) {
    patterns.weekday_avg_counts[w] =
        weekday_occurrences[w] > 0 ? weekday_totals[w] / weekday_occurrences[w] : 0.0;
  }
  const double total = static_cast<double>(trace.jobs.size());
  if (total > 0) {
    for (int h = 0; h < 24; ++h) patterns.hourly_percentages[h] = hour_counts[h] / total;
  }
  return patterns;
}

WorkloadTrace generate_sampled(const WorkloadTrace& source, std::size_t count,
                               std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample count must be positive");
  if (source.jobs.empty()) throw std::invalid_argument("source trace is empty");
  const double mu = mean_interarrival(source);
  Rng rng = Rng::stream(seed, 0x5A4D);
  WorkloadTrace trace;
  trace.label = "sampled";
  trace.origin_timestamp = source.origin_timestamp;
  trace.jobs.reserve(count);
  double current = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto pick = static_cast<std::size_t>(rng.uniform_int(
        0, static_cast<std::int64_t>(source.jobs.size()) - 1));
    JobSpec job = source.jobs[pick];
    current += rng.exponential(mu);
    job.id = static_cast<std::int64_t>(i + 1);
    job.submit_time = std::floor(current);
    trace.jobs.push_back(job);
  }
  return trace;
}

WorkloadTrace generate_synthetic(const WorkloadPatterns& patterns,
                                 std::int64_t start_date_epoch, int duration_days,
                                 std::uint64_t seed) {
  if (duration_days <= 0) throw std::invalid_argument("duration_days must be positive");
  Rng rng = Rng::stream(seed, 0x5359);
  WorkloadTrace trace;
  trace.label = "synthetic";
  const std::int64_t day0 = start_date_epoch - (((start_date_epoch % 86400) + 86400) % 86400);
  trace.origin_timestamp = day0;
  const bool have_pools = !patterns.walltimes.empty() && !patterns.jobsizes.empty();
  std::int64_t next_id = 1;
  for (int d = 0; d < duration_days; ++d) {
    const std::int64_t day_start = day0 + static_cast<std::int64_t>(d) * 86400;
    const int count = static_cast<int>(
        std::llround(patterns.weekday_avg_counts[weekday(day_start)]));
    std::vector<double> offsets;
    offsets.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int j = 0; j < count; ++j) {
      // Hour from the daily profile via inverse CDF over the 24 buckets.
      double u = rng.uniform();
      int hour = 23;
      double acc = 0.0;
      for (int h = 0; h < 24; ++h) {
        acc += patterns.hourly_percentages[h];
        if (u < acc) {
          hour = h;
          break;
        }
      }
      const auto minute = rng.uniform_int(0, 59);
      const auto second = rng.uniform_int(0, 59);
      offsets.push_back(static_cast<double>(hour * 3600 + minute * 60 + second));
    }
    std::sort(offsets.begin(), offsets.end());
    for (double offset : offsets) {
      JobSpec job;
      job.id = next_id++;
      job.submit_time = static_cast<double>(day_start - day0) + offset;
      if (have_pools) {
        job.walltime = patterns.walltimes[static_cast<std::size_t>(rng.uniform_int(
            0, static_cast<std::int64_t>(patterns.walltimes.size()) - 1))];
        job.requested_nodes = patterns.jobsizes[static_cast<std::size_t>(rng.uniform_int(
            0, static_cast<std::int64_t>(patterns.jobsizes.size()) - 1))];
      } else {
        job.walltime = 60;
        job.requested_nodes = 1;
      }
      job.runtime = job.walltime;
      trace.jobs.push_back(job);
    }
  }
  return trace;
}

std::pair<double, double> validate_exponential(const WorkloadTrace& trace) {
  if (trace.jobs.size() < 2) {
    throw std::invalid_argument("validate_exponential needs at least 2 jobs");
  }
  std::vector<double> gaps;
  gaps.reserve(trace.jobs.size() - 1);
  for (std::size_t i = 1; i < trace.jobs.size(); ++i) {
    gaps.push_back(trace.jobs[i].submit_time - trace.jobs[i - 1].submit_time);
  }
  std::sort(gaps.begin(), gaps.end());
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= static_cast<double>(gaps.size());
  if (mean <= 0.0) return {1.0, 1.0};
  const double n = static_cast<double>(gaps.size());
  double sq_sum = 0.0;
  double ref_sum = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double empirical = (static_cast<double>(i) + 1.0) / n;
    const double reference = 1.0 - std::exp(-gaps[i] / mean);
    const double diff = empirical - reference;
    sq_sum += diff * diff;
    ref_sum += reference;
  }
  const double rmse = std::sqrt(sq_sum / n);
  const double mean_ref = ref_sum / n;
  return {rmse, mean_ref > 0 ? rmse / mean_ref : rmse};
}

double distribution_distance(const Histogram& a, const Histogram& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("distribution_distance requires non-empty histograms");
  }
  double total_a = 0.0;
  double total_b = 0.0;
  for (const auto& [k, v] : a) total_a += v;
  for (const auto& [k, v] : b) total_b += v;
  if (total_a <= 0.0 || total_b <= 0.0) {
    throw std::invalid_argument("distribution_distance requires positive mass");
  }
  double distance = 0.0;
  auto it_a = a.begin();
  auto it_b = b.begin();
  while (it_a != a.end() || it_b != b.end()) {
    double pa = 0.0;
    double pb = 0.0;
    if (it_b == b.end() || (it_a != a.end() && it_a->first < it_b->first)) {
      pa = it_a->second / total_a;
      ++it_a;
    } else if (it_a == a.end() || it_b->first < it_a->first) {
      pb = it_b->second / total_b;
      ++it_b;
    } else {
      pa = it_a->second / total_a;
      pb = it_b->second / total_b;
      ++it_a;
      ++it_b;
    }
    distance += std::abs(pa - pb);
  }
  return 0.5 * distance;
}

DatasetStats dataset_stats(const WorkloadTrace& generated,
                           const WorkloadPatterns& source_patterns) {
  DatasetStats stats;
  if (generated.jobs.size() >= 2) {
    auto [rmse, rel] = validate_exponential(generated);
    stats.interarrival_cdf_rmse = rmse;
    stats.interarrival_cdf_relative_rmse = rel;
  }
  Histogram gen_sizes;
  Histogram gen_walltimes;
  for (const JobSpec& job : generated.jobs) {
    gen_sizes[job.requested_nodes] += 1.0;
    gen_walltimes[static_cast<std::int64_t>(
        walltime_bin(job.walltime, source_patterns.walltime_bins))] += 1.0;
  }
  if (!gen_sizes.empty() && !source_patterns.jobsize_histogram.empty()) {
    stats.jobsize_tv_distance =
        distribution_distance(gen_sizes, source_patterns.jobsize_histogram);
  }
  if (!gen_walltimes.empty() && !source_patterns.walltime_histogram.empty()) {
    stats.walltime_tv_distance =
        distribution_distance(gen_walltimes, source_patterns.walltime_histogram);
  }
  return stats;
}

}  // namespace psm
