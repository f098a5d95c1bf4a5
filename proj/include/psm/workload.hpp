#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psm/rng.hpp"

namespace psm {

struct JobSpec {
  std::int64_t id = 0;
  double submit_time = 0;  // seconds relative to trace start
  double runtime = 0;      // actual execution time, seconds
  double walltime = 0;     // requested limit; equals runtime for this trace
  int requested_nodes = 0;

  bool operator==(const JobSpec&) const = default;
};

struct WorkloadTrace {
  std::vector<JobSpec> jobs;  // sorted non-decreasing by submit_time
  std::optional<std::int64_t> origin_timestamp;  // epoch seconds of first job
  std::string label;  // real | sampled | synthetic

  bool empty() const { return jobs.empty(); }
  std::size_t size() const { return jobs.size(); }
};

struct ParseResult {
  WorkloadTrace trace;
  int dropped_records = 0;  // records with -1 / non-positive used fields
};

// Histogram over exact values (node counts) or bin lower bounds (walltimes).
using Histogram = std::map<std::int64_t, double>;

struct WalltimeBins {
  // Lower bin edges in seconds; an implicit final bin runs to infinity.
  std::vector<double> edges = {0, 60, 300, 900, 3600, 10800, 43200};
};

struct WorkloadPatterns {
  double weekday_avg_counts[7] = {};  // Monday..Sunday mean jobs per day
  double hourly_percentages[24] = {};  // sums to 1
  Histogram jobsize_histogram;         // requested_nodes -> count
  Histogram walltime_histogram;        // bin index -> count
  WalltimeBins walltime_bins;
  std::vector<double> walltimes;  // empirical pool for resampling
  std::vector<int> jobsizes;      // empirical pool for resampling
  double mean_interarrival = 0;
};

struct DatasetStats {
  double interarrival_cdf_rmse = 0;
  double interarrival_cdf_relative_rmse = 0;
  double jobsize_tv_distance = 0;
  double walltime_tv_distance = 0;
};

// Parses SWF content: ';' header comments, whitespace-separated records,
// fields 1/2/4/5 = job id, submit time, run time, allocated processors.
// Records with -1 or non-positive values in a used field are dropped and
// counted. Malformed lines (non-numeric, too few fields) raise
// std::runtime_error naming the line number.
ParseResult parse_swf(const std::string& text);

// Emits standard 18-field records (-1 in unused fields) plus header comments;
// round-trips through parse_swf on the used fields.
std::string write_swf(const WorkloadTrace& trace);

// Chronological split: first floor(ratio*n) jobs in train, rest in test with
// submit times rebased to the first test job.
std::pair<WorkloadTrace, WorkloadTrace> split_trace(const WorkloadTrace& trace,
                                                    double ratio);

// Mean of consecutive submit-time differences: (last - first) / (n - 1).
double mean_interarrival(const WorkloadTrace& trace);

// Weekly/daily submission patterns plus jobsize and walltime distributions.
// Requires origin_timestamp; weekday averages divide by the number of times
// each weekday occurs in the trace span.
WorkloadPatterns extract_patterns(const WorkloadTrace& trace,
                                  const WalltimeBins& bins = {});

// Uniform resampling with replacement; submit times rebuilt as a cumulative
// sum of Exp(mean_interarrival(source)) draws, truncated to whole seconds.
WorkloadTrace generate_sampled(const WorkloadTrace& source, std::size_t count,
                               std::uint64_t seed);

// Day-by-day generation from extracted patterns: round(weekday average) jobs
// per day, hour from the daily profile, minute/second uniform, walltime and
// node count resampled from the empirical pools.
WorkloadTrace generate_synthetic(const WorkloadPatterns& patterns,
                                 std::int64_t start_date_epoch,
                                 int duration_days, std::uint64_t seed);

// Compares the empirical inter-arrival CDF against the exponential CDF with
// the empirical mean. Returns (rmse, rmse / mean reference CDF value).
std::pair<double, double> validate_exponential(const WorkloadTrace& trace);

// Total variation distance between two (unnormalized) histograms.
double distribution_distance(const Histogram& a, const Histogram& b);

// Bin index for a walltime value under the given edges.
std::size_t walltime_bin(double walltime, const WalltimeBins& bins);

// Full comparison of a generated trace against source patterns.
DatasetStats dataset_stats(const WorkloadTrace& generated,
                           const WorkloadPatterns& source_patterns);

}  // namespace psm
