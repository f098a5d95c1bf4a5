#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "psm/experiment.hpp"
#include "psm/metrics.hpp"
#include "psm/reference.hpp"
#include "psm/workload.hpp"

namespace py = pybind11;

namespace {

py::object opt_double(const std::optional<double>& v) {
  if (!v) return py::none();
  return py::float_(*v);
}

py::dict metrics_dict(const psm::MetricsReport& m) {
  py::dict d;
  d["total_energy"] = m.total_energy;
  d["wasted_energy"] = m.wasted_energy;
  d["avg_wait"] = opt_double(m.avg_wait);
  d["max_wait"] = opt_double(m.max_wait);
  d["avg_response"] = opt_double(m.avg_response);
  d["avg_slowdown"] = opt_double(m.avg_slowdown);
  d["job_filling_rate"] = m.job_filling_rate;
  d["shutdown_count"] = m.shutdown_count;
  d["completed_jobs"] = m.completed_jobs;
  d["termination_time"] = m.termination_time;
  d["truncated"] = m.truncated;
  d["failsafe_triggers"] = m.failsafe_triggers;
  d["dropped_jobs"] = m.dropped_jobs;
  return d;
}

psm::ReferencePreset preset_by_name(const std::string& name) {
  if (name == "nasa") return psm::nasa_like_preset();
  if (name == "mini") return psm::mini_preset();
  throw std::invalid_argument("unknown preset '" + name + "' (expected nasa or mini)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cluster power-state management: simulation and workload tooling";
  m.attr("__version__") = "1.0.0";

  py::class_<psm::JobSpec>(m, "JobSpec")
      .def(py::init<>())
      .def_readwrite("id", &psm::JobSpec::id)
      .def_readwrite("submit_time", &psm::JobSpec::submit_time)
      .def_readwrite("runtime", &psm::JobSpec::runtime)
      .def_readwrite("walltime", &psm::JobSpec::walltime)
      .def_readwrite("requested_nodes", &psm::JobSpec::requested_nodes)
      .def("__repr__", [](const psm::JobSpec& j) {
        return "JobSpec(id=" + std::to_string(j.id) +
               ", submit=" + psm::format_double(j.submit_time) +
               ", runtime=" + psm::format_double(j.runtime) +
               ", nodes=" + std::to_string(j.requested_nodes) + ")";
      });

  py::class_<psm::WorkloadTrace>(m, "WorkloadTrace")
      .def(py::init<>())
      .def_readwrite("jobs", &psm::WorkloadTrace::jobs)
      .def_readwrite("origin_timestamp", &psm::WorkloadTrace::origin_timestamp)
      .def_readwrite("label", &psm::WorkloadTrace::label)
      .def("__len__", &psm::WorkloadTrace::size);

  m.def(
      "parse_swf",
      [](const std::string& text) {
        psm::ParseResult r = psm::parse_swf(text);
        return py::make_tuple(r.trace, r.dropped_records);
      },
      py::arg("text"), "Parse SWF text into (trace, dropped_record_count)");
  m.def("write_swf", &psm::write_swf, py::arg("trace"));
  m.def("split_trace", &psm::split_trace, py::arg("trace"), py::arg("ratio"),
        "Chronological (train, test) split; test submit times are rebased");
  m.def("mean_interarrival", &psm::mean_interarrival, py::arg("trace"));
  m.def("generate_sampled", &psm::generate_sampled, py::arg("source"), py::arg("count"),
        py::arg("seed"));
  m.def(
      "generate_synthetic",
      [](const psm::WorkloadTrace& source, int days, std::uint64_t seed,
         std::optional<std::int64_t> start) {
        psm::WorkloadPatterns patterns = psm::extract_patterns(source);
        const std::int64_t origin = start.value_or(source.origin_timestamp.value_or(0));
        return psm::generate_synthetic(patterns, origin, days, seed);
      },
      py::arg("source"), py::arg("days"), py::arg("seed"), py::arg("start") = py::none(),
      "Generate a synthetic trace from the source's submission patterns");
  m.def(
      "validate_exponential",
      [](const psm::WorkloadTrace& trace) {
        auto [rmse, rel] = psm::validate_exponential(trace);
        return py::make_tuple(rmse, rel);
      },
      py::arg("trace"), "(cdf_rmse, cdf_relative_rmse) against the fitted exponential");
  m.def(
      "make_reference_trace",
      [](const std::string& preset, std::uint64_t seed) {
        return psm::make_reference_trace(preset_by_name(preset), seed);
      },
      py::arg("preset") = "nasa", py::arg("seed") = 1,
      "Built-in reference workload; presets: nasa (128 nodes), mini (8 nodes)");

  m.def(
      "simulate",
      [](const psm::WorkloadTrace& trace, const std::string& policy, int node_count, double dt,
         const std::string& wakeup_mode, bool failsafe, double alpha, double beta,
         std::uint64_t seed, std::optional<double> horizon_days) {
        psm::RunConfig cfg;
        cfg.policy = policy;
        cfg.node_count = node_count;
        cfg.dt_seconds = dt;
        cfg.wakeup_mode = wakeup_mode;
        cfg.failsafe = failsafe;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.seed = seed;
        cfg.horizon_days = horizon_days;
        return metrics_dict(psm::run_simulation(trace, cfg).metrics);
      },
      py::arg("trace"), py::arg("policy") = "always-on", py::arg("node_count") = 128,
      py::arg("dt") = 1800.0, py::arg("wakeup_mode") = "reactive", py::arg("failsafe") = false,
      py::arg("alpha") = 0.5, py::arg("beta") = 0.5, py::arg("seed") = 1,
      py::arg("horizon_days") = py::none(),
      "Run one episode and return the metrics as a dict");
}
