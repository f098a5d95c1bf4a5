#include "psm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "psm/policy.hpp"

namespace psm {

namespace {

WakeupMode parse_wakeup_mode(const std::string& text) {
  if (text == "reactive") return WakeupMode::Reactive;
  if (text == "agent") return WakeupMode::Agent;
  throw std::invalid_argument("unknown wakeup mode '" + text + "' (expected reactive or agent)");
}

AgentMode parse_agent_mode(const std::string& text) {
  if (text == "greedy") return AgentMode::Greedy;
  if (text == "sample") return AgentMode::Sample;
  throw std::invalid_argument("unknown agent mode '" + text + "' (expected greedy or sample)");
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& what) {
  const auto slash = text.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 >= text.size())
    throw std::invalid_argument(what + " value '" + text + "' is not of the form a/b");
  std::size_t pos_a = 0, pos_b = 0;
  double a = 0, b = 0;
  try {
    a = std::stod(text.substr(0, slash), &pos_a);
    b = std::stod(text.substr(slash + 1), &pos_b);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + " value '" + text + "' is not numeric");
  }
  if (pos_a != slash || pos_b != text.size() - slash - 1 || a <= 0 || b <= 0)
    throw std::invalid_argument(what + " value '" + text + "' must be two positive numbers");
  return {a, b};
}

RunConfig apply_axis_value(const RunConfig& base, const std::string& axis,
                           const std::string& value) {
  RunConfig cfg = base;
  if (axis == "timeout_minutes") {
    cfg.policy = "timeout:" + value;
  } else if (axis == "switch_times") {
    const auto [off_min, on_min] = parse_pair(value, "switch_times");
    cfg.power.t_switch_off = off_min * 60.0;
    cfg.power.t_switch_on = on_min * 60.0;
  } else if (axis == "power_levels") {
    const auto [sleep_w, active_w] = parse_pair(value, "power_levels");
    cfg.power.p_active = active_w;
    cfg.power.p_switch_on = active_w;
    cfg.power.p_sleep = sleep_w;
    cfg.power.p_switch_off = sleep_w;
  } else if (axis == "node_counts") {
    std::size_t pos = 0;
    int n = 0;
    try {
      n = std::stoi(value, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("node_counts value '" + value + "' is not an integer");
    }
    if (pos != value.size() || n < 1)
      throw std::invalid_argument("node_counts value '" + value + "' must be a positive integer");
    cfg.node_count = n;
  } else if (axis == "curriculum") {
    // Values name trained checkpoints; the row evaluates that agent.
    cfg.policy = "agent:" + value;
    cfg.wakeup_mode = "agent";
  } else {
    throw std::invalid_argument("unknown sweep axis '" + axis + "'");
  }
  return cfg;
}

std::string sanitize_label(std::string label) {
  for (char& c : label)
    if (c == '>' || c == '/' || c == ' ') c = '-';
  return label;
}

std::string optional_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("");
}

void write_config_comments(std::ostream& os, const std::map<std::string, std::string>& config) {
  for (const auto& [k, v] : config) os << "# " << k << " = " << v << "\n";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

SimConfig to_sim_config(const RunConfig& cfg) {
  SimConfig sim;
  sim.node_count = cfg.node_count;
  sim.power = cfg.power;
  sim.dt = cfg.dt_seconds;
  sim.wakeup_mode = parse_wakeup_mode(cfg.wakeup_mode);
  sim.failsafe = cfg.failsafe;
  sim.failsafe_wait = cfg.failsafe_wait_seconds;
  if (cfg.horizon_days) sim.horizon_cap = *cfg.horizon_days * 86400.0;
  return sim;
}

std::map<std::string, std::string> effective_config(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  m["policy"] = cfg.policy;
  m["node_count"] = std::to_string(cfg.node_count);
  m["power.p_active"] = format_double(cfg.power.p_active);
  m["power.p_sleep"] = format_double(cfg.power.p_sleep);
  m["power.p_switch_on"] = format_double(cfg.power.p_switch_on);
  m["power.p_switch_off"] = format_double(cfg.power.p_switch_off);
  m["power.t_switch_on"] = format_double(cfg.power.t_switch_on);
  m["power.t_switch_off"] = format_double(cfg.power.t_switch_off);
  m["dt_seconds"] = format_double(cfg.dt_seconds);
  m["wakeup_mode"] = cfg.wakeup_mode;
  m["failsafe"] = cfg.failsafe ? "true" : "false";
  m["failsafe_wait_seconds"] = format_double(cfg.failsafe_wait_seconds);
  m["alpha"] = format_double(cfg.alpha);
  m["beta"] = format_double(cfg.beta);
  m["seed"] = std::to_string(cfg.seed);
  m["horizon_days"] = cfg.horizon_days ? format_double(*cfg.horizon_days) : "default";
  m["agent_mode"] = cfg.agent_mode;
  return m;
}

RunArtifacts run_simulation(const WorkloadTrace& trace, const RunConfig& cfg,
                            const std::string& output_dir) {
  auto policy = parse_policy(cfg.policy, cfg.seed, parse_agent_mode(cfg.agent_mode));
  const SimConfig sim = to_sim_config(cfg);

  EpisodeRunner runner(trace, policy.get(), sim, cfg.alpha, cfg.beta);
  runner.run();

  RunArtifacts out;
  out.result = runner.take_result();
  out.metrics = compute_metrics(out.result);

  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    const auto config = effective_config(cfg);
    write_text_file(output_dir + "/metrics.json", metrics_to_json(out.metrics, config));
    write_steps_csv(output_dir + "/steps.csv", out.result, config);
    write_jobs_csv(output_dir + "/jobs.csv", out.result, config);
  }
  return out;
}

std::vector<std::string> default_axis_values(const std::string& axis) {
  if (axis == "timeout_minutes")
    return {"5", "10", "15", "20", "25", "30", "35", "40", "45", "50", "55", "60"};
  if (axis == "switch_times") return {"30/45", "20/30", "10/15"};
  if (axis == "power_levels") return {"90/190", "9/100"};
  if (axis == "node_counts") return {"128", "160", "256"};
  if (axis == "curriculum") return {};
  throw std::invalid_argument("unknown sweep axis '" + axis + "'");
}

std::vector<SweepRow> run_sweep(const WorkloadTrace& trace, const SweepSpec& spec) {
  std::vector<std::string> values = spec.values;
  if (values.empty()) values = default_axis_values(spec.axis);
  if (values.empty()) throw std::invalid_argument("sweep values list is empty");

  // The timeout axis already determines the policy; other axes cross every
  // value with every policy.
  std::vector<std::string> policies = spec.policies;
  if (spec.axis == "timeout_minutes" || spec.axis == "curriculum")
    policies = {""};
  else if (policies.empty())
    policies = {spec.base.policy};

  struct Entry {
    std::string value;
    std::string policy;
  };
  std::vector<Entry> entries;
  for (const auto& v : values)
    for (const auto& p : policies) entries.push_back({v, p});

  std::vector<SweepRow> rows(entries.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      SweepRow row;
      row.axis_value = entries[i].value;
      try {
        RunConfig cfg = apply_axis_value(spec.base, spec.axis, entries[i].value);
        if (!entries[i].policy.empty()) cfg.policy = entries[i].policy;
        cfg.seed = spec.base.seed + i;
        row.policy = cfg.policy;
        row.metrics = run_simulation(trace, cfg).metrics;
      } catch (const std::exception& e) {
        if (row.policy.empty()) row.policy = entries[i].policy;
        row.error = e.what();
      }
      rows[i] = std::move(row);
    }
  };

  int workers = spec.workers > 0 ? spec.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(entries.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return rows;
}

void write_sweep_csv(const std::string& path, const std::string& axis,
                     const std::vector<SweepRow>& rows,
                     const std::map<std::string, std::string>& config) {
  std::ostringstream os;
  write_config_comments(os, config);
  os << axis << ",policy,wasted_energy,total_energy,avg_wait,job_filling_rate,shutdown_count,error\n";
  for (const auto& row : rows) {
    os << row.axis_value << "," << row.policy << ",";
    if (row.metrics) {
      const auto& m = *row.metrics;
      os << format_double(m.wasted_energy) << "," << format_double(m.total_energy) << ","
         << optional_csv(m.avg_wait) << "," << format_double(m.job_filling_rate) << ","
         << m.shutdown_count << ",";
    } else {
      os << ",,,,,";
    }
    os << row.error << "\n";
  }
  write_text_file(path, os.str());
}

std::vector<CurriculumResult> compare_curricula(const CurriculumTraces& traces,
                                                const WorkloadTrace& eval_trace,
                                                const SimConfig& sim_config,
                                                const TrainConfig& train_config,
                                                const std::string& checkpoint_dir) {
  struct Named {
    const char* label;
    const WorkloadTrace* trace;
  };
  const Named pool[3] = {{"sampled", &traces.sampled},
                         {"real", &traces.real},
                         {"synthetic", &traces.synthetic}};
  static const int kOrders[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

  SimConfig eval_config = sim_config;
  eval_config.wakeup_mode = WakeupMode::Agent;

  std::vector<CurriculumResult> out;
  auto evaluate = [&](const NetworkParams& params, const std::string& label,
                      std::vector<StageLog> stages) {
    AgentPolicy policy(params, AgentMode::Greedy, train_config.seed);
    SimulationResult result = run_episode(eval_trace, &policy, eval_config,
                                          train_config.alpha, train_config.beta);
    CurriculumResult row;
    row.label = label;
    row.metrics = compute_metrics(result);
    row.stages = std::move(stages);
    out.push_back(std::move(row));
    if (!checkpoint_dir.empty()) {
      std::filesystem::create_directories(checkpoint_dir);
      save_checkpoint(checkpoint_dir + "/" + sanitize_label(label) + ".ckpt", params,
                      train_config);
    }
  };

  for (const auto& order : kOrders) {
    CurriculumPlan plan;
    std::string label;
    for (int idx : order) {
      plan.stages.push_back({pool[idx].label, *pool[idx].trace});
      if (!label.empty()) label += '>';
      label += pool[idx].label;
    }
    NetworkParams params = init_params(train_config.seed, train_config.net);
    auto stages = train_curriculum(params, plan, sim_config, train_config);
    evaluate(params, label, std::move(stages));
  }

  // Control: no curriculum, the real trace alone for the same epoch budget.
  TrainConfig control_config = train_config;
  control_config.epochs_per_stage = train_config.epochs_per_stage * 3;
  CurriculumPlan control_plan;
  control_plan.stages.push_back({"real", traces.real});
  NetworkParams params = init_params(train_config.seed, train_config.net);
  auto stages = train_curriculum(params, control_plan, sim_config, control_config);
  evaluate(params, "no-curriculum", std::move(stages));
  return out;
}

void write_curricula_csv(const std::string& path, const std::vector<CurriculumResult>& rows,
                         const std::map<std::string, std::string>& config) {
  std::ostringstream os;
  write_config_comments(os, config);
  os << "curriculum,total_energy,wasted_energy,avg_wait,avg_slowdown,job_filling_rate\n";
  for (const auto& row : rows) {
    const auto& m = row.metrics;
    os << row.label << "," << format_double(m.total_energy) << ","
       << format_double(m.wasted_energy) << "," << optional_csv(m.avg_wait) << ","
       << optional_csv(m.avg_slowdown) << "," << format_double(m.job_filling_rate) << "\n";
  }
  write_text_file(path, os.str());
}

std::string metrics_to_json(const MetricsReport& metrics,
                            const std::map<std::string, std::string>& config) {
  nlohmann::json j;
  j["schema"] = "psm-metrics/1";
  j["config"] = config;
  nlohmann::json m;
  m["total_energy"] = metrics.total_energy;
  m["wasted_energy"] = metrics.wasted_energy;
  m["avg_wait"] = metrics.avg_wait ? nlohmann::json(*metrics.avg_wait) : nlohmann::json();
  m["max_wait"] = metrics.max_wait ? nlohmann::json(*metrics.max_wait) : nlohmann::json();
  m["avg_response"] =
      metrics.avg_response ? nlohmann::json(*metrics.avg_response) : nlohmann::json();
  m["avg_slowdown"] =
      metrics.avg_slowdown ? nlohmann::json(*metrics.avg_slowdown) : nlohmann::json();
  m["job_filling_rate"] = metrics.job_filling_rate;
  m["shutdown_count"] = metrics.shutdown_count;
  m["completed_jobs"] = metrics.completed_jobs;
  m["termination_time"] = metrics.termination_time;
  m["truncated"] = metrics.truncated;
  m["failsafe_triggers"] = metrics.failsafe_triggers;
  m["dropped_jobs"] = metrics.dropped_jobs;
  j["metrics"] = m;
  return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.contains("schema") || j["schema"] != "psm-metrics/1")
    throw std::runtime_error("not a psm-metrics/1 document");
  const auto& m = j.at("metrics");
  MetricsReport out;
  out.total_energy = m.at("total_energy").get<double>();
  out.wasted_energy = m.at("wasted_energy").get<double>();
  auto opt = [&m](const char* key) -> std::optional<double> {
    if (!m.contains(key) || m.at(key).is_null()) return std::nullopt;
    return m.at(key).get<double>();
  };
  out.avg_wait = opt("avg_wait");
  out.max_wait = opt("max_wait");
  out.avg_response = opt("avg_response");
  out.avg_slowdown = opt("avg_slowdown");
  out.job_filling_rate = m.at("job_filling_rate").get<double>();
  out.shutdown_count = m.at("shutdown_count").get<std::int64_t>();
  out.completed_jobs = m.at("completed_jobs").get<std::int64_t>();
  out.termination_time = m.at("termination_time").get<double>();
  out.truncated = m.at("truncated").get<bool>();
  out.failsafe_triggers = m.at("failsafe_triggers").get<int>();
  out.dropped_jobs = m.at("dropped_jobs").get<int>();
  return out;
}

void write_radar_csv(const std::string& path, const std::vector<std::string>& labels,
                     const std::vector<MetricsReport>& reports) {
  if (labels.size() != reports.size())
    throw std::invalid_argument("radar labels and reports differ in length");
  const auto scores = normalize_radar(reports);
  std::ostringstream os;
  os << "label,max_wait,avg_response,avg_slowdown,job_filling_rate\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    os << labels[i] << "," << format_double(scores[i].max_wait) << ","
       << format_double(scores[i].avg_response) << ","
       << format_double(scores[i].avg_slowdown) << ","
       << format_double(scores[i].job_filling_rate) << "\n";
  }
  write_text_file(path, os.str());
}

void write_steps_csv(const std::string& path, const SimulationResult& result,
                     const std::map<std::string, std::string>& config) {
  std::ostringstream os;
  write_config_comments(os, config);
  os << "step,time,queue_length,arrivals,r1,r2,j,reward,cumulative_wasted,cumulative_total\n";
  for (const auto& s : result.snapshots) {
    os << s.step << "," << format_double(s.time) << "," << s.queue_length << ","
       << s.interval_arrivals << "," << format_double(s.r1) << "," << format_double(s.r2) << ","
       << format_double(s.j) << "," << format_double(s.reward) << ","
       << format_double(s.cumulative_wasted) << "," << format_double(s.cumulative_total) << "\n";
  }
  write_text_file(path, os.str());
}

void write_jobs_csv(const std::string& path, const SimulationResult& result,
                    const std::map<std::string, std::string>& config) {
  std::ostringstream os;
  write_config_comments(os, config);
  os << "id,submit_time,start_time,finish_time,wait,runtime,requested_nodes,slowdown\n";
  for (const auto& c : result.completed) {
    const double wait = c.start_time - c.job.submit_time;
    const double response = c.finish_time - c.job.submit_time;
    os << c.job.id << "," << format_double(c.job.submit_time) << ","
       << format_double(c.start_time) << "," << format_double(c.finish_time) << ","
       << format_double(wait) << "," << format_double(c.job.runtime) << ","
       << c.job.requested_nodes << "," << format_double(response / std::max(c.job.runtime, 1.0))
       << "\n";
  }
  write_text_file(path, os.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

}  // namespace psm
