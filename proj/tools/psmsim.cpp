#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psm/agent.hpp"
#include "psm/calendar.hpp"
#include "psm/experiment.hpp"
#include "psm/reference.hpp"
#include "psm/workload.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

psm::WorkloadTrace load_trace(const std::string& path, const std::string& label = "") {
  psm::ParseResult parsed = psm::parse_swf(read_file(path));
  if (parsed.dropped_records > 0)
    std::cerr << path << ": dropped " << parsed.dropped_records << " unusable records\n";
  if (!label.empty()) parsed.trace.label = label;
  return parsed.trace;
}

void write_trace(const std::string& path, const psm::WorkloadTrace& trace,
                 const std::map<std::string, std::string>& provenance) {
  std::ostringstream os;
  for (const auto& [k, v] : provenance) os << "; " << k << " = " << v << "\n";
  os << psm::write_swf(trace);
  psm::write_text_file(path, os.str());
  std::cout << path << ": " << trace.size() << " jobs\n";
}

struct SimFlags {
  psm::RunConfig run;
  double switch_on_minutes = 45.0;
  double switch_off_minutes = 30.0;
  double failsafe_hours = 24.0;
  double horizon_days = -1.0;

  void finalize() {
    run.power.t_switch_on = switch_on_minutes * 60.0;
    run.power.t_switch_off = switch_off_minutes * 60.0;
    run.failsafe_wait_seconds = failsafe_hours * 3600.0;
    if (horizon_days > 0) run.horizon_days = horizon_days;
  }
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--nodes", f.run.node_count, "Cluster node count")->capture_default_str();
  cmd->add_option("--dt", f.run.dt_seconds, "Decision interval in seconds")
      ->capture_default_str();
  cmd->add_option("--wakeup", f.run.wakeup_mode, "Wake-up mode: reactive or agent")
      ->capture_default_str();
  cmd->add_flag("--failsafe", f.run.failsafe,
                "Wake sleeping nodes reactively once the queue head has waited too long");
  cmd->add_option("--failsafe-hours", f.failsafe_hours,
                  "Queue-head wait that trips the failsafe")
      ->capture_default_str();
  cmd->add_option("--alpha", f.run.alpha, "Energy weight in the reward")->capture_default_str();
  cmd->add_option("--beta", f.run.beta, "Waiting weight in the reward")->capture_default_str();
  cmd->add_option("--seed", f.run.seed, "Random seed")->capture_default_str();
  cmd->add_option("--horizon-days", f.horizon_days,
                  "Hard stop after this many days (default: last submission + 30 days)");
  cmd->add_option("--active-watts", f.run.power.p_active, "Active node power")
      ->capture_default_str();
  cmd->add_option("--sleep-watts", f.run.power.p_sleep, "Sleeping node power")
      ->capture_default_str();
  cmd->add_option("--switch-on-watts", f.run.power.p_switch_on, "Power while switching on")
      ->capture_default_str();
  cmd->add_option("--switch-off-watts", f.run.power.p_switch_off, "Power while switching off")
      ->capture_default_str();
  cmd->add_option("--switch-on-minutes", f.switch_on_minutes, "Switch-on duration")
      ->capture_default_str();
  cmd->add_option("--switch-off-minutes", f.switch_off_minutes, "Switch-off duration")
      ->capture_default_str();
}

struct TrainFlags {
  psm::TrainConfig cfg;
  double segment_days = 7.0;

  void finalize() {
    cfg.episode_segment_seconds = segment_days * 86400.0;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--lr", f.cfg.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--gamma", f.cfg.gamma, "Discount factor")->capture_default_str();
  cmd->add_option("--clip", f.cfg.grad_clip_norm, "Gradient global-norm clip")
      ->capture_default_str();
  cmd->add_option("--rollout", f.cfg.rollout_length, "Update batch length N_b")
      ->capture_default_str();
  cmd->add_option("--epochs", f.cfg.epochs_per_stage, "Epochs per curriculum stage")
      ->capture_default_str();
  cmd->add_option("--optimizer", f.cfg.optimizer, "sgd or adam")->capture_default_str();
  cmd->add_option("--segment-days", f.segment_days, "Episode segment length in days")
      ->capture_default_str();
  cmd->add_option("--embed", f.cfg.net.embed_dim, "Encoder embedding width")
      ->capture_default_str();
  cmd->add_option("--heads", f.cfg.net.num_heads, "Attention heads")->capture_default_str();
  cmd->add_option("--blocks", f.cfg.net.num_blocks, "Encoder blocks")->capture_default_str();
}

std::map<std::string, std::string> train_config_map(const psm::TrainConfig& cfg,
                                                    const psm::SimConfig& sim) {
  std::map<std::string, std::string> m;
  m["train.learning_rate"] = psm::format_double(cfg.learning_rate);
  m["train.gamma"] = psm::format_double(cfg.gamma);
  m["train.grad_clip_norm"] = psm::format_double(cfg.grad_clip_norm);
  m["train.rollout_length"] = std::to_string(cfg.rollout_length);
  m["train.alpha"] = psm::format_double(cfg.alpha);
  m["train.beta"] = psm::format_double(cfg.beta);
  m["train.epochs_per_stage"] = std::to_string(cfg.epochs_per_stage);
  m["train.seed"] = std::to_string(cfg.seed);
  m["train.optimizer"] = cfg.optimizer;
  m["train.segment_seconds"] = psm::format_double(cfg.episode_segment_seconds);
  m["train.embed_dim"] = std::to_string(cfg.net.embed_dim);
  m["train.num_heads"] = std::to_string(cfg.net.num_heads);
  m["train.num_blocks"] = std::to_string(cfg.net.num_blocks);
  m["sim.node_count"] = std::to_string(sim.node_count);
  m["sim.dt"] = psm::format_double(sim.dt);
  m["sim.wakeup_mode"] = sim.wakeup_mode == psm::WakeupMode::Agent ? "agent" : "reactive";
  m["sim.failsafe"] = sim.failsafe ? "true" : "false";
  m["sim.failsafe_wait"] = psm::format_double(sim.failsafe_wait);
  m["sim.p_active"] = psm::format_double(sim.power.p_active);
  m["sim.p_sleep"] = psm::format_double(sim.power.p_sleep);
  m["sim.t_switch_on"] = psm::format_double(sim.power.t_switch_on);
  m["sim.t_switch_off"] = psm::format_double(sim.power.t_switch_off);
  return m;
}

void write_train_log(const std::string& path, const std::vector<psm::StageLog>& stages,
                     const std::map<std::string, std::string>& config) {
  std::ostringstream os;
  for (const auto& [k, v] : config) os << "# " << k << " = " << v << "\n";
  os << "stage,label,epoch,episodes,updates,mean_reward,actor_loss,critic_loss,grad_norm,"
        "wasted_energy\n";
  for (std::size_t s = 0; s < stages.size(); ++s) {
    for (const auto& e : stages[s].epochs) {
      os << s << "," << stages[s].label << "," << e.epoch << "," << e.episodes << ","
         << e.updates << "," << psm::format_double(e.mean_reward) << ","
         << psm::format_double(e.actor_loss) << "," << psm::format_double(e.critic_loss) << ","
         << psm::format_double(e.grad_norm) << "," << psm::format_double(e.wasted_energy)
         << "\n";
    }
  }
  psm::write_text_file(path, os.str());
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct GenSampledOpts {
  std::string input, output;
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  double ratio = 0.8;
  bool whole = false;
};

struct GenSyntheticOpts {
  std::string input, output, start;
  int days = 365;
  std::uint64_t seed = 1;
  double ratio = 0.8;
  bool whole = false;
};

struct GenReferenceOpts {
  std::string preset = "nasa";
  std::string output;
  std::string split = "all";
  std::uint64_t seed = 1;
  double ratio = 0.8;
};

struct ValidateOpts {
  std::string input, reference, output;
  double ratio = 0.8;
};

struct SimulateOpts {
  std::string input, output_dir;
  SimFlags sim;
};

struct SweepOpts {
  std::string input, axis, output;
  std::string values, policies;
  int workers = 0;
  SimFlags sim;
};

struct TrainOpts {
  std::string sampled, real, synthetic, order = "sampled,real,synthetic", output_dir;
  TrainFlags train;
  SimFlags sim;
};

struct CompareOpts {
  std::string sampled, real, synthetic, eval, output, checkpoint_dir;
  TrainFlags train;
  SimFlags sim;
};

struct ReportOpts {
  std::vector<std::string> inputs;
  std::string labels, output;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HPC cluster power-state management: simulation, datasets, training"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file (sections per command)");
  argv = app.ensure_utf8(argv);

  // gen-sampled
  auto gs = std::make_shared<GenSampledOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "gen-sampled", "Resample a trace with exponential inter-arrival times");
    cmd->add_option("--input", gs->input, "Source SWF trace")->required();
    cmd->add_option("--output", gs->output, "Output SWF path")->required();
    cmd->add_option("--count", gs->count, "Jobs to generate")->capture_default_str();
    cmd->add_option("--seed", gs->seed, "Random seed")->capture_default_str();
    cmd->add_option("--ratio", gs->ratio, "Train split ratio of the source")
        ->capture_default_str();
    cmd->add_flag("--whole-trace", gs->whole, "Sample from the whole trace, not the train split");
    cmd->callback([gs]() {
      psm::WorkloadTrace source = load_trace(gs->input);
      if (!gs->whole) source = psm::split_trace(source, gs->ratio).first;
      psm::WorkloadTrace out = psm::generate_sampled(source, gs->count, gs->seed);
      write_trace(gs->output, out,
                  {{"generator", "sampled"},
                   {"source", gs->input},
                   {"count", std::to_string(gs->count)},
                   {"seed", std::to_string(gs->seed)},
                   {"mean_interarrival", psm::format_double(psm::mean_interarrival(source))}});
    });
  }

  // gen-synthetic
  auto gy = std::make_shared<GenSyntheticOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "gen-synthetic", "Generate a trace from weekly/daily submission patterns");
    cmd->add_option("--input", gy->input, "Source SWF trace")->required();
    cmd->add_option("--output", gy->output, "Output SWF path")->required();
    cmd->add_option("--days", gy->days, "Days to generate")->capture_default_str();
    cmd->add_option("--seed", gy->seed, "Random seed")->capture_default_str();
    cmd->add_option("--ratio", gy->ratio, "Train split ratio of the source")
        ->capture_default_str();
    cmd->add_flag("--whole-trace", gy->whole,
                  "Extract patterns from the whole trace, not the train split");
    cmd->add_option("--start", gy->start, "Start date (YYYY-MM-DD HH:MM:SS; default source origin)");
    cmd->callback([gy]() {
      psm::WorkloadTrace source = load_trace(gy->input);
      std::int64_t origin = source.origin_timestamp.value_or(0);
      if (!gy->whole) source = psm::split_trace(source, gy->ratio).first;
      if (source.origin_timestamp) origin = *source.origin_timestamp;
      if (!gy->start.empty()) {
        const auto parsed = psm::parse_datetime(gy->start);
        if (!parsed) throw CLI::ValidationError("--start", "unparseable date '" + gy->start + "'");
        origin = *parsed;
      }
      psm::WorkloadPatterns patterns = psm::extract_patterns(source);
      psm::WorkloadTrace out = psm::generate_synthetic(patterns, origin, gy->days, gy->seed);
      write_trace(gy->output, out,
                  {{"generator", "synthetic"},
                   {"source", gy->input},
                   {"days", std::to_string(gy->days)},
                   {"seed", std::to_string(gy->seed)},
                   {"start", psm::format_datetime(origin)}});
    });
  }

  // gen-reference
  auto gr = std::make_shared<GenReferenceOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "gen-reference", "Generate the built-in reference workload (stand-in archive trace)");
    cmd->add_option("--preset", gr->preset, "nasa or mini")->capture_default_str();
    cmd->add_option("--output", gr->output, "Output SWF path")->required();
    cmd->add_option("--seed", gr->seed, "Random seed")->capture_default_str();
    cmd->add_option("--split", gr->split, "all, train or test")->capture_default_str();
    cmd->add_option("--ratio", gr->ratio, "Split ratio")->capture_default_str();
    cmd->callback([gr]() {
      psm::ReferencePreset preset;
      if (gr->preset == "nasa")
        preset = psm::nasa_like_preset();
      else if (gr->preset == "mini")
        preset = psm::mini_preset();
      else
        throw CLI::ValidationError("--preset", "unknown preset '" + gr->preset + "'");
      psm::WorkloadTrace trace = psm::make_reference_trace(preset, gr->seed);
      if (gr->split == "train")
        trace = psm::split_trace(trace, gr->ratio).first;
      else if (gr->split == "test")
        trace = psm::split_trace(trace, gr->ratio).second;
      else if (gr->split != "all")
        throw CLI::ValidationError("--split", "expected all, train or test");
      write_trace(gr->output, trace,
                  {{"generator", "reference"},
                   {"preset", gr->preset},
                   {"seed", std::to_string(gr->seed)},
                   {"split", gr->split}});
    });
  }

  // validate-dataset
  auto vd = std::make_shared<ValidateOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "validate-dataset", "Distribution checks for a (generated) trace");
    cmd->add_option("--input", vd->input, "Trace to validate")->required();
    cmd->add_option("--reference", vd->reference,
                    "Source trace; patterns come from its train split");
    cmd->add_option("--ratio", vd->ratio, "Train split ratio of the reference")
        ->capture_default_str();
    cmd->add_option("--output", vd->output, "Write the JSON report here instead of stdout");
    cmd->callback([vd]() {
      psm::WorkloadTrace input = load_trace(vd->input);
      nlohmann::json j;
      j["schema"] = "psm-validate/1";
      j["input"]["path"] = vd->input;
      j["input"]["jobs"] = input.size();
      if (input.size() >= 2) {
        j["input"]["span_seconds"] =
            input.jobs.back().submit_time - input.jobs.front().submit_time;
        j["input"]["mean_interarrival"] = psm::mean_interarrival(input);
        auto [rmse, rel] = psm::validate_exponential(input);
        j["exponential_fit"]["cdf_rmse"] = rmse;
        j["exponential_fit"]["cdf_relative_rmse"] = rel;
      }
      if (!vd->reference.empty()) {
        psm::WorkloadTrace ref = load_trace(vd->reference);
        psm::WorkloadTrace train = psm::split_trace(ref, vd->ratio).first;
        psm::WorkloadPatterns patterns = psm::extract_patterns(train);
        psm::DatasetStats stats = psm::dataset_stats(input, patterns);
        j["vs_reference"]["path"] = vd->reference;
        j["vs_reference"]["jobsize_tv_distance"] = stats.jobsize_tv_distance;
        j["vs_reference"]["walltime_tv_distance"] = stats.walltime_tv_distance;
        j["vs_reference"]["reference_mean_interarrival"] = psm::mean_interarrival(train);
      }
      const std::string text = j.dump(2) + "\n";
      if (vd->output.empty())
        std::cout << text;
      else
        psm::write_text_file(vd->output, text);
    });
  }

  // simulate
  auto si = std::make_shared<SimulateOpts>();
  {
    CLI::App* cmd = app.add_subcommand("simulate", "Run one episode and write metrics");
    cmd->add_option("--input", si->input, "SWF trace")->required();
    cmd->add_option("--output-dir", si->output_dir,
                    "Directory for metrics.json, steps.csv, jobs.csv");
    cmd->add_option("--policy", si->sim.run.policy,
                    "always-on | timeout:<min> | random:<p_off> | agent:<checkpoint>")
        ->capture_default_str();
    cmd->add_option("--agent-mode", si->sim.run.agent_mode, "greedy or sample")
        ->capture_default_str();
    add_sim_flags(cmd, si->sim);
    cmd->callback([si]() {
      si->sim.finalize();
      psm::WorkloadTrace trace = load_trace(si->input);
      psm::RunArtifacts run = psm::run_simulation(trace, si->sim.run, si->output_dir);
      std::cout << psm::metrics_to_json(run.metrics, psm::effective_config(si->sim.run));
    });
  }

  // sweep
  auto sw = std::make_shared<SweepOpts>();
  {
    CLI::App* cmd = app.add_subcommand("sweep", "Run a sensitivity sweep over one axis");
    cmd->add_option("--input", sw->input, "SWF trace")->required();
    cmd->add_option("--axis", sw->axis,
                    "timeout_minutes | switch_times | power_levels | node_counts | curriculum")
        ->required();
    cmd->add_option("--values", sw->values, "Comma-separated axis values (default per axis)");
    cmd->add_option("--policies", sw->policies,
                    "Comma-separated policies crossed with the values (non-timeout axes)");
    cmd->add_option("--output", sw->output, "Output CSV path")->required();
    cmd->add_option("--workers", sw->workers, "Worker threads (default: hardware)")
        ->capture_default_str();
    cmd->add_option("--policy", sw->sim.run.policy, "Base policy")->capture_default_str();
    cmd->add_option("--agent-mode", sw->sim.run.agent_mode, "greedy or sample")
        ->capture_default_str();
    add_sim_flags(cmd, sw->sim);
    cmd->callback([sw]() {
      sw->sim.finalize();
      psm::WorkloadTrace trace = load_trace(sw->input);
      psm::SweepSpec spec;
      spec.base = sw->sim.run;
      spec.axis = sw->axis;
      spec.values = split_list(sw->values);
      spec.policies = split_list(sw->policies);
      spec.workers = sw->workers;
      std::vector<psm::SweepRow> rows = psm::run_sweep(trace, spec);
      auto config = psm::effective_config(spec.base);
      config["sweep.axis"] = spec.axis;
      config["sweep.values"] = sw->values.empty() ? "default" : sw->values;
      config["sweep.input"] = sw->input;
      psm::write_sweep_csv(sw->output, spec.axis, rows, config);
      int failed = 0;
      for (const auto& row : rows)
        if (!row.error.empty()) ++failed;
      std::cout << sw->output << ": " << rows.size() << " rows";
      if (failed > 0) std::cout << " (" << failed << " failed)";
      std::cout << "\n";
    });
  }

  // train
  auto tr = std::make_shared<TrainOpts>();
  {
    CLI::App* cmd = app.add_subcommand("train", "Train an agent along a curriculum");
    cmd->add_option("--sampled", tr->sampled, "Sampled-stage SWF trace");
    cmd->add_option("--real", tr->real, "Real-stage SWF trace");
    cmd->add_option("--synthetic", tr->synthetic, "Synthetic-stage SWF trace");
    cmd->add_option("--order", tr->order, "Comma-separated stage labels")
        ->capture_default_str();
    cmd->add_option("--output-dir", tr->output_dir, "Checkpoints and training log")
        ->required();
    tr->sim.run.wakeup_mode = "agent";
    add_train_flags(cmd, tr->train);
    add_sim_flags(cmd, tr->sim);
    cmd->callback([tr]() {
      tr->sim.finalize();
      tr->train.finalize();
      tr->train.cfg.seed = tr->sim.run.seed;
      tr->train.cfg.alpha = tr->sim.run.alpha;
      tr->train.cfg.beta = tr->sim.run.beta;
      const psm::SimConfig sim = psm::to_sim_config(tr->sim.run);

      psm::CurriculumPlan plan;
      for (const std::string& label : split_list(tr->order)) {
        std::string path;
        if (label == "sampled")
          path = tr->sampled;
        else if (label == "real")
          path = tr->real;
        else if (label == "synthetic")
          path = tr->synthetic;
        else
          throw CLI::ValidationError("--order", "unknown stage label '" + label + "'");
        if (path.empty())
          throw CLI::ValidationError("--" + label, "stage '" + label + "' has no trace");
        plan.stages.push_back({label, load_trace(path, label)});
      }

      std::filesystem::create_directories(tr->output_dir);
      psm::NetworkParams params = psm::init_params(tr->train.cfg.seed, tr->train.cfg.net);
      std::vector<psm::StageLog> stages =
          psm::train_curriculum(params, plan, sim, tr->train.cfg, tr->output_dir);
      psm::save_checkpoint(tr->output_dir + "/final.ckpt", params, tr->train.cfg);
      write_train_log(tr->output_dir + "/train_log.csv", stages,
                      train_config_map(tr->train.cfg, sim));
      std::cout << tr->output_dir << "/final.ckpt written\n";
    });
  }

  // compare-curricula
  auto cc = std::make_shared<CompareOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "compare-curricula", "Train all six stage orderings plus a no-curriculum control");
    cmd->add_option("--sampled", cc->sampled, "Sampled SWF trace")->required();
    cmd->add_option("--real", cc->real, "Real SWF trace")->required();
    cmd->add_option("--synthetic", cc->synthetic, "Synthetic SWF trace")->required();
    cmd->add_option("--eval", cc->eval, "Evaluation SWF trace")->required();
    cmd->add_option("--output", cc->output, "Ranking CSV path")->required();
    cmd->add_option("--checkpoint-dir", cc->checkpoint_dir, "Save each trained model here");
    cc->sim.run.wakeup_mode = "agent";
    add_train_flags(cmd, cc->train);
    add_sim_flags(cmd, cc->sim);
    cmd->callback([cc]() {
      cc->sim.finalize();
      cc->train.finalize();
      cc->train.cfg.seed = cc->sim.run.seed;
      cc->train.cfg.alpha = cc->sim.run.alpha;
      cc->train.cfg.beta = cc->sim.run.beta;
      const psm::SimConfig sim = psm::to_sim_config(cc->sim.run);

      psm::CurriculumTraces traces;
      traces.sampled = load_trace(cc->sampled, "sampled");
      traces.real = load_trace(cc->real, "real");
      traces.synthetic = load_trace(cc->synthetic, "synthetic");
      psm::WorkloadTrace eval_trace = load_trace(cc->eval);

      std::vector<psm::CurriculumResult> rows = psm::compare_curricula(
          traces, eval_trace, sim, cc->train.cfg, cc->checkpoint_dir);
      auto config = train_config_map(cc->train.cfg, sim);
      config["eval.trace"] = cc->eval;
      psm::write_curricula_csv(cc->output, rows, config);
      std::cout << cc->output << ": " << rows.size() << " models\n";
    });
  }

  // report
  auto rp = std::make_shared<ReportOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "report", "Normalize metrics files onto a common radar scale");
    cmd->add_option("inputs", rp->inputs, "metrics.json files")->required()->expected(-1);
    cmd->add_option("--labels", rp->labels, "Comma-separated row labels (default: file stems)");
    cmd->add_option("--output", rp->output, "Output CSV path")->required();
    cmd->callback([rp]() {
      std::vector<psm::MetricsReport> reports;
      std::vector<std::string> labels = split_list(rp->labels);
      for (const std::string& path : rp->inputs)
        reports.push_back(psm::metrics_from_json(read_file(path)));
      if (labels.empty()) {
        for (const std::string& path : rp->inputs)
          labels.push_back(std::filesystem::path(path).parent_path().filename().string() +
                           "/" + std::filesystem::path(path).stem().string());
      }
      psm::write_radar_csv(rp->output, labels, reports);
      std::cout << rp->output << ": " << reports.size() << " rows\n";
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
