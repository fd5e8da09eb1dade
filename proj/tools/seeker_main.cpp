// seeker: train the model bundle, run trace-driven simulations, generate
// harvest traces and re-audit event logs.
//
// Exit codes: 0 success, 1 runtime failure (including failed audits),
// 2 bad usage or configuration.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "seeker/bundle.hpp"
#include "seeker/config.hpp"
#include "seeker/energy.hpp"
#include "seeker/ingest.hpp"
#include "seeker/sim.hpp"
#include "seeker/synthetic.hpp"
#include "seeker/train.hpp"

namespace {

using namespace seeker;

struct TrainCli {
  std::string config_path;
  std::vector<std::string> data_paths;
  std::string out_path = "out/bundle.skmb";
  bool synthetic = false;
  std::string synth_dir = "out/synth-data";
};

struct SimulateCli {
  std::string config_path;
  std::string bundle_path = "out/bundle.skmb";
  std::vector<std::string> data_paths;
  std::string policy;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  int jobs = 1;
  bool synthetic = false;
  std::string synth_dir = "out/synth-data";
};

struct TraceGenCli {
  std::string spec = "rf:4,2,8";
  long ticks = 10000;
  std::uint64_t seed = 0;
  std::string out_path = "out/trace.txt";
};

struct ReportCli {
  std::string log_path;
};

config::RunConfig load_config(const std::string& path) {
  return path.empty() ? config::parse("{}") : config::load(path);
}

std::vector<std::string> resolve_paths(const config::RunConfig& cfg,
                                       const std::vector<std::string>& cli_paths, bool synthetic,
                                       const std::string& synth_dir) {
  if (!cli_paths.empty()) return cli_paths;
  if (!cfg.dataset_paths.empty()) return cfg.dataset_paths;
  if (synthetic) {
    std::cerr << "generating synthetic corpus under " << synth_dir << "\n";
    return synthetic::write_dataset(synth_dir, {});
  }
  throw config::ConfigError(
      "no dataset: give dataset.paths in the config, --data, or --synthetic");
}

std::vector<SampleWindow> ingest_windows(const config::RunConfig& cfg,
                                         const std::vector<std::string>& paths, int window_length,
                                         int stride) {
  const auto recs = ingest::load_dataset(paths, cfg.schema);
  long rejected = 0;
  for (const auto& r : recs) rejected += static_cast<long>(r.diags.size());
  if (rejected > 0) std::cerr << "ingest: skipped " << rejected << " unparseable rows\n";
  return ingest::extract_windows(recs, cfg.schema, window_length, stride);
}

energy::HarvestTrace make_trace(const std::string& spec, std::uint64_t seed, long ticks) {
  if (spec.rfind("file:", 0) == 0) return energy::load_trace(spec.substr(5), ticks);
  return energy::gen_trace(energy::TraceSpec::parse(spec, seed), ticks);
}

int cmd_train(const TrainCli& cli) {
  const auto cfg = load_config(cli.config_path);
  const auto paths = resolve_paths(cfg, cli.data_paths, cli.synthetic, cli.synth_dir);
  auto windows = ingest_windows(cfg, paths, cfg.window_length, cfg.stride());
  std::cerr << "ingested " << windows.size() << " windows from " << paths.size() << " files\n";

  const auto art = train::build(std::move(windows), cfg.schema, cfg.window_length, cfg.stride(),
                                cfg.to_train_config());

  if (!cli.out_path.empty()) {
    const auto dir = std::filesystem::path(cli.out_path).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    bundle::save(art.bundle, cli.out_path);
  }

  std::cout << "bundle=" << cli.out_path << "\n";
  std::cout << "classes=" << art.bundle.classes() << "\n";
  std::cout << "groups train/val/test=" << art.split.train.size() << "/" << art.split.val.size()
            << "/" << art.split.test.size() << "\n";
  std::printf("float_train_accuracy=%.4f\n", art.float_report.train_accuracy);
  for (int s = 0; s < art.bundle.num_sensors; ++s)
    std::printf("sensor %d (%s) val_accuracy=%.4f\n", s, art.bundle.sensor_names[s].c_str(),
                art.sensor_val_accuracy[s]);
  std::cout << "lut k_by_class=";
  for (std::size_t c = 0; c < art.bundle.lut.k_by_class.size(); ++c)
    std::cout << (c ? "," : "") << art.bundle.lut.k_by_class[c];
  std::cout << "\n";
  std::printf("model_digest=%016llx\n",
              static_cast<unsigned long long>(classify::model_digest(art.bundle.float_model)));
  return 0;
}

// One simulation run's artifacts, produced off-thread and written in order.
struct RunOutput {
  std::uint64_t seed = 0;
  sim::SimResult result;
};

int cmd_simulate(const SimulateCli& cli) {
  const auto cfg = load_config(cli.config_path);
  const auto models = bundle::load(cli.bundle_path);
  const auto paths = resolve_paths(cfg, cli.data_paths, cli.synthetic, cli.synth_dir);

  auto windows = ingest_windows(cfg, paths, models.window_length, models.stride);
  ingest::apply_label_map(windows, models.label_map);
  const auto groups = ingest::group_windows(windows, models.num_sensors);
  const auto split = ingest::split_groups(groups, cfg.split_ratios, cfg.split_seed);

  std::vector<ingest::WindowGroup> replay;
  const auto pick = [&](const std::vector<int>& ids) {
    for (int g : ids) replay.push_back(groups[g]);
  };
  if (cfg.replay == "train")
    pick(split.train);
  else if (cfg.replay == "val")
    pick(split.val);
  else if (cfg.replay == "test")
    pick(split.test);
  else
    replay = groups;
  if (replay.empty()) throw config::ConfigError("simulate: replay selection is empty");

  auto params = cfg.to_sim_params();
  if (cli.policy == "seeker") params.policy = sim::PolicyKind::Seeker;
  else if (cli.policy == "origin") params.policy = sim::PolicyKind::Origin;
  else if (!cli.policy.empty())
    throw config::ConfigError("simulate: --policy must be seeker|origin");

  std::vector<std::uint64_t> seeds = cli.seeds;
  if (seeds.empty()) seeds.push_back(cfg.sim_seed);
  const long ticks = static_cast<long>(replay.size()) * models.stride;

  std::vector<RunOutput> outputs(seeds.size());
  const int jobs = std::max(1, cli.jobs);

  const auto run_one = [&](std::size_t idx) {
    auto p = params;
    p.seed = seeds[idx];
    std::vector<energy::HarvestTrace> traces;
    for (int s = 0; s < models.num_sensors; ++s)
      traces.push_back(make_trace(cfg.trace_for(models.sensor_names[s]),
                                  mix_seed(cfg.trace_seed, mix_seed(seeds[idx], s)), ticks));
    outputs[idx].seed = seeds[idx];
    outputs[idx].result = sim::run_simulation(models, windows, replay, traces, p);
  };

  if (jobs <= 1 || seeds.size() == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> cursor{0};
    for (int j = 0; j < jobs; ++j)
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= seeds.size()) return;
          run_one(i);
        }
      });
    for (auto& w : workers) w.join();
  }

  std::filesystem::create_directories(cli.out_dir);
  for (const auto& out : outputs) {
    const std::string base = cli.out_dir + "/" + sim::policy_name(params.policy) + "-seed" +
                             std::to_string(out.seed);
    {
      std::ofstream f(base + "-events.txt");
      f << out.result.log_text;
    }
    {
      std::ofstream f(base + "-metrics.txt");
      f << sim::metrics_text(out.result.metrics);
    }
    const auto& m = out.result.metrics;
    std::printf("seed=%llu policy=%s delivery=%.4f strict_acc=%.4f acc_on_delivered=%.4f "
                "bytes_ratio=%.4f ens_acc=%.4f\n",
                static_cast<unsigned long long>(out.seed), sim::policy_name(params.policy),
                m.delivery_rate(), m.strict_accuracy(), m.accuracy_on_delivered(), m.bytes_ratio(),
                m.ensemble_accuracy_on_completed());
  }
  std::cerr << "wrote logs and metrics under " << cli.out_dir << "\n";
  return 0;
}

int cmd_trace_gen(const TraceGenCli& cli) {
  const auto trace = make_trace(cli.spec, cli.seed, cli.ticks);
  const auto dir = std::filesystem::path(cli.out_path).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  energy::save_trace(cli.out_path, trace);
  double total = 0.0;
  for (double v : trace.income) total += v;
  std::printf("trace=%s ticks=%zu mean_income=%.6f\n", cli.out_path.c_str(), trace.income.size(),
              trace.income.empty() ? 0.0 : total / trace.income.size());
  return 0;
}

int cmd_report(const ReportCli& cli) {
  std::ifstream in(cli.log_path);
  if (!in) throw std::runtime_error("report: cannot open " + cli.log_path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto parsed = sim::parse_event_log(text);
  const auto metrics = sim::compute_metrics(parsed.events, parsed.ensembles, parsed.sensors,
                                            parsed.raw_bytes, parsed.costs, parsed.durations);
  std::cout << sim::metrics_text(metrics);
  const auto violations = sim::priority_violations(parsed);
  if (!violations.empty()) {
    std::cerr << violations.size() << " priority violations:\n";
    for (const auto& v : violations) std::cerr << "  " << v << "\n";
    return 1;
  }
  std::cout << "priority_violations=0\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"energy-aware sensing simulator and model toolkit"};
  app.require_subcommand(1);

  TrainCli train_cli;
  auto* train_cmd = app.add_subcommand("train", "ingest a dataset and train the model bundle");
  train_cmd->add_option("--config", train_cli.config_path, "run configuration (JSON)");
  train_cmd->add_option("--data", train_cli.data_paths, "dataset files (overrides config paths)");
  train_cmd->add_option("--out", train_cli.out_path, "bundle output path");
  train_cmd->add_flag("--synthetic", train_cli.synthetic, "generate a synthetic corpus if no data");
  train_cmd->add_option("--synth-dir", train_cli.synth_dir, "where the synthetic corpus goes");

  SimulateCli sim_cli;
  auto* sim_cmd = app.add_subcommand("simulate", "replay windows against harvest traces");
  sim_cmd->add_option("--config", sim_cli.config_path, "run configuration (JSON)");
  sim_cmd->add_option("--bundle", sim_cli.bundle_path, "trained bundle path");
  sim_cmd->add_option("--data", sim_cli.data_paths, "dataset files (overrides config paths)");
  sim_cmd->add_option("--policy", sim_cli.policy, "seeker|origin (overrides config)");
  sim_cmd->add_option("--seed", sim_cli.seeds, "simulation seed (repeatable)");
  sim_cmd->add_option("--out", sim_cli.out_dir, "output directory");
  sim_cmd->add_option("--jobs", sim_cli.jobs, "parallel runs across seeds");
  sim_cmd->add_flag("--synthetic", sim_cli.synthetic, "generate a synthetic corpus if no data");
  sim_cmd->add_option("--synth-dir", sim_cli.synth_dir, "where the synthetic corpus goes");

  TraceGenCli trace_cli;
  auto* trace_cmd = app.add_subcommand("trace-gen", "generate a harvest trace file");
  trace_cmd->add_option("--spec", trace_cli.spec, "constant:L | rf:I,ON,OFF | piezo:A,P,D | file:PATH");
  trace_cmd->add_option("--ticks", trace_cli.ticks, "trace length in ticks");
  trace_cmd->add_option("--seed", trace_cli.seed, "generator seed");
  trace_cmd->add_option("--out", trace_cli.out_path, "trace output path");

  ReportCli report_cli;
  auto* report_cmd = app.add_subcommand("report", "recompute metrics and audit an event log");
  report_cmd->add_option("log", report_cli.log_path, "event log path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_cli);
    if (sim_cmd->parsed()) return cmd_simulate(sim_cli);
    if (trace_cmd->parsed()) return cmd_trace_gen(trace_cli);
    if (report_cmd->parsed()) return cmd_report(report_cli);
  } catch (const config::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
