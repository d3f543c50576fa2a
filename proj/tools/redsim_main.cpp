// redsim command-line interface: scenario generation, training, evaluation,
// trace replay, and report rendering.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "redsim/config.hpp"
#include "redsim/encoders.hpp"
#include "redsim/harness.hpp"
#include "redsim/net.hpp"
#include "redsim/topology.hpp"
#include "redsim/trainer.hpp"

namespace {

using namespace redsim;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
};

RunConfig load_config(const CommonOpts& co) {
  RunConfig rc = co.config_path.empty() ? parse_run_config("", co.overrides)
                                        : load_run_config(co.config_path, co.overrides);
  if (const char* ep = std::getenv("REDSIM_PLANNER_ENDPOINT"); ep != nullptr && *ep != '\0') {
    rc.planner.endpoint = ep;
  }
  return rc;
}

void apply_planner_flag(RunConfig& rc, const std::string& planner) {
  if (planner.empty()) return;
  if (planner == "none") rc.planner.backend = PlannerBackendKind::None;
  else if (planner == "scripted") rc.planner.backend = PlannerBackendKind::Scripted;
  else if (planner == "remote") rc.planner.backend = PlannerBackendKind::Remote;
  else throw std::invalid_argument("--planner must be none|scripted|remote");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

int cmd_generate(const CommonOpts& co, int stage, std::uint64_t seed_override, bool has_seed,
                 const std::string& out) {
  RunConfig rc = load_config(co);
  ScenarioConfig scen = stage >= 0 ? curriculum_stage(stage) : rc.scenario;
  if (stage >= 0) {
    scen.rules = rc.scenario.rules;
    scen.blue = rc.scenario.blue;
  }
  if (has_seed) scen.seed = seed_override;
  Topology topo = generate_scenario(scen);
  std::string doc = topology_to_json(topo);
  if (out.empty()) {
    std::cout << doc << "\n";
  } else {
    write_file(out, doc);
  }
  std::cerr << "generated topology: " << topo.hosts.size() << " hosts, " << topo.subnets.size()
            << " subnets, " << topo.decoy_count() << " decoys, entry host "
            << topo.red_entry_host << "\n";
  std::cerr << "scenario hash: " << hash_hex(serialize_scenario_config(scen)) << "\n";
  return 0;
}

int cmd_train(const CommonOpts& co, const std::string& out_dir, const std::string& planner,
              std::optional<std::uint64_t> seed, std::optional<int> episodes) {
  RunConfig rc = load_config(co);
  apply_planner_flag(rc, planner);
  if (seed) rc.train.seed = *seed;
  if (episodes) rc.train.total_episodes = *episodes;

  Trainer trainer(rc);
  TrainResult result = trainer.train([](const std::string& line) { std::cerr << line << "\n"; });

  std::filesystem::create_directories(out_dir);
  const std::string manifest = feature_layout_manifest(rc.features);
  save_checkpoint(result.params, manifest, result.config_hash, out_dir + "/checkpoint.json");
  write_file(out_dir + "/metrics.csv", result.metrics_csv);
  write_file(out_dir + "/config.txt", serialize_run_config(rc));
  write_file(out_dir + "/manifest.json", manifest);
  write_file(out_dir + "/curve.svg", training_curve_svg(result.evals));

  std::cerr << "trained " << result.episodes_run << " episodes"
            << (result.early_stopped ? " (early stop)" : "") << ", checkpoint at " << out_dir
            << "/checkpoint.json\n";
  if (result.planner_fallback_mode)
    std::cerr << "WARNING: remote planner unreachable for the whole run; "
                 "the scripted oracle answered every plan\n";
  if (!result.evals.empty()) {
    std::cerr << "final eval: reward " << result.evals.back().mean_reward << ", ECR "
              << result.evals.back().ecr << "\n";
  }
  return 0;
}

int cmd_eval(const CommonOpts& co, const std::string& checkpoint, const std::string& planner,
             int episodes, std::optional<std::uint64_t> seed, const std::string& agent,
             const std::string& out, const std::string& traces, const std::string& plot) {
  RunConfig rc = load_config(co);
  apply_planner_flag(rc, planner);

  EvalOptions opts;
  opts.episodes = episodes;
  opts.master_seed = seed.value_or(rc.train.seed);
  opts.trace_dir = traces;

  if (agent == "policy") opts.kind = AgentKind::Policy;
  else if (agent == "random") opts.kind = AgentKind::Random;
  else if (agent == "sleep") opts.kind = AgentKind::SleepOnly;
  else if (agent == "oracle") opts.kind = AgentKind::OracleGreedy;
  else throw std::invalid_argument("--agent must be policy|random|sleep|oracle");

  std::optional<PolicyParams> params;
  if (opts.kind == AgentKind::Policy) {
    if (checkpoint.empty())
      throw std::invalid_argument("eval: --checkpoint required for the policy agent");
    Checkpoint ck = load_checkpoint(checkpoint);
    const std::string manifest = feature_layout_manifest(rc.features);
    if (ck.layout_manifest != manifest)
      throw std::invalid_argument(
          "eval: checkpoint feature-layout manifest does not match this config; refusing to run");
    params = std::move(ck.params);
  }

  std::unique_ptr<Planner> pl;
  if (rc.planner.backend != PlannerBackendKind::None)
    pl = std::make_unique<Planner>(rc.planner, rc.features);
  if (opts.kind == AgentKind::OracleGreedy && pl == nullptr)
    throw std::invalid_argument("eval: the oracle agent needs a planner backend");

  Report report = run_eval(rc, params ? &*params : nullptr, pl.get(), opts);
  std::cout << report_table(report);
  if (!out.empty()) write_file(out, report_to_json(report));
  if (!plot.empty()) write_file(plot, report_bars_svg(report));
  return 0;
}

int cmd_replay(const std::string& traces, const std::string& out) {
  Report report = aggregate_trace_dir(traces);
  std::cout << report_table(report);
  if (!out.empty()) write_file(out, report_to_json(report));
  return 0;
}

int cmd_report(const std::string& in, const std::string& plot) {
  std::ifstream f(in);
  if (!f) throw std::invalid_argument("cannot open report: " + in);
  std::stringstream ss;
  ss << f.rdbuf();
  Report report = report_from_json(ss.str());
  std::cout << report_table(report);
  if (!plot.empty()) write_file(plot, report_bars_svg(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"redsim: enterprise-network red-team simulation and hierarchical agent"};
  app.require_subcommand(1);

  CommonOpts co;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", co.config_path, "key=value run config file");
    sub->add_option("--set", co.overrides, "override: key=value (repeatable)");
  };

  auto* gen = app.add_subcommand("generate-scenario", "generate a topology JSON document");
  int gen_stage = -1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  add_common(gen);
  gen->add_option("--stage", gen_stage, "curriculum stage (overrides config scenario)");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "scenario seed");
  gen->add_option("--out", gen_out, "output file (default: stdout)");

  auto* train = app.add_subcommand("train", "train the controller with PPO");
  std::string train_out = "run";
  std::string train_planner;
  std::uint64_t train_seed = 0;
  int train_episodes = 0;
  add_common(train);
  train->add_option("--out-dir", train_out, "output directory for checkpoint and metrics");
  train->add_option("--planner", train_planner, "none|scripted|remote");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "training seed");
  auto* train_ep_opt = train->add_option("--episodes", train_episodes, "total episode budget");

  auto* eval = app.add_subcommand("eval", "evaluate an agent over n episodes");
  std::string eval_ckpt, eval_planner, eval_agent = "policy", eval_out, eval_traces, eval_plot;
  int eval_n = 50;
  std::uint64_t eval_seed = 0;
  add_common(eval);
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint.json from train");
  eval->add_option("--planner", eval_planner, "none|scripted|remote");
  eval->add_option("-n,--episodes", eval_n, "episode count");
  auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "master evaluation seed");
  eval->add_option("--agent", eval_agent, "policy|random|sleep|oracle");
  eval->add_option("--out", eval_out, "write report JSON here");
  eval->add_option("--traces", eval_traces, "write per-episode traces into this directory");
  eval->add_option("--plot", eval_plot, "write an SVG plot here");

  auto* replay = app.add_subcommand("replay", "re-aggregate a report from trace files");
  std::string replay_traces, replay_out;
  replay->add_option("--traces", replay_traces, "directory of .jsonl traces")->required();
  replay->add_option("--out", replay_out, "write report JSON here");

  auto* report = app.add_subcommand("report", "render a report JSON");
  std::string report_in, report_plot;
  report->add_option("--in", report_in, "report JSON file")->required();
  report->add_option("--plot", report_plot, "write an SVG plot here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(co, gen_stage, gen_seed, gen_seed_opt->count() > 0, gen_out);
    if (train->parsed())
      return cmd_train(co, train_out, train_planner,
                       train_seed_opt->count() ? std::optional<std::uint64_t>(train_seed)
                                               : std::nullopt,
                       train_ep_opt->count() ? std::optional<int>(train_episodes) : std::nullopt);
    if (eval->parsed())
      return cmd_eval(co, eval_ckpt, eval_planner, eval_n,
                      eval_seed_opt->count() ? std::optional<std::uint64_t>(eval_seed)
                                             : std::nullopt,
                      eval_agent, eval_out, eval_traces, eval_plot);
    if (replay->parsed()) return cmd_replay(replay_traces, replay_out);
    if (report->parsed()) return cmd_report(report_in, report_plot);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
