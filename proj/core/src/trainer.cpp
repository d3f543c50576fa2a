#include "redsim/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <future>
#include <sstream>
#include <thread>

#include "redsim/topology.hpp"

namespace redsim {

namespace {

int effective_workers(int configured) {
  if (configured > 0) return configured;
  unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<unsigned>(hc == 0 ? 1 : hc, 8));
}

// Runs fn(i) for i in [0,n) across workers; results land in index order.
template <typename T, typename Fn>
std::vector<T> parallel_map(int n, int workers, Fn&& fn) {
  std::vector<T> out(static_cast<size_t>(n));
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = fn(i);
    return out;
  }
  std::vector<std::future<void>> futures;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int b = w * chunk;
    const int e = std::min(n, b + chunk);
    if (b >= e) break;
    futures.push_back(std::async(std::launch::async, [&, b, e] {
      for (int i = b; i < e; ++i) out[static_cast<size_t>(i)] = fn(i);
    }));
  }
  for (auto& f : futures) f.get();
  return out;
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string metrics_csv_header() {
  return "episodes,stage,lr,eval_reward,ecr,aac,ahd,policy_loss,value_loss,entropy,"
         "clip_fraction,approx_kl,grad_norm";
}

std::string metrics_csv_row(const EvalPoint& p) {
  std::ostringstream os;
  os << p.episodes_done << "," << p.stage << "," << format_double(p.lr) << ","
     << format_double(p.mean_reward) << "," << format_double(p.ecr) << "," << p.aac << ","
     << format_double(p.ahd) << "," << format_double(p.loss.policy_loss) << ","
     << format_double(p.loss.value_loss) << "," << format_double(p.loss.entropy) << ","
     << format_double(p.loss.clip_fraction) << "," << format_double(p.loss.approx_kl) << ","
     << format_double(p.grad_norm);
  return os.str();
}

Trainer::Trainer(RunConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.scenario.validate();
  cfg_.train.validate();
}

ScenarioConfig Trainer::stage_scenario(int stage) const {
  ScenarioConfig scen = curriculum_stage(stage);
  scen.rules = cfg_.scenario.rules;
  scen.blue = cfg_.scenario.blue;
  scen.seed = cfg_.scenario.seed;
  return scen;
}

Trainer::EvalOutcome Trainer::evaluate(const PolicyParams& params, const ScenarioConfig& scen,
                                       Planner* planner, int episodes) const {
  RunConfig rc = cfg_;
  rc.scenario = scen;
  const int workers = effective_workers(cfg_.train.workers);
  const bool sequential = planner != nullptr && planner->config().reflexion;

  auto one = [&](int i) -> EpisodeMetrics {
    EpisodeSpec spec;
    spec.run = &rc;
    spec.kind = AgentKind::Policy;
    spec.params = &params;
    spec.planner = planner;
    spec.episode_id = i;
    spec.seed = derive_seed(cfg_.train.seed, static_cast<std::uint64_t>(i), 0xe7a1);
    return run_episode(spec);
  };
  auto metrics = parallel_map<EpisodeMetrics>(episodes, sequential ? 1 : workers, one);

  EvalOutcome out;
  int compromised = 0;
  double reward = 0.0, peak = 0.0;
  for (const auto& m : metrics) {
    compromised += m.compromised ? 1 : 0;
    out.aac += m.attack_actions;
    reward += m.total_reward;
    peak += m.peak_hosts_discovered;
  }
  out.ecr = static_cast<double>(compromised) / episodes;
  out.mean_reward = reward / episodes;
  out.ahd = peak / episodes;
  return out;
}

TrainResult Trainer::train(const std::function<void(const std::string&)>& log) {
  const TrainConfig& tc = cfg_.train;
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result;
  result.config_hash = hash_hex(serialize_run_config(cfg_));

  std::mt19937_64 init_rng(derive_seed(tc.seed, 0, 0x1417));
  PolicyParams params;
  params.resize(cfg_.features.dimension());
  params.init(init_rng);
  AdamOptimizer opt(tc);
  std::mt19937_64 update_rng(derive_seed(tc.seed, 1, 0x1417));

  std::unique_ptr<Planner> planner;
  if (cfg_.planner.backend != PlannerBackendKind::None) {
    planner = std::make_unique<Planner>(cfg_.planner, cfg_.features);
  }

  int stage = tc.curriculum ? tc.start_stage : -1;
  ScenarioConfig scen = tc.curriculum ? stage_scenario(stage) : cfg_.scenario;

  const int workers = effective_workers(tc.workers);
  const bool sequential_rollouts = planner && planner->config().reflexion;

  std::ostringstream csv;
  csv << metrics_csv_header() << "\n";
  std::vector<double> eval_history;
  int episodes_done = 0;
  int next_eval = tc.eval_every_episodes;
  UpdateStats last_update;
  int fallback_plans = 0, total_plans = 0;

  RunConfig rc = cfg_;
  while (episodes_done < tc.total_episodes) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > tc.wall_clock_budget_s) break;

    rc.scenario = scen;
    const int n = tc.episodes_per_rollout;
    struct EpData {
      RolloutBuffer buf;
      EpisodeMetrics metrics;
    };
    auto eps = parallel_map<EpData>(n, sequential_rollouts ? 1 : workers, [&](int i) {
      EpData d;
      EpisodeSpec spec;
      spec.run = &rc;
      spec.kind = AgentKind::Policy;
      spec.params = &params;
      spec.planner = planner.get();
      spec.episode_id = episodes_done + i;
      spec.seed = derive_seed(tc.seed, static_cast<std::uint64_t>(episodes_done + i), 0x7271);
      spec.rollout = &d.buf;
      d.metrics = run_episode(spec);
      return d;
    });

    RolloutBuffer buffer;
    for (auto& d : eps) {
      for (auto& s : d.buf.steps) buffer.steps.push_back(std::move(s));
      fallback_plans += d.metrics.planner_fallbacks;
      total_plans += d.metrics.planner_invocations;
    }
    compute_advantages(&buffer, tc.gamma, tc.gae_lambda);

    const double progress = static_cast<double>(episodes_done) / tc.total_episodes;
    const double lr = scheduled_lr(tc, progress);
    TrainConfig upd = tc;
    upd.workers = workers;
    last_update = ppo_update(&buffer, &params, &opt, upd, &update_rng, lr);
    episodes_done += n;

    if (episodes_done >= next_eval || episodes_done >= tc.total_episodes) {
      next_eval += tc.eval_every_episodes;
      EvalOutcome ev = evaluate(params, scen, planner.get(), tc.eval_episodes);
      EvalPoint point;
      point.episodes_done = episodes_done;
      point.stage = stage;
      point.lr = lr;
      point.mean_reward = ev.mean_reward;
      point.ecr = ev.ecr;
      point.aac = ev.aac;
      point.ahd = ev.ahd;
      point.loss = last_update.loss;
      point.grad_norm = last_update.grad_norm;
      result.evals.push_back(point);
      csv << metrics_csv_row(point) << "\n";
      if (log) {
        std::ostringstream line;
        line << "episodes=" << episodes_done << (stage >= 0 ? " stage=" + std::to_string(stage) : "")
             << " eval_reward=" << format_double(ev.mean_reward) << " ecr=" << format_double(ev.ecr)
             << " entropy=" << format_double(last_update.loss.entropy);
        log(line.str());
      }

      eval_history.push_back(ev.mean_reward);
      if (early_stop_triggered(eval_history, episodes_done, tc)) {
        result.early_stopped = true;
        break;
      }
      if (tc.curriculum && stage >= 0 && stage + 1 < curriculum_stage_count() &&
          ev.ecr >= tc.curriculum_ecr_threshold) {
        ++stage;
        scen = stage_scenario(stage);
        if (log) log("curriculum: advancing to stage " + std::to_string(stage));
      }
    }
  }

  result.params = std::move(params);
  result.episodes_run = episodes_done;
  result.final_stage = stage;
  result.metrics_csv = csv.str();
  if (total_plans > 0 && fallback_plans == total_plans &&
      cfg_.planner.backend == PlannerBackendKind::Remote) {
    result.planner_fallback_mode = true;
  }
  return result;
}

}  // namespace redsim
