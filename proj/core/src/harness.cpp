#include "redsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace redsim {

namespace {

using json = nlohmann::ordered_json;

int effective_workers(int configured) {
  if (configured > 0) return configured;
  unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<unsigned>(hc == 0 ? 1 : hc, 8));
}

void finish_histogram(Report* r) {
  long long total = 0;
  for (long long c : r->action_histogram) total += c;
  if (total == 0) return;
  long long best = -1;
  for (int i = 0; i < kActionCount; ++i) {
    if (r->action_histogram[static_cast<size_t>(i)] > best) {
      best = r->action_histogram[static_cast<size_t>(i)];
      r->modal_action = i;
    }
  }
  r->modal_action_frequency = static_cast<double>(best) / static_cast<double>(total);
  double h = 0.0;
  for (long long c : r->action_histogram) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  r->action_entropy = h;
}

}  // namespace

Report aggregate(const std::vector<EpisodeMetrics>& metrics) {
  if (metrics.empty()) throw std::invalid_argument("aggregate: empty metrics list");
  Report r;
  r.episodes = static_cast<int>(metrics.size());
  double reward = 0.0, peak = 0.0;
  for (const auto& m : metrics) {
    r.compromised_episodes += m.compromised ? 1 : 0;
    r.aac += m.attack_actions;
    r.attack_successes += m.attack_successes;
    reward += m.total_reward;
    peak += m.peak_hosts_discovered;
  }
  r.ecr = static_cast<double>(r.compromised_episodes) / r.episodes;
  r.ahd = peak / r.episodes;
  r.mean_total_reward = reward / r.episodes;
  return r;
}

Report run_eval(const RunConfig& rc, const PolicyParams* params, Planner* planner,
                const EvalOptions& options) {
  if (options.episodes < 1) throw std::invalid_argument("run_eval: episodes must be >= 1");
  const int workers = effective_workers(options.workers);
  const bool sequential = planner != nullptr && planner->config().reflexion;

  std::vector<EpisodeTrace> traces(static_cast<size_t>(options.episodes));
  std::vector<EpisodeMetrics> metrics(static_cast<size_t>(options.episodes));

  auto one = [&](int i) {
    EpisodeSpec spec;
    spec.run = &rc;
    spec.kind = options.kind;
    spec.params = params;
    spec.planner = planner;
    spec.episode_id = i;
    spec.seed = derive_seed(options.master_seed, static_cast<std::uint64_t>(i), 0xe7a1);
    spec.trace = &traces[static_cast<size_t>(i)];
    metrics[static_cast<size_t>(i)] = run_episode(spec);
  };
  if (sequential || workers <= 1) {
    for (int i = 0; i < options.episodes; ++i) one(i);
  } else {
    std::vector<std::future<void>> futures;
    const int chunk = (options.episodes + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int b = w * chunk;
      const int e = std::min(options.episodes, b + chunk);
      if (b >= e) break;
      futures.push_back(std::async(std::launch::async, [&, b, e] {
        for (int i = b; i < e; ++i) one(i);
      }));
    }
    for (auto& f : futures) f.get();
  }

  if (!options.trace_dir.empty()) {
    std::filesystem::create_directories(options.trace_dir);
    for (int i = 0; i < options.episodes; ++i) {
      std::ostringstream name;
      name << options.trace_dir << "/ep_" << i << ".jsonl";
      write_trace_file(traces[static_cast<size_t>(i)], name.str());
    }
  }

  Report r = aggregate(metrics);
  for (const auto& t : traces) {
    for (const auto& s : t.steps)
      r.action_histogram[static_cast<size_t>(static_cast<int>(s.action.index))] += 1;
  }
  finish_histogram(&r);
  r.agent_label = std::string(agent_kind_name(options.kind)) +
                  (planner == nullptr ? "" : planner->config().backend == PlannerBackendKind::Remote
                                                 ? "+remote_planner"
                                                 : "+scripted_planner");
  r.scenario_hash = hash_hex(serialize_scenario_config(rc.scenario));
  r.reward_hash = hash_hex(serialize_reward_config(rc.reward));
  r.config_hash = hash_hex(serialize_run_config(rc));
  r.master_seed = options.master_seed;
  return r;
}

Report aggregate_traces(const std::vector<EpisodeTrace>& traces) {
  std::vector<EpisodeMetrics> metrics;
  metrics.reserve(traces.size());
  for (const auto& t : traces) metrics.push_back(metrics_from_trace(t));
  Report r = aggregate(metrics);
  for (const auto& t : traces) {
    for (const auto& s : t.steps)
      r.action_histogram[static_cast<size_t>(static_cast<int>(s.action.index))] += 1;
  }
  finish_histogram(&r);
  if (!traces.empty()) {
    r.agent_label = traces.front().agent_label;
    r.scenario_hash = traces.front().scenario_hash;
    r.reward_hash = traces.front().reward_hash;
  }
  return r;
}

Report aggregate_trace_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("no .jsonl traces under " + dir);
  std::vector<EpisodeTrace> traces;
  traces.reserve(files.size());
  for (const auto& f : files) traces.push_back(read_trace_file(f));
  return aggregate_traces(traces);
}

RlOnlyRegression rl_only_regression(const RunConfig& rc, int budget_episodes,
                                    std::uint64_t seed) {
  RunConfig cfg = rc;
  cfg.planner.backend = PlannerBackendKind::None;
  cfg.train.seed = seed;
  cfg.train.total_episodes = budget_episodes;

  Trainer trainer(cfg);
  RlOnlyRegression out;
  out.training = trainer.train();

  EvalOptions opts;
  opts.kind = AgentKind::Policy;
  opts.episodes = cfg.train.eval_episodes;
  opts.master_seed = seed;
  out.report = run_eval(cfg, &out.training.params, nullptr, opts);
  out.modal_action_frequency = out.report.modal_action_frequency;
  out.action_entropy = out.report.action_entropy;
  return out;
}

std::string report_to_json(const Report& r) {
  json j;
  j["agent"] = r.agent_label;
  j["episodes"] = r.episodes;
  j["ecr"] = r.ecr;
  j["ecr_count"] = r.compromised_episodes;
  j["aac"] = r.aac;
  j["ahd"] = r.ahd;
  j["attack_successes"] = r.attack_successes;
  j["mean_total_reward"] = r.mean_total_reward;
  j["action_histogram"] = r.action_histogram;
  j["modal_action"] = r.modal_action;
  j["modal_action_name"] =
      r.modal_action >= 0 ? std::string(action_name(static_cast<ActionId>(r.modal_action))) : "";
  j["modal_action_frequency"] = r.modal_action_frequency;
  j["action_entropy"] = r.action_entropy;
  j["scenario_hash"] = r.scenario_hash;
  j["reward_hash"] = r.reward_hash;
  j["config_hash"] = r.config_hash;
  j["master_seed"] = r.master_seed;
  return j.dump(2);
}

Report report_from_json(const std::string& text) {
  json j = json::parse(text);
  Report r;
  r.agent_label = j.at("agent").get<std::string>();
  r.episodes = j.at("episodes").get<int>();
  r.ecr = j.at("ecr").get<double>();
  r.compromised_episodes = j.at("ecr_count").get<int>();
  r.aac = j.at("aac").get<long long>();
  r.ahd = j.at("ahd").get<double>();
  r.attack_successes = j.at("attack_successes").get<long long>();
  r.mean_total_reward = j.at("mean_total_reward").get<double>();
  auto hist = j.at("action_histogram").get<std::vector<long long>>();
  for (size_t i = 0; i < hist.size() && i < r.action_histogram.size(); ++i)
    r.action_histogram[i] = hist[i];
  r.modal_action = j.at("modal_action").get<int>();
  r.modal_action_frequency = j.at("modal_action_frequency").get<double>();
  r.action_entropy = j.at("action_entropy").get<double>();
  r.scenario_hash = j.at("scenario_hash").get<std::string>();
  r.reward_hash = j.at("reward_hash").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  return r;
}

std::string report_table(const Report& r) {
  std::ostringstream os;
  os << "agent: " << r.agent_label << "\n";
  os << "episodes: " << r.episodes << "\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "ECR: %.4f (%d/%d)\n", r.ecr, r.compromised_episodes,
                r.episodes);
  os << buf;
  os << "AAC: " << r.aac << " (successes: " << r.attack_successes << ")\n";
  std::snprintf(buf, sizeof(buf), "AHD: %.3f\n", r.ahd);
  os << buf;
  std::snprintf(buf, sizeof(buf), "mean reward: %.3f\n", r.mean_total_reward);
  os << buf;
  if (r.modal_action >= 0) {
    std::snprintf(buf, sizeof(buf), "modal action: %s (%.3f of steps), entropy %.3f\n",
                  std::string(action_name(static_cast<ActionId>(r.modal_action))).c_str(),
                  r.modal_action_frequency, r.action_entropy);
    os << buf;
  }
  os << "scenario hash: " << r.scenario_hash << "  reward hash: " << r.reward_hash
     << "  config hash: " << r.config_hash << "\n";
  return os.str();
}

namespace {

std::string svg_header(int w, int h) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return os.str();
}

}  // namespace

std::string training_curve_svg(const std::vector<EvalPoint>& evals) {
  const int W = 640, H = 360, pad = 48;
  std::ostringstream os;
  os << svg_header(W, H);
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << "evaluation reward over training</text>\n";
  if (evals.size() >= 2) {
    double lo = evals.front().mean_reward, hi = lo;
    for (const auto& e : evals) {
      lo = std::min(lo, e.mean_reward);
      hi = std::max(hi, e.mean_reward);
    }
    if (hi - lo < 1e-9) hi = lo + 1.0;
    os << "<polyline fill=\"none\" stroke=\"#a33\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < evals.size(); ++i) {
      double x = pad + (W - 2.0 * pad) * static_cast<double>(i) / (evals.size() - 1);
      double y = H - pad - (H - 2.0 * pad) * (evals[i].mean_reward - lo) / (hi - lo);
      os << x << "," << y << " ";
    }
    os << "\"/>\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"11\">min %.2f / max %.2f, %zu windows</text>\n",
                  pad, H - 12, lo, hi, evals.size());
    os << buf;
  } else {
    os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2
       << "\" text-anchor=\"middle\" font-size=\"12\">not enough evaluation points</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string report_bars_svg(const Report& r) {
  const int W = 640, H = 360;
  std::ostringstream os;
  os << svg_header(W, H);
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << "action histogram (" << r.agent_label << ")</text>\n";
  long long maxc = 1;
  for (long long c : r.action_histogram) maxc = std::max(maxc, c);
  const double bw = (W - 80.0) / kActionCount;
  for (int i = 0; i < kActionCount; ++i) {
    double frac = static_cast<double>(r.action_histogram[static_cast<size_t>(i)]) /
                  static_cast<double>(maxc);
    double bh = frac * (H - 120.0);
    double x = 40 + i * bw;
    os << "<rect x=\"" << x + 4 << "\" y=\"" << (H - 60 - bh) << "\" width=\"" << bw - 8
       << "\" height=\"" << bh << "\" fill=\"#369\"/>\n";
    os << "<text x=\"" << x + bw / 2 << "\" y=\"" << H - 44
       << "\" text-anchor=\"middle\" font-size=\"10\">" << i << "</text>\n";
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "<text x=\"40\" y=\"%d\" font-size=\"11\">ECR %.3f | AAC %lld | AHD %.2f</text>\n",
                H - 16, r.ecr, r.aac, r.ahd);
  os << buf;
  os << "</svg>\n";
  return os.str();
}

}  // namespace redsim
