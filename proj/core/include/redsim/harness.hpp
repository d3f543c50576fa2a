#pragma once

// Evaluation harness: episode metrics aggregation, the ECR/AAC/AHD report,
// the RL-only regression scenario, and report rendering (table, JSON, SVG).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "redsim/config.hpp"
#include "redsim/net.hpp"
#include "redsim/planner.hpp"
#include "redsim/runner.hpp"
#include "redsim/trace.hpp"
#include "redsim/trainer.hpp"

namespace redsim {

struct Report {
  std::string agent_label;
  int episodes = 0;
  int compromised_episodes = 0;
  double ecr = 0.0;             // fraction in [0,1]
  long long aac = 0;            // total attack actions attempted
  double ahd = 0.0;             // mean per-episode peak host discovery
  long long attack_successes = 0;
  double mean_total_reward = 0.0;
  std::array<long long, kActionCount> action_histogram{};
  int modal_action = -1;
  double modal_action_frequency = 0.0;
  double action_entropy = 0.0;  // empirical entropy of the executed-action distribution
  std::string scenario_hash;
  std::string reward_hash;
  std::string config_hash;
  std::uint64_t master_seed = 0;
};

// ECR/AAC/AHD over a non-empty metrics list. Throws std::invalid_argument on
// an empty list.
Report aggregate(const std::vector<EpisodeMetrics>& metrics);

struct EvalOptions {
  AgentKind kind = AgentKind::Policy;
  int episodes = 50;
  std::uint64_t master_seed = 0;
  std::string trace_dir;  // when set, writes ep_<n>.jsonl per episode
  int workers = 0;        // 0 = hardware concurrency (capped at 8)
};

// Runs n episodes with stochastic action sampling and per-episode seeds
// derived from the master seed, and aggregates the report. `params` may be
// null for non-policy agents; `planner` may be null (RL-only / no intent).
Report run_eval(const RunConfig& rc, const PolicyParams* params, Planner* planner,
                const EvalOptions& options);

// Re-aggregates a report from persisted trace files (exactly reproduces the
// evaluation-time report).
Report aggregate_traces(const std::vector<EpisodeTrace>& traces);
Report aggregate_trace_dir(const std::string& dir);

struct RlOnlyRegression {
  Report report;
  TrainResult training;
  double modal_action_frequency = 0.0;
  double action_entropy = 0.0;
};

// Trains a controller with a null intent embedding and no planner under the
// given reward config and budget, then evaluates it. Diagnostics report the
// evaluation action distribution without pinning the collapse mode.
RlOnlyRegression rl_only_regression(const RunConfig& rc, int budget_episodes,
                                    std::uint64_t seed);

std::string report_to_json(const Report& report);
Report report_from_json(const std::string& text);
std::string report_table(const Report& report);

// Minimal static plot: evaluation reward curve and final metric bars.
std::string training_curve_svg(const std::vector<EvalPoint>& evals);
std::string report_bars_svg(const Report& report);

}  // namespace redsim
