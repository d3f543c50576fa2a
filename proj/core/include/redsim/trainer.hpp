#pragma once

// Training loop: rollout collection across independent environment instances,
// PPO updates, periodic frozen-policy evaluation, early stopping, curriculum
// advancement, and checkpoint/metrics persistence.

#include <functional>
#include <string>
#include <vector>

#include "redsim/config.hpp"
#include "redsim/net.hpp"
#include "redsim/planner.hpp"
#include "redsim/ppo.hpp"
#include "redsim/runner.hpp"

namespace redsim {

struct EvalPoint {
  int episodes_done = 0;
  int stage = -1;  // -1 when not in curriculum mode
  double lr = 0.0;
  double mean_reward = 0.0;
  double ecr = 0.0;
  long long aac = 0;
  double ahd = 0.0;
  LossStats loss;
  double grad_norm = 0.0;
};

struct TrainResult {
  PolicyParams params;
  std::vector<EvalPoint> evals;
  int episodes_run = 0;
  bool early_stopped = false;
  int final_stage = -1;
  bool planner_fallback_mode = false;  // remote planner was unreachable; oracle took over
  std::string metrics_csv;
  std::string config_hash;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const EvalPoint& p);

class Trainer {
 public:
  explicit Trainer(RunConfig cfg);

  // Runs to the episode budget, early stop, or wall-clock budget. `log` (when
  // set) receives one line per evaluation window.
  TrainResult train(const std::function<void(const std::string&)>& log = nullptr);

  // The scenario used at a curriculum stage (rules and defender settings are
  // carried over from the run config).
  ScenarioConfig stage_scenario(int stage) const;

 private:
  struct EvalOutcome {
    double mean_reward = 0.0;
    double ecr = 0.0;
    long long aac = 0;
    double ahd = 0.0;
  };
  EvalOutcome evaluate(const PolicyParams& params, const ScenarioConfig& scen,
                       Planner* planner, int episodes) const;

  RunConfig cfg_;
};

}  // namespace redsim
