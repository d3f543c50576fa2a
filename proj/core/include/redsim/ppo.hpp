#pragma once

// PPO with GAE over masked categorical policies: rollout storage, advantage
// estimation, the clipped surrogate update with Adam, and learning-rate
// schedules.

#include <random>
#include <vector>

#include "redsim/config.hpp"
#include "redsim/net.hpp"

namespace redsim {

struct Transition {
  Vec features;
  Vec intent;
  Mask mask{};
  int action = 0;
  double logp = 0.0;    // at collection time, from the masked distribution
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

struct RolloutBuffer {
  std::vector<Transition> steps;        // episodes contiguous
  std::vector<double> advantages;       // filled by compute_advantages
  std::vector<double> returns;
  void clear() {
    steps.clear();
    advantages.clear();
    returns.clear();
  }
};

// Standard GAE recursion. `values` carries one bootstrap terminal value
// (size T+1); `dones` marks episode ends. returns[t] = advantages[t] + values[t].
void gae(const std::vector<double>& rewards, const std::vector<double>& values,
         const std::vector<bool>& dones, double gamma, double lambda,
         std::vector<double>* advantages, std::vector<double>* returns);

// Fills buffer.advantages/returns episode-by-episode (bootstrap value 0 at
// each done boundary, which is exact for fixed-horizon episodes).
void compute_advantages(RolloutBuffer* buffer, double gamma, double lambda);

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;   // raw MSE/2 term, before the coefficient
  double entropy = 0.0;
  double total_loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// Mean PPO loss over the rows and its parameter gradients. `grads` must be
// sized like `params`; it is zeroed first. `workers` > 1 splits rows across
// threads with a fixed-order reduction, so results stay deterministic.
LossStats compute_loss_and_grad(const PolicyParams& params,
                                const std::vector<const Transition*>& rows,
                                const std::vector<double>& advantages,
                                const std::vector<double>& returns,
                                const TrainConfig& cfg, PolicyParams* grads,
                                int workers = 1);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(const TrainConfig& cfg) : cfg_(cfg) {}
  // Applies grads in place with global-norm clipping; returns the pre-clip
  // gradient norm.
  double step(PolicyParams* params, PolicyParams* grads, double lr);

 private:
  TrainConfig cfg_;
  std::vector<Vec> m_, v_;
  long t_ = 0;
};

struct UpdateStats {
  LossStats loss;
  double grad_norm = 0.0;
  int minibatches = 0;
  bool aborted = false;  // non-finite loss: params restored, update skipped
};

// One PPO update: normalizes advantages over the buffer (mean 0, std 1),
// then runs ppo_epochs shuffled passes of minibatches. On a non-finite loss
// or gradient the previous params are restored and `aborted` is set.
UpdateStats ppo_update(RolloutBuffer* buffer, PolicyParams* params, AdamOptimizer* opt,
                       const TrainConfig& cfg, std::mt19937_64* rng, double lr);

// lr(progress) for progress in [0,1]; exact endpoints lr_start / lr_end.
double scheduled_lr(const TrainConfig& cfg, double progress);

// Early-stop rule: true when the latest `window+1` evaluation rewards show
// `window` consecutive relative improvements below `threshold`, and at least
// `min_episodes` episodes have elapsed.
bool early_stop_triggered(const std::vector<double>& eval_rewards, int episodes_done,
                          const TrainConfig& cfg);

}  // namespace redsim
