#pragma once

// Declarative configuration for scenarios, the defender, reward shaping,
// feature encoding, the planner, and training. Configs load from a flat
// key=value file (see docs in README) and hash to a stable fingerprint that
// reports and checkpoints echo.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "redsim/types.hpp"

namespace redsim {

// Environment mechanics shared by the simulator and the red agent's belief.
// Knowledge or access gained at step t becomes actionable at t + stage_latency,
// except root access which is actionable on the next step.
struct EnvRules {
  int stage_latency = 2;
  int stealth_scan_steps = 3;
  int restore_relatch = 2;           // steps before a restored host can be re-attacked
  // Decoys silently alarm when probed with the noisy scan (the stealth scan
  // and passive deception analysis stay safe).
  bool decoy_scan_alarm = true;
  double exploit_failure_prob = 0.0; // optional Bernoulli failure for robustness studies
};

struct BlueConfig {
  int detection_delay = 2;  // D: steps from IOC presence to restore
  int agent_count = 5;
  double weight_impacted = 5.0;
  double weight_root = 1.0;
  double weight_user = 0.5;
};

struct ScenarioConfig {
  int subnet_count = 1;
  int hosts_min = 4;
  int hosts_max = 5;
  int services_min = 1;
  int services_max = 3;
  double decoy_fraction = 0.0;
  // Probability a non-decoy, non-entry host carries an exploitable service.
  // Each subnet is forced to keep at least one exploitable non-decoy host.
  double exploitable_fraction = 0.75;
  std::set<SubnetId> defended_subnets;
  int max_steps = 100;
  std::uint64_t seed = 0;
  bool mesh_adjacency = false;  // default: line graph, entry subnet at one end
  EnvRules rules;
  BlueConfig blue;

  // Throws std::invalid_argument on unsatisfiable constraints.
  void validate() const;
};

// Table-driven reward constants. The milestone and constraint values are the
// published shaping table; layer_* switches support ablation replays.
struct RewardConfig {
  double discover_host = 0.2;
  double scan_host = 0.5;
  double compromise_user = 5.0;
  double escalate_root = 3.0;
  double impact_host = 5.0;
  double discover_subnet = 1.0;
  double first_compromise_defended = 8.0;

  double impact_without_root = -0.1;
  double exploit_without_scan = -0.05;
  double escalate_without_user = -0.05;

  double intent_match = 1.0;
  double intent_diverge = -0.3;

  double env_scale = 1.0;  // applied to r_env = -r_blue
  bool layer_env = true;
  bool layer_progress = true;
  bool layer_constraint = true;
  bool layer_alignment = true;
  // "match" means category and target; category_only relaxes the target check.
  bool alignment_category_only = false;
};

struct FeatureConfig {
  int host_capacity = 20;
  int subnet_capacity = 16;
  int summary_token_budget = 600;

  static constexpr int kPerHostFeatures = 21;
  static constexpr int kGlobalFeatures = 25;
  static constexpr int kIntentDim = 128;

  int dimension() const { return host_capacity * kPerHostFeatures + kGlobalFeatures; }
};

enum class PlannerBackendKind : int { None = 0, Scripted = 1, Remote = 2 };

struct PlannerConfig {
  PlannerBackendKind backend = PlannerBackendKind::Scripted;
  int horizon = 20;  // h: steps between scheduled plans
  bool replan_on_failure = true;
  bool reflexion = false;
  int reflexion_capacity = 5;  // K
  RiskPosture posture = RiskPosture::Stealthy;
  // Remote backend (OpenAI-style chat completion endpoint).
  std::string endpoint;  // e.g. http://127.0.0.1:8000 ; env REDSIM_PLANNER_ENDPOINT overrides
  std::string model = "local-model";
  double temperature = 0.2;
  int timeout_ms = 10000;
  int retries = 2;
  std::string prompt_dir = "prompts";
};

enum class LrSchedule : int { Linear = 0, Cosine = 1 };

struct TrainConfig {
  double lr_start = 3e-4;
  double lr_end = 3e-5;
  LrSchedule lr_schedule = LrSchedule::Linear;
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int minibatch_size = 64;
  int ppo_epochs = 8;
  int episodes_per_rollout = 10;
  double max_grad_norm = 0.5;
  double entropy_coef = 0.05;
  double value_coef = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  std::uint64_t seed = 1;
  int total_episodes = 20000;      // LR decay horizon and hard budget
  int eval_every_episodes = 1000;  // evaluation window cadence
  int eval_episodes = 50;
  double early_stop_threshold = 0.005;  // relative improvement
  int early_stop_window = 5;            // consecutive windows
  int early_stop_min_episodes = 20000;
  double wall_clock_budget_s = 48.0 * 3600.0;

  bool curriculum = false;
  double curriculum_ecr_threshold = 0.8;
  int start_stage = 0;

  int workers = 0;  // 0 = hardware concurrency (capped at 8)

  void validate() const;
};

// Flat key=value config file support. Lines are `key = value`; '#' starts a
// comment; lists are comma separated. Unknown keys are an error (catches
// typos early).
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }
  // Keys actually consumed by getters; used to reject unknown keys.
  std::set<std::string> unconsumed() const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> consumed_;
};

struct RunConfig {
  ScenarioConfig scenario;
  RewardConfig reward;
  FeatureConfig features;
  PlannerConfig planner;
  TrainConfig train;
};

// Loads a full run config from a key=value file plus `--set key=value`
// overrides. Throws std::invalid_argument on unknown keys or bad values.
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides = {});
RunConfig parse_run_config(const std::string& text,
                           const std::vector<std::string>& overrides = {});

// Canonical serialization (sorted key=value lines) and its FNV-1a fingerprint.
std::string serialize_run_config(const RunConfig& cfg);
std::string serialize_scenario_config(const ScenarioConfig& cfg);
std::string serialize_reward_config(const RewardConfig& cfg);

std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::string_view data);

}  // namespace redsim
