#include "redsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace redsim {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

void ScenarioConfig::validate() const {
  if (subnet_count < 1) bad("scenario: subnet_count must be >= 1");
  if (hosts_min < 1 || hosts_min > hosts_max) bad("scenario: hosts_per_subnet range invalid");
  if (services_min < 1 || services_min > services_max) bad("scenario: services range invalid");
  if (decoy_fraction < 0.0 || decoy_fraction >= 1.0) bad("scenario: decoy_fraction must be in [0,1)");
  if (exploitable_fraction < 0.0 || exploitable_fraction > 1.0) bad("scenario: exploitable_fraction invalid");
  if (max_steps < 12) bad("scenario: max_steps must be >= 12 (stealth minimum path)");
  for (SubnetId s : defended_subnets) {
    if (s < 0 || s >= subnet_count) bad("scenario: defended subnet index out of range");
  }
  if (blue.detection_delay < 0) bad("scenario: blue.detection_delay must be >= 0");
  if (blue.agent_count < 1) bad("scenario: blue.agent_count must be >= 1");
  if (rules.stage_latency < 1) bad("scenario: rules.stage_latency must be >= 1");
  if (rules.stealth_scan_steps < 1) bad("scenario: rules.stealth_scan_steps must be >= 1");
  if (rules.exploit_failure_prob < 0.0 || rules.exploit_failure_prob > 1.0)
    bad("scenario: exploit_failure_prob invalid");
  // A complete kill chain needs at least one non-entry host somewhere.
  if (subnet_count == 1 && hosts_max < 2) bad("scenario: no room for a target host besides the entry host");
  // Enough non-decoy hosts to keep one exploitable target per subnet.
  const int min_total = subnet_count * hosts_min;
  const int decoys = static_cast<int>(std::llround(decoy_fraction * min_total));
  if (min_total - decoys < subnet_count + 1)
    bad("scenario: decoy_fraction leaves no exploitable host in some subnet");
}

void TrainConfig::validate() const {
  if (lr_start <= 0 || lr_end <= 0) bad("train: learning rates must be positive");
  if (clip_ratio <= 0 || clip_ratio >= 1) bad("train: clip_ratio must be in (0,1)");
  if (gamma <= 0 || gamma > 1) bad("train: gamma must be in (0,1]");
  if (gae_lambda <= 0 || gae_lambda > 1) bad("train: lambda must be in (0,1]");
  if (minibatch_size < 1 || ppo_epochs < 1 || episodes_per_rollout < 1) bad("train: batch settings must be positive");
  if (max_grad_norm <= 0) bad("train: max_grad_norm must be positive");
  if (entropy_coef < 0 || value_coef < 0) bad("train: coefficients must be non-negative");
  if (total_episodes < 1 || eval_every_episodes < 1 || eval_episodes < 1) bad("train: episode budgets must be positive");
  if (early_stop_window < 1 || early_stop_threshold < 0) bad("train: early stop settings invalid");
}

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cf;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) bad("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) bad("config line " + std::to_string(lineno) + ": empty key");
    cf.entries_[key] = value;
  }
  return cf;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) bad("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

bool ConfigFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) bad("config key " + key + ": trailing characters");
    return v;
  } catch (const std::invalid_argument&) {
    bad("config key " + key + ": not a number: " + it->second);
  }
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  double v = get_double(key, static_cast<double>(fallback));
  int iv = static_cast<int>(std::llround(v));
  if (std::abs(v - iv) > 1e-9) bad("config key " + key + ": expected integer");
  return iv;
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    bad("config key " + key + ": expected unsigned integer");
  }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad("config key " + key + ": expected boolean, got " + v);
}

std::vector<int> ConfigFile::get_int_list(const std::string& key) const {
  consumed_.insert(key);
  std::vector<int> out;
  auto it = entries_.find(key);
  if (it == entries_.end() || trim(it->second).empty()) return out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  return out;
}

void ConfigFile::set(const std::string& key, const std::string& value) { entries_[key] = value; }

std::set<std::string> ConfigFile::unconsumed() const {
  std::set<std::string> out;
  for (const auto& [k, _] : entries_) {
    if (!consumed_.count(k)) out.insert(k);
  }
  return out;
}

namespace {

RunConfig from_config_file(const ConfigFile& cf) {
  RunConfig rc;
  auto& sc = rc.scenario;
  sc.subnet_count = cf.get_int("scenario.subnet_count", sc.subnet_count);
  sc.hosts_min = cf.get_int("scenario.hosts_min", sc.hosts_min);
  sc.hosts_max = cf.get_int("scenario.hosts_max", sc.hosts_max);
  sc.services_min = cf.get_int("scenario.services_min", sc.services_min);
  sc.services_max = cf.get_int("scenario.services_max", sc.services_max);
  sc.decoy_fraction = cf.get_double("scenario.decoy_fraction", sc.decoy_fraction);
  sc.exploitable_fraction = cf.get_double("scenario.exploitable_fraction", sc.exploitable_fraction);
  for (int s : cf.get_int_list("scenario.defended_subnets")) sc.defended_subnets.insert(s);
  sc.max_steps = cf.get_int("scenario.max_steps", sc.max_steps);
  sc.seed = cf.get_u64("scenario.seed", sc.seed);
  sc.mesh_adjacency = cf.get_bool("scenario.mesh_adjacency", sc.mesh_adjacency);
  sc.rules.stage_latency = cf.get_int("env.stage_latency", sc.rules.stage_latency);
  sc.rules.stealth_scan_steps = cf.get_int("env.stealth_scan_steps", sc.rules.stealth_scan_steps);
  sc.rules.restore_relatch = cf.get_int("env.restore_relatch", sc.rules.restore_relatch);
  sc.rules.decoy_scan_alarm = cf.get_bool("env.decoy_scan_alarm", sc.rules.decoy_scan_alarm);
  sc.rules.exploit_failure_prob = cf.get_double("env.exploit_failure_prob", sc.rules.exploit_failure_prob);
  sc.blue.detection_delay = cf.get_int("blue.detection_delay", sc.blue.detection_delay);
  sc.blue.agent_count = cf.get_int("blue.agent_count", sc.blue.agent_count);
  sc.blue.weight_impacted = cf.get_double("blue.weight_impacted", sc.blue.weight_impacted);
  sc.blue.weight_root = cf.get_double("blue.weight_root", sc.blue.weight_root);
  sc.blue.weight_user = cf.get_double("blue.weight_user", sc.blue.weight_user);

  auto& rw = rc.reward;
  rw.discover_host = cf.get_double("reward.discover_host", rw.discover_host);
  rw.scan_host = cf.get_double("reward.scan_host", rw.scan_host);
  rw.compromise_user = cf.get_double("reward.compromise_user", rw.compromise_user);
  rw.escalate_root = cf.get_double("reward.escalate_root", rw.escalate_root);
  rw.impact_host = cf.get_double("reward.impact_host", rw.impact_host);
  rw.discover_subnet = cf.get_double("reward.discover_subnet", rw.discover_subnet);
  rw.first_compromise_defended = cf.get_double("reward.first_compromise_defended", rw.first_compromise_defended);
  rw.impact_without_root = cf.get_double("reward.impact_without_root", rw.impact_without_root);
  rw.exploit_without_scan = cf.get_double("reward.exploit_without_scan", rw.exploit_without_scan);
  rw.escalate_without_user = cf.get_double("reward.escalate_without_user", rw.escalate_without_user);
  rw.intent_match = cf.get_double("reward.intent_match", rw.intent_match);
  rw.intent_diverge = cf.get_double("reward.intent_diverge", rw.intent_diverge);
  rw.env_scale = cf.get_double("reward.env_scale", rw.env_scale);
  rw.layer_env = cf.get_bool("reward.layer_env", rw.layer_env);
  rw.layer_progress = cf.get_bool("reward.layer_progress", rw.layer_progress);
  rw.layer_constraint = cf.get_bool("reward.layer_constraint", rw.layer_constraint);
  rw.layer_alignment = cf.get_bool("reward.layer_alignment", rw.layer_alignment);
  rw.alignment_category_only = cf.get_bool("reward.alignment_category_only", rw.alignment_category_only);

  auto& fc = rc.features;
  fc.host_capacity = cf.get_int("features.host_capacity", fc.host_capacity);
  fc.subnet_capacity = cf.get_int("features.subnet_capacity", fc.subnet_capacity);
  fc.summary_token_budget = cf.get_int("features.summary_token_budget", fc.summary_token_budget);

  auto& pl = rc.planner;
  {
    std::string b = cf.get_string("planner.backend", "scripted");
    if (b == "none") pl.backend = PlannerBackendKind::None;
    else if (b == "scripted") pl.backend = PlannerBackendKind::Scripted;
    else if (b == "remote") pl.backend = PlannerBackendKind::Remote;
    else bad("planner.backend must be none|scripted|remote");
  }
  pl.horizon = cf.get_int("planner.horizon", pl.horizon);
  pl.replan_on_failure = cf.get_bool("planner.replan_on_failure", pl.replan_on_failure);
  pl.reflexion = cf.get_bool("planner.reflexion", pl.reflexion);
  pl.reflexion_capacity = cf.get_int("planner.reflexion_capacity", pl.reflexion_capacity);
  {
    std::string p = cf.get_string("planner.posture", std::string(posture_name(pl.posture)));
    auto parsed = posture_from_name(p);
    if (!parsed) bad("planner.posture must be stealthy|balanced|aggressive");
    pl.posture = *parsed;
  }
  pl.endpoint = cf.get_string("planner.endpoint", pl.endpoint);
  pl.model = cf.get_string("planner.model", pl.model);
  pl.temperature = cf.get_double("planner.temperature", pl.temperature);
  pl.timeout_ms = cf.get_int("planner.timeout_ms", pl.timeout_ms);
  pl.retries = cf.get_int("planner.retries", pl.retries);
  pl.prompt_dir = cf.get_string("planner.prompt_dir", pl.prompt_dir);

  auto& tr = rc.train;
  tr.lr_start = cf.get_double("train.lr_start", tr.lr_start);
  tr.lr_end = cf.get_double("train.lr_end", tr.lr_end);
  {
    std::string s = cf.get_string("train.lr_schedule", "linear");
    if (s == "linear") tr.lr_schedule = LrSchedule::Linear;
    else if (s == "cosine") tr.lr_schedule = LrSchedule::Cosine;
    else bad("train.lr_schedule must be linear|cosine");
  }
  tr.clip_ratio = cf.get_double("train.clip_ratio", tr.clip_ratio);
  tr.gamma = cf.get_double("train.gamma", tr.gamma);
  tr.gae_lambda = cf.get_double("train.gae_lambda", tr.gae_lambda);
  tr.minibatch_size = cf.get_int("train.minibatch_size", tr.minibatch_size);
  tr.ppo_epochs = cf.get_int("train.ppo_epochs", tr.ppo_epochs);
  tr.episodes_per_rollout = cf.get_int("train.episodes_per_rollout", tr.episodes_per_rollout);
  tr.max_grad_norm = cf.get_double("train.max_grad_norm", tr.max_grad_norm);
  tr.entropy_coef = cf.get_double("train.entropy_coef", tr.entropy_coef);
  tr.value_coef = cf.get_double("train.value_coef", tr.value_coef);
  tr.seed = cf.get_u64("train.seed", tr.seed);
  tr.total_episodes = cf.get_int("train.total_episodes", tr.total_episodes);
  tr.eval_every_episodes = cf.get_int("train.eval_every_episodes", tr.eval_every_episodes);
  tr.eval_episodes = cf.get_int("train.eval_episodes", tr.eval_episodes);
  tr.early_stop_threshold = cf.get_double("train.early_stop_threshold", tr.early_stop_threshold);
  tr.early_stop_window = cf.get_int("train.early_stop_window", tr.early_stop_window);
  tr.early_stop_min_episodes = cf.get_int("train.early_stop_min_episodes", tr.early_stop_min_episodes);
  tr.wall_clock_budget_s = cf.get_double("train.wall_clock_budget_s", tr.wall_clock_budget_s);
  tr.curriculum = cf.get_bool("train.curriculum", tr.curriculum);
  tr.curriculum_ecr_threshold = cf.get_double("train.curriculum_ecr_threshold", tr.curriculum_ecr_threshold);
  tr.start_stage = cf.get_int("train.start_stage", tr.start_stage);
  tr.workers = cf.get_int("train.workers", tr.workers);

  auto leftovers = cf.unconsumed();
  if (!leftovers.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : leftovers) msg += " " + k;
    bad(msg);
  }

  rc.scenario.validate();
  rc.train.validate();
  return rc;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::vector<std::string>& overrides) {
  ConfigFile cf = ConfigFile::parse(text);
  for (const auto& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos) bad("override must be key=value: " + ov);
    cf.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }
  return from_config_file(cf);
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream f(path);
  if (!f) bad("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), overrides);
}

namespace {

void emit(std::ostream& os, const std::string& key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  os << key << "=" << buf << "\n";
}
void emit(std::ostream& os, const std::string& key, int v) { os << key << "=" << v << "\n"; }
void emit(std::ostream& os, const std::string& key, std::uint64_t v) { os << key << "=" << v << "\n"; }
void emit(std::ostream& os, const std::string& key, bool v) { os << key << "=" << (v ? "true" : "false") << "\n"; }
void emit(std::ostream& os, const std::string& key, const std::string& v) { os << key << "=" << v << "\n"; }

}  // namespace

std::string serialize_scenario_config(const ScenarioConfig& sc) {
  std::ostringstream os;
  emit(os, "scenario.subnet_count", sc.subnet_count);
  emit(os, "scenario.hosts_min", sc.hosts_min);
  emit(os, "scenario.hosts_max", sc.hosts_max);
  emit(os, "scenario.services_min", sc.services_min);
  emit(os, "scenario.services_max", sc.services_max);
  emit(os, "scenario.decoy_fraction", sc.decoy_fraction);
  emit(os, "scenario.exploitable_fraction", sc.exploitable_fraction);
  {
    std::string list;
    for (SubnetId s : sc.defended_subnets) {
      if (!list.empty()) list += ",";
      list += std::to_string(s);
    }
    emit(os, "scenario.defended_subnets", list);
  }
  emit(os, "scenario.max_steps", sc.max_steps);
  emit(os, "scenario.seed", sc.seed);
  emit(os, "scenario.mesh_adjacency", sc.mesh_adjacency);
  emit(os, "env.stage_latency", sc.rules.stage_latency);
  emit(os, "env.stealth_scan_steps", sc.rules.stealth_scan_steps);
  emit(os, "env.restore_relatch", sc.rules.restore_relatch);
  emit(os, "env.decoy_scan_alarm", sc.rules.decoy_scan_alarm);
  emit(os, "env.exploit_failure_prob", sc.rules.exploit_failure_prob);
  emit(os, "blue.detection_delay", sc.blue.detection_delay);
  emit(os, "blue.agent_count", sc.blue.agent_count);
  emit(os, "blue.weight_impacted", sc.blue.weight_impacted);
  emit(os, "blue.weight_root", sc.blue.weight_root);
  emit(os, "blue.weight_user", sc.blue.weight_user);
  return os.str();
}

std::string serialize_reward_config(const RewardConfig& rw) {
  std::ostringstream os;
  emit(os, "reward.discover_host", rw.discover_host);
  emit(os, "reward.scan_host", rw.scan_host);
  emit(os, "reward.compromise_user", rw.compromise_user);
  emit(os, "reward.escalate_root", rw.escalate_root);
  emit(os, "reward.impact_host", rw.impact_host);
  emit(os, "reward.discover_subnet", rw.discover_subnet);
  emit(os, "reward.first_compromise_defended", rw.first_compromise_defended);
  emit(os, "reward.impact_without_root", rw.impact_without_root);
  emit(os, "reward.exploit_without_scan", rw.exploit_without_scan);
  emit(os, "reward.escalate_without_user", rw.escalate_without_user);
  emit(os, "reward.intent_match", rw.intent_match);
  emit(os, "reward.intent_diverge", rw.intent_diverge);
  emit(os, "reward.env_scale", rw.env_scale);
  emit(os, "reward.layer_env", rw.layer_env);
  emit(os, "reward.layer_progress", rw.layer_progress);
  emit(os, "reward.layer_constraint", rw.layer_constraint);
  emit(os, "reward.layer_alignment", rw.layer_alignment);
  emit(os, "reward.alignment_category_only", rw.alignment_category_only);
  return os.str();
}

std::string serialize_run_config(const RunConfig& rc) {
  std::ostringstream os;
  os << serialize_scenario_config(rc.scenario);
  os << serialize_reward_config(rc.reward);
  emit(os, "features.host_capacity", rc.features.host_capacity);
  emit(os, "features.subnet_capacity", rc.features.subnet_capacity);
  emit(os, "features.summary_token_budget", rc.features.summary_token_budget);
  const auto& pl = rc.planner;
  emit(os, "planner.backend",
       std::string(pl.backend == PlannerBackendKind::None
                       ? "none"
                       : pl.backend == PlannerBackendKind::Scripted ? "scripted" : "remote"));
  emit(os, "planner.horizon", pl.horizon);
  emit(os, "planner.replan_on_failure", pl.replan_on_failure);
  emit(os, "planner.reflexion", pl.reflexion);
  emit(os, "planner.reflexion_capacity", pl.reflexion_capacity);
  emit(os, "planner.posture", std::string(posture_name(pl.posture)));
  emit(os, "planner.model", pl.model);
  emit(os, "planner.temperature", pl.temperature);
  const auto& tr = rc.train;
  emit(os, "train.lr_start", tr.lr_start);
  emit(os, "train.lr_end", tr.lr_end);
  emit(os, "train.lr_schedule", std::string(tr.lr_schedule == LrSchedule::Linear ? "linear" : "cosine"));
  emit(os, "train.clip_ratio", tr.clip_ratio);
  emit(os, "train.gamma", tr.gamma);
  emit(os, "train.gae_lambda", tr.gae_lambda);
  emit(os, "train.minibatch_size", tr.minibatch_size);
  emit(os, "train.ppo_epochs", tr.ppo_epochs);
  emit(os, "train.episodes_per_rollout", tr.episodes_per_rollout);
  emit(os, "train.max_grad_norm", tr.max_grad_norm);
  emit(os, "train.entropy_coef", tr.entropy_coef);
  emit(os, "train.value_coef", tr.value_coef);
  emit(os, "train.seed", tr.seed);
  emit(os, "train.total_episodes", tr.total_episodes);
  emit(os, "train.eval_every_episodes", tr.eval_every_episodes);
  emit(os, "train.eval_episodes", tr.eval_episodes);
  emit(os, "train.early_stop_threshold", tr.early_stop_threshold);
  emit(os, "train.early_stop_window", tr.early_stop_window);
  emit(os, "train.early_stop_min_episodes", tr.early_stop_min_episodes);
  emit(os, "train.curriculum", tr.curriculum);
  emit(os, "train.curriculum_ecr_threshold", tr.curriculum_ecr_threshold);
  emit(os, "train.start_stage", tr.start_stage);
  return os.str();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

}  // namespace redsim
