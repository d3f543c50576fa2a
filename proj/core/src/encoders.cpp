#include "redsim/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace redsim {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

const std::vector<std::string>& per_host_feature_names() {
  static const std::vector<std::string> names = {
      "discovered", "scanned", "stealth_progress", "access_none", "access_user",
      "access_elevated", "access_root", "session", "exploited_by_us", "impacted",
      "degraded", "ioc_planted", "decoy_unknown", "decoy_real", "decoy_decoy",
      "stage_ready", "exploitable_known", "exploit_failed", "subnet_position",
      "service_count", "last_action_target"};
  return names;
}

const std::vector<std::string>& global_feature_names() {
  static std::vector<std::string> names = [] {
    std::vector<std::string> n = {
        "step_frac", "discovered_frac", "scanned_frac", "access_frac", "root_frac",
        "impacted_frac", "session_frac", "subnets_known_frac", "subnets_swept_frac",
        "decoys_known_frac", "last_outcome_success", "last_outcome_failure",
        "last_outcome_blocked"};
    for (auto name : action_names()) n.push_back("last_action_" + std::string(name));
    n.push_back("plan_age_frac");
    n.push_back("recent_failures_frac");
    return n;
  }();
  return names;
}

int tactic_slot(std::string_view tactic) {
  if (tactic == "Discovery") return 0;
  if (tactic == "Initial Access") return 1;
  if (tactic == "Privilege Escalation") return 2;
  if (tactic == "Impact") return 3;
  if (tactic == "Defense Evasion") return 4;
  return -1;
}

}  // namespace

std::vector<double> featurize(const BeliefState& belief, const FeatureConfig& cfg,
                              int planner_horizon) {
  const int cap = cfg.host_capacity;
  if (belief.discovered_count() > cap)
    throw std::invalid_argument("featurize: belief holds " +
                                std::to_string(belief.discovered_count()) +
                                " hosts, capacity is " + std::to_string(cap));

  std::vector<double> v(static_cast<size_t>(cfg.dimension()), 0.0);
  const int now = belief.step();
  const auto& rules = belief.rules();

  int scanned = 0, accessed = 0, rooted = 0, impacted = 0, sessions = 0, decoys = 0;
  for (const auto& [id, h] : belief.hosts()) {
    if (id >= cap)
      throw std::invalid_argument("featurize: host id " + std::to_string(id) +
                                  " exceeds capacity " + std::to_string(cap));
    double* b = v.data() + static_cast<size_t>(id) * FeatureConfig::kPerHostFeatures;
    b[0] = h.discovered ? 1.0 : 0.0;
    b[1] = h.scanned ? 1.0 : 0.0;
    b[2] = clamp01(static_cast<double>(h.stealth_progress) / rules.stealth_scan_steps);
    b[3 + static_cast<int>(h.access)] = 1.0;
    b[7] = h.session ? 1.0 : 0.0;
    b[8] = h.exploited_by_us ? 1.0 : 0.0;
    b[9] = h.impacted ? 1.0 : 0.0;
    b[10] = h.degraded ? 1.0 : 0.0;
    b[11] = h.ioc_planted ? 1.0 : 0.0;
    b[12 + static_cast<int>(h.decoy_hint)] = 1.0;
    b[15] = h.ready_at <= now ? 1.0 : 0.0;
    b[16] = h.exploitable_known ? 1.0 : 0.0;
    b[17] = h.exploit_failed ? 1.0 : 0.0;
    b[18] = clamp01(static_cast<double>(std::max(0, h.subnet)) /
                    std::max(1, cfg.subnet_capacity - 1));
    b[19] = clamp01(h.service_count / 8.0);
    if (belief.last_target() && *belief.last_target() == id &&
        belief.last_action() && action_target_kind(*belief.last_action()) == TargetKind::Host)
      b[20] = 1.0;

    scanned += h.scanned;
    accessed += h.access != AccessLevel::None;
    rooted += h.access == AccessLevel::Root;
    impacted += h.impacted;
    sessions += h.session;
    decoys += h.decoy_hint == DecoyHint::Decoy;
  }

  double* g = v.data() + static_cast<size_t>(cap) * FeatureConfig::kPerHostFeatures;
  g[0] = clamp01(static_cast<double>(now) / std::max(1, belief.max_steps()));
  g[1] = clamp01(static_cast<double>(belief.discovered_count()) / cap);
  g[2] = clamp01(static_cast<double>(scanned) / cap);
  g[3] = clamp01(static_cast<double>(accessed) / cap);
  g[4] = clamp01(static_cast<double>(rooted) / cap);
  g[5] = clamp01(static_cast<double>(impacted) / cap);
  g[6] = clamp01(static_cast<double>(sessions) / cap);
  g[7] = clamp01(static_cast<double>(belief.subnets().size()) / cfg.subnet_capacity);
  {
    int swept = 0;
    for (const auto& [id, s] : belief.subnets()) swept += s.swept;
    g[8] = clamp01(static_cast<double>(swept) / cfg.subnet_capacity);
  }
  g[9] = clamp01(static_cast<double>(decoys) / cap);
  if (belief.last_action()) {
    g[10 + static_cast<int>(belief.last_outcome())] = 1.0;
    g[13 + static_cast<int>(*belief.last_action())] = 1.0;
  }
  g[23] = clamp01(static_cast<double>(now - belief.last_plan_step()) /
                  std::max(1, planner_horizon));
  {
    int recent = 0;
    for (const auto& f : belief.recent_failures())
      if (f.step >= now - 10) ++recent;
    g[24] = clamp01(recent / 10.0);
  }
  return v;
}

int count_tokens(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  int n = 0;
  while (in >> tok) ++n;
  return n;
}

std::string summarize(const BeliefState& belief,
                      const std::vector<ReflectionEntry>& reflections,
                      const FeatureConfig& cfg) {
  const int budget = cfg.summary_token_budget;
  std::vector<std::string> lines;

  {
    std::ostringstream h;
    h << "Step " << belief.step() << "/" << belief.max_steps() << ". Hosts known: "
      << belief.discovered_count() << ". Subnets known: " << belief.subnets().size() << ".";
    lines.push_back(h.str());
  }

  std::vector<std::string> sessions;
  for (HostId id : belief.session_hosts()) {
    const KnownHost* h = belief.host(id);
    std::ostringstream s;
    s << "Session: host-" << id << " (subnet-" << h->subnet
      << (id == belief.entry_host() ? ", entry" : "") << ", " << access_name(h->access) << ")";
    sessions.push_back(s.str());
  }

  std::vector<std::string> failures;
  {
    const auto& fs = belief.recent_failures();
    size_t start = fs.size() > 5 ? fs.size() - 5 : 0;
    for (size_t i = start; i < fs.size(); ++i) {
      std::ostringstream s;
      s << "Failed: " << action_name(fs[i].action);
      if (fs[i].target >= 0) s << " on " << fs[i].target;
      s << " at step " << fs[i].step << " (" << outcome_reason_name(fs[i].reason) << ")";
      failures.push_back(s.str());
    }
  }

  std::vector<std::string> hosts;
  for (const auto& [id, h] : belief.hosts()) {
    if (id == belief.entry_host()) continue;
    std::ostringstream s;
    s << "host-" << id << " subnet-" << h.subnet;
    s << (h.scanned ? " scanned" : " unscanned");
    if (h.access != AccessLevel::None) s << " access=" << access_name(h.access);
    if (h.exploitable_known) s << " exploitable";
    if (h.decoy_hint == DecoyHint::Decoy) s << " DECOY";
    if (h.decoy_hint == DecoyHint::Real) s << " verified-real";
    if (h.impacted) s << " impacted";
    if (h.degraded) s << " degraded";
    if (h.ioc_planted) s << " ioc";
    if (h.ready_at > belief.step()) s << " staging";
    hosts.push_back(s.str());
  }

  std::vector<std::string> refl;
  for (const auto& r : reflections) {
    refl.push_back("Reflection (episode " + std::to_string(r.episode_id) + "): " + r.text);
  }

  std::ostringstream out;
  int used = count_tokens(lines[0]);
  out << lines[0];
  auto emit_section = [&](const std::vector<std::string>& section) {
    for (const auto& line : section) {
      int t = count_tokens(line);
      if (used + t > budget) return;
      out << "\n" << line;
      used += t;
    }
  };
  emit_section(sessions);
  emit_section(failures);
  emit_section(hosts);
  emit_section(refl);
  return out.str();
}

std::vector<double> encode_intent(const Intent* intent, const FeatureConfig& cfg) {
  std::vector<double> v(static_cast<size_t>(FeatureConfig::kIntentDim), 0.0);
  (void)cfg;
  if (intent == nullptr) return v;

  if (auto a = intent->category_action()) {
    v[static_cast<size_t>(static_cast<int>(*a))] = 1.0;
  } else if (int slot = tactic_slot(intent->category); slot >= 0) {
    v[static_cast<size_t>(10 + slot)] = 1.0;
  }
  if (int slot = tactic_slot(intent->tactic); slot >= 0) v[static_cast<size_t>(15 + slot)] = 1.0;

  v[static_cast<size_t>(20 + static_cast<int>(intent->target_kind))] = 1.0;
  if (intent->target_kind != TargetKind::None) {
    double id = static_cast<double>(intent->target);
    for (int k = 0; k < 4; ++k) {
      double freq = std::pow(64.0, -static_cast<double>(k) / 4.0);
      v[static_cast<size_t>(23 + 2 * k)] = 0.5 * (1.0 + std::sin(id * freq));
      v[static_cast<size_t>(24 + 2 * k)] = 0.5 * (1.0 + std::cos(id * freq));
    }
    v[31] = clamp01(id / 64.0);
  }
  v[32] = 0.5 * static_cast<double>(intent->risk_posture);
  v[33] = intent->confidence;
  return v;
}

std::string feature_layout_manifest(const FeatureConfig& cfg) {
  nlohmann::ordered_json j;
  j["layout_version"] = "rf-1";
  j["host_capacity"] = cfg.host_capacity;
  j["subnet_capacity"] = cfg.subnet_capacity;
  j["per_host_features"] = per_host_feature_names();
  j["global_features"] = global_feature_names();
  j["feature_dimension"] = cfg.dimension();
  j["intent_dimension"] = FeatureConfig::kIntentDim;
  j["intent_layout"] = {
      {"category_onehot", "0..14 (10 actions then 5 tactics)"},
      {"tactic_onehot", "15..19"},
      {"target_kind_onehot", "20..22"},
      {"target_positional", "23..30 (sin/cos pairs)"},
      {"target_id_scaled", 31},
      {"risk_posture", 32},
      {"confidence", 33},
      {"padding", "34..127"}};
  return j.dump(2);
}

}  // namespace redsim
