#include "redsim/reward.hpp"

namespace redsim {

bool intent_matches(const Intent& intent, const GroundedAction& executed,
                    const RewardConfig& cfg) {
  bool category_ok = false;
  if (auto a = intent.category_action()) {
    category_ok = *a == executed.index;
  } else {
    category_ok = intent.category == action_tactic(executed.index);
  }
  if (!category_ok) return false;
  if (cfg.alignment_category_only || !intent.has_target()) return true;
  return executed.kind == intent.target_kind && executed.target == intent.target;
}

RewardBreakdown shape(const RewardInputs& inputs, const Intent* intent,
                      MilestoneTracker& tracker, const RewardConfig& cfg) {
  RewardBreakdown out;

  if (cfg.layer_env) out.r_env = -inputs.blue_penalty * cfg.env_scale;

  if (cfg.layer_progress) {
    for (const auto& ev : inputs.milestones) {
      auto key = std::make_pair(static_cast<int>(ev.kind), ev.id);
      if (tracker.fired_.count(key)) continue;
      tracker.fired_.insert(key);
      double value = 0.0;
      switch (ev.kind) {
        case MilestoneKind::DiscoverHost: value = cfg.discover_host; break;
        case MilestoneKind::DiscoverSubnet: value = cfg.discover_subnet; break;
        case MilestoneKind::ScanHost: value = cfg.scan_host; break;
        case MilestoneKind::CompromiseUser: value = cfg.compromise_user; break;
        case MilestoneKind::EscalateRoot: value = cfg.escalate_root; break;
        case MilestoneKind::ImpactHost: value = cfg.impact_host; break;
      }
      out.r_progress += value;
      out.milestones_fired.push_back(std::string(milestone_label(ev.kind)) + ":" +
                                     std::to_string(ev.id));
      if (ev.kind == MilestoneKind::CompromiseUser && ev.defended_subnet &&
          !tracker.defended_credited_.count(ev.subnet)) {
        tracker.defended_credited_.insert(ev.subnet);
        out.r_progress += cfg.first_compromise_defended;
        out.milestones_fired.push_back("first_compromise_defended:subnet-" +
                                       std::to_string(ev.subnet));
      }
    }
  } else {
    // Layer disabled: still consume first-occurrence state so re-enabling on
    // a replay stays aligned with the trace.
    for (const auto& ev : inputs.milestones) {
      tracker.fired_.insert({static_cast<int>(ev.kind), ev.id});
      if (ev.kind == MilestoneKind::CompromiseUser && ev.defended_subnet)
        tracker.defended_credited_.insert(ev.subnet);
    }
  }

  if (cfg.layer_constraint) {
    for (const auto& v : inputs.violations) {
      auto key = std::make_pair(static_cast<int>(v.kind), v.host);
      if (tracker.violations_seen_.count(key)) continue;
      tracker.violations_seen_.insert(key);
      switch (v.kind) {
        case ViolationKind::ImpactWithoutRoot: out.r_constraint += cfg.impact_without_root; break;
        case ViolationKind::ExploitWithoutScan: out.r_constraint += cfg.exploit_without_scan; break;
        case ViolationKind::EscalateWithoutUser: out.r_constraint += cfg.escalate_without_user; break;
      }
    }
  }

  // A restore re-arms the compromise and escalation milestones on that host
  // (anything else stays spent for the episode).
  for (HostId h : inputs.restored_hosts) {
    tracker.fired_.erase({static_cast<int>(MilestoneKind::CompromiseUser), h});
    tracker.fired_.erase({static_cast<int>(MilestoneKind::EscalateRoot), h});
  }

  if (cfg.layer_alignment && intent != nullptr) {
    out.r_alignment =
        intent_matches(*intent, inputs.executed, cfg) ? cfg.intent_match : cfg.intent_diverge;
  }

  out.total = out.r_env + out.r_progress + out.r_constraint + out.r_alignment;
  return out;
}

}  // namespace redsim
