#include "redsim/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace redsim {

std::string_view milestone_label(MilestoneKind k) {
  switch (k) {
    case MilestoneKind::DiscoverHost: return "discover_host";
    case MilestoneKind::DiscoverSubnet: return "discover_subnet";
    case MilestoneKind::ScanHost: return "scan_host";
    case MilestoneKind::CompromiseUser: return "compromise_user";
    case MilestoneKind::EscalateRoot: return "escalate_root";
    case MilestoneKind::ImpactHost: return "impact_host";
  }
  return "?";
}

std::string_view violation_label(ViolationKind k) {
  switch (k) {
    case ViolationKind::ImpactWithoutRoot: return "impact_without_root";
    case ViolationKind::ExploitWithoutScan: return "exploit_without_scan";
    case ViolationKind::EscalateWithoutUser: return "escalate_without_user";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// BlueTeam

BlueTeam::BlueTeam(const Topology& topo, const ScenarioConfig& cfg)
    : cfg_(cfg.blue),
      restore_relatch_(cfg.rules.restore_relatch),
      defended_(cfg.defended_subnets),
      entry_(topo.red_entry_host) {
  zones_.resize(static_cast<size_t>(cfg_.agent_count));
  for (const auto& s : topo.subnets) {
    zones_[static_cast<size_t>(s.id % cfg_.agent_count)].insert(s.id);
  }
  countdown_.assign(topo.hosts.size(), -1);
  recover_mode_.assign(topo.hosts.size(), false);
}

int BlueTeam::agent_for_subnet(SubnetId s) const { return s % cfg_.agent_count; }

bool BlueTeam::host_defended(const Topology& topo, HostId h) const {
  return defended_.count(topo.host(h).subnet) > 0;
}

std::pair<std::vector<BlueRestore>, double> BlueTeam::blue_step(TrueState& state) {
  const Topology& topo = state.topology;
  double penalty = 0.0;

  // Score first: damage present this step counts even if restored below.
  // The red entry host is the attacker's own device, not a defended asset.
  for (const auto& h : topo.hosts) {
    if (h.id == entry_ || defended_.count(h.subnet) == 0) continue;
    const HostTruth& t = state.host(h.id);
    if (t.impacted) {
      penalty -= cfg_.weight_impacted;
    } else if (t.access == AccessLevel::Root) {
      penalty -= cfg_.weight_root;
    } else if (t.access == AccessLevel::User || t.access == AccessLevel::Elevated) {
      penalty -= cfg_.weight_user;
    }
  }

  std::vector<BlueRestore> restores;
  for (const auto& h : topo.hosts) {
    auto id = static_cast<size_t>(h.id);
    recover_mode_[id] = false;
    if (defended_.count(h.subnet) == 0) continue;  // outside every active zone

    HostTruth& t = state.hosts[id];
    int& cd = countdown_[id];
    if (!t.ioc_present) {
      cd = -1;  // artifact gone before detection completed
      continue;
    }
    if (cd < 0) {
      cd = cfg_.detection_delay;  // detection starts
    } else if (cd > 0) {
      --cd;
    }
    if (cd == 0) {
      recover_mode_[id] = true;
      restores.push_back({agent_for_subnet(h.subnet), h.id});
      t.access = AccessLevel::None;
      t.exploited = false;
      t.ioc_present = false;
      t.impacted = false;
      t.degraded = false;
      t.stealth_progress = 0;
      t.ready_at = state.step + restore_relatch_;
      state.red_sessions.erase(h.id);
      cd = -1;
    }
  }
  return {restores, penalty};
}

// ---------------------------------------------------------------------------
// Environment

Environment::Environment(Topology topo, ScenarioConfig cfg)
    : cfg_(std::move(cfg)), rng_(cfg_.seed ^ 0xda3e39cb94b95bdbull) {
  topo.check_invariants();
  cfg_.validate();
  state_.topology = std::move(topo);
  blue_ = BlueTeam(state_.topology, cfg_);
  reset();
}

Observation Environment::reset() {
  const Topology& topo = state_.topology;
  state_.hosts.assign(topo.hosts.size(), HostTruth{});
  state_.known_subnets.clear();
  state_.swept_subnets.clear();
  state_.subnet_ready_at.clear();
  state_.red_sessions.clear();
  state_.step = 0;

  HostId entry = topo.red_entry_host;
  HostTruth& e = state_.hosts[static_cast<size_t>(entry)];
  e.discovered = true;
  e.access = AccessLevel::User;
  e.ready_at = 0;
  state_.red_sessions.insert(entry);
  SubnetId home = topo.host(entry).subnet;
  state_.known_subnets.insert(home);
  state_.subnet_ready_at[home] = 0;

  blue_ = BlueTeam(topo, cfg_);
  active_ = true;

  Observation obs;
  obs.step = 0;
  obs.newly_discovered_hosts.push_back(entry);
  obs.newly_discovered_subnets.push_back(home);
  obs.access_changes.push_back({entry, AccessLevel::User});
  return obs;
}

bool Environment::reachable_from_session(int target_subnet, HostId* source_out) const {
  const Topology& topo = state_.topology;
  for (HostId s : state_.red_sessions) {  // std::set: ascending, lowest id wins
    SubnetId from = topo.host(s).subnet;
    if (from == target_subnet || topo.adjacent(from, target_subnet)) {
      if (source_out) *source_out = s;
      return true;
    }
  }
  return false;
}

Environment::Resolution Environment::apply_red(const GroundedAction& a, Observation& obs,
                                               std::vector<MilestoneEvent>& events,
                                               std::vector<ViolationEvent>& violations) {
  const Topology& topo = state_.topology;
  const EnvRules& rules = cfg_.rules;
  const int now = state_.step;

  if (a.index == ActionId::Sleep) return {ActionOutcome::Success, OutcomeReason::Slept};

  if (action_target_kind(a.index) == TargetKind::Subnet) {
    if (a.kind != TargetKind::Subnet) return {ActionOutcome::Blocked, OutcomeReason::BadTargetKind};
    SubnetId s = a.target;
    if (!topo.has_subnet(s)) return {ActionOutcome::Failure, OutcomeReason::UnknownTarget};
    if (state_.known_subnets.count(s) == 0) return {ActionOutcome::Blocked, OutcomeReason::NotDiscovered};
    if (state_.red_sessions.empty()) return {ActionOutcome::Blocked, OutcomeReason::NoSession};
    HostId source = -1;
    if (!reachable_from_session(s, &source)) return {ActionOutcome::Blocked, OutcomeReason::Unreachable};
    auto it = state_.subnet_ready_at.find(s);
    if (it != state_.subnet_ready_at.end() && it->second > now)
      return {ActionOutcome::Blocked, OutcomeReason::NotReady};

    // Sweep: reveal the subnet's hosts and the existence of neighbours.
    for (HostId h : topo.hosts_in_subnet(s)) {
      HostTruth& t = state_.hosts[static_cast<size_t>(h)];
      if (!t.discovered) {
        t.discovered = true;
        t.ready_at = now + rules.stage_latency;
        obs.newly_discovered_hosts.push_back(h);
        events.push_back({MilestoneKind::DiscoverHost, h, s, defended(s)});
      }
    }
    for (SubnetId n : topo.subnets[static_cast<size_t>(s)].adjacent) {
      if (state_.known_subnets.insert(n).second) {
        state_.subnet_ready_at[n] = now + rules.stage_latency;
        obs.newly_discovered_subnets.push_back(n);
        events.push_back({MilestoneKind::DiscoverSubnet, n, n, defended(n)});
      }
    }
    state_.swept_subnets.insert(s);
    return {ActionOutcome::Success, OutcomeReason::Ok};
  }

  // Host-targeted actions.
  if (a.kind != TargetKind::Host) return {ActionOutcome::Blocked, OutcomeReason::BadTargetKind};
  HostId h = a.target;
  if (!topo.has_host(h)) return {ActionOutcome::Failure, OutcomeReason::UnknownTarget};
  if (h == topo.red_entry_host) return {ActionOutcome::Blocked, OutcomeReason::EntryHost};
  HostTruth& t = state_.hosts[static_cast<size_t>(h)];
  if (!t.discovered) return {ActionOutcome::Blocked, OutcomeReason::NotDiscovered};
  if (state_.red_sessions.empty()) return {ActionOutcome::Blocked, OutcomeReason::NoSession};
  HostId source = -1;
  if (!reachable_from_session(topo.host(h).subnet, &source))
    return {ActionOutcome::Blocked, OutcomeReason::Unreachable};
  const Host& hd = topo.host(h);
  const bool subnet_defended = defended(hd.subnet);

  switch (a.index) {
    case ActionId::AggressiveServiceDiscovery: {
      if (t.scanned) return {ActionOutcome::Blocked, OutcomeReason::AlreadyDone};
      if (t.ready_at > now) return {ActionOutcome::Blocked, OutcomeReason::NotReady};
      t.scanned = true;
      t.ready_at = now + rules.stage_latency;
      if (hd.is_decoy && rules.decoy_scan_alarm) {
        // Honeypots alarm on noisy probes. The alarm is silent to red: the
        // scan looks ordinary, but the source session is now flagged.
        state_.hosts[static_cast<size_t>(source)].ioc_present = true;
      }
      // Fast, noisy enumeration: service names come back, but the probe is
      // too crude to fingerprint exploitability. Only the slow stealth scan
      // yields actionable exploit intelligence.
      std::vector<Service> redacted = hd.services;
      for (auto& sv : redacted) sv.exploitable = false;
      obs.scan_results.push_back({h, std::move(redacted), DecoyHint::Unknown});
      events.push_back({MilestoneKind::ScanHost, h, hd.subnet, subnet_defended});
      return {ActionOutcome::Success, OutcomeReason::Ok};
    }
    case ActionId::StealthServiceDiscovery: {
      // Slow fingerprinting sweep. A host already enumerated by the noisy
      // scan keeps its defenders' sensors primed: the quiet approach is gone.
      if (t.scanned) return {ActionOutcome::Blocked, OutcomeReason::AlreadyDone};
      if (t.stealth_progress == 0 && t.ready_at > now)
        return {ActionOutcome::Blocked, OutcomeReason::NotReady};
      ++t.stealth_progress;
      if (t.stealth_progress >= rules.stealth_scan_steps) {
        t.scanned = true;
        t.fingerprinted = true;
        t.stealth_progress = rules.stealth_scan_steps;
        t.ready_at = now + rules.stage_latency;
        obs.scan_results.push_back({h, hd.services, DecoyHint::Unknown});
        events.push_back({MilestoneKind::ScanHost, h, hd.subnet, subnet_defended});
      } else {
        obs.stealth_progress = {{h, t.stealth_progress}};
      }
      return {ActionOutcome::Success, OutcomeReason::Ok};
    }
    case ActionId::DiscoverDeception: {
      if (!t.scanned) return {ActionOutcome::Blocked, OutcomeReason::NotScanned};
      if (t.ready_at > now) return {ActionOutcome::Blocked, OutcomeReason::NotReady};
      obs.scan_results.push_back({h, {}, hd.is_decoy ? DecoyHint::Decoy : DecoyHint::Real});
      return {ActionOutcome::Success, OutcomeReason::Ok};
    }
    case ActionId::ExploitRemoteService: {
      if (!t.scanned) {
        violations.push_back({ViolationKind::ExploitWithoutScan, h});
        return {ActionOutcome::Failure, OutcomeReason::NotScanned};
      }
      if (t.access != AccessLevel::None) return {ActionOutcome::Blocked, OutcomeReason::AlreadyDone};
      if (t.ready_at > now) return {ActionOutcome::Blocked, OutcomeReason::NotReady};
      if (hd.is_decoy) {
        // Tripped deception: the attempt fails and the source session host is
        // flagged for the defenders.
        state_.hosts[static_cast<size_t>(source)].ioc_present = true;
        obs.decoy_alert = source;
        obs.scan_results.push_back({h, {}, DecoyHint::Decoy});
        return {ActionOutcome::Failure, OutcomeReason::DecoyTripped};
      }
      if (!hd.exploitable()) return {ActionOutcome::Blocked, OutcomeReason::NoViableTarget};
      if (rules.exploit_failure_prob > 0.0) {
        double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        if (u < rules.exploit_failure_prob) return {ActionOutcome::Failure, OutcomeReason::StochasticFail};
      }
      t.access = AccessLevel::User;
      t.exploited = true;
      t.ioc_present = true;
      t.ready_at = now + rules.stage_latency;
      state_.red_sessions.insert(h);
      obs.access_changes.push_back({h, AccessLevel::User});
      events.push_back({MilestoneKind::CompromiseUser, h, hd.subnet, subnet_defended});
      return {ActionOutcome::Success, OutcomeReason::Ok};
    }
    case ActionId::PrivilegeEscalate: {
      if (t.access == AccessLevel::None || !t.exploited) {
        violations.push_back({ViolationKind::EscalateWithoutUser, h});
        return {ActionOutcome::Failure, OutcomeReason::NoAccess};
      }
      if (t.access == AccessLevel::Root) return {ActionOutcome::Blocked, OutcomeReason::AlreadyDone};
      if (t.ready_at > now) return {ActionOutcome::Blocked, OutcomeReason::NotReady};
      if (t.access == AccessLevel::User) {
        t.access = AccessLevel::Elevated;
        t.ready_at = now + rules.stage_latency;
      } else {
        t.access = AccessLevel::Root;
        t.ready_at = now + 1;  // root control is immediately actionable
        events.push_back({MilestoneKind::EscalateRoot, h, hd.subnet, subnet_defended});
      }
      t.ioc_present = true;
      state_.red_sessions.insert(h);  // escalation runs an implant on the host
      obs.access_changes.push_back({h, t.access});
      return {ActionOutcome::Success, OutcomeReason::Ok};
    }
    case ActionId::Impact: {
      if (t.access != AccessLevel::Root) {
        violations.push_back({ViolationKind::ImpactWithoutRoot, h});
        return {ActionOutcome::Failure, OutcomeReason::NoAccess};
      }
      if (t.impacted) return {ActionOutcome::Blocked, OutcomeReason::AlreadyDone};
      if (t.ready_at > now) return {ActionOutcome::Blocked, OutcomeReason::NotReady};
      t.impacted = true;
      obs.impacted_host = h;
      events.push_back({MilestoneKind::ImpactHost, h, hd.subnet, subnet_defended});
      return {ActionOutcome::Success, OutcomeReason::Ok};
    }
    case ActionId::DegradeServices: {
      if (t.access != AccessLevel::Root) {
        violations.push_back({ViolationKind::ImpactWithoutRoot, h});
        return {ActionOutcome::Failure, OutcomeReason::NoAccess};
      }
      if (t.degraded) return {ActionOutcome::Blocked, OutcomeReason::AlreadyDone};
      if (t.ready_at > now) return {ActionOutcome::Blocked, OutcomeReason::NotReady};
      t.degraded = true;
      obs.degraded_host = h;
      return {ActionOutcome::Success, OutcomeReason::Ok};
    }
    case ActionId::Withdraw: {
      bool had_session = state_.red_sessions.count(h) > 0;
      if (!had_session && !t.ioc_present) return {ActionOutcome::Blocked, OutcomeReason::NoViableTarget};
      state_.red_sessions.erase(h);
      t.ioc_present = false;
      obs.withdrew_host = h;
      return {ActionOutcome::Success, OutcomeReason::Ok};
    }
    default:
      return {ActionOutcome::Blocked, OutcomeReason::BadTargetKind};
  }
}

StepResult Environment::step(const GroundedAction& action) {
  if (!active_) throw std::logic_error("env: step() before reset()");
  if (state_.step >= cfg_.max_steps) throw std::logic_error("env: episode already over");

  StepResult result;
  Observation& obs = result.observation;
  auto& ri = result.reward_inputs;
  ri.executed = action;

  Resolution res = apply_red(action, obs, ri.milestones, ri.violations);
  obs.action_outcome = res.outcome;
  obs.outcome_reason = res.reason;
  ri.outcome = res.outcome;

  auto [restores, penalty] = blue_.blue_step(state_);
  ri.blue_penalty = penalty;
  for (const auto& r : restores) {
    ri.restored_hosts.push_back(r.host);
    obs.lost_sessions.push_back(r.host);
  }

  obs.step = state_.step;
  state_.step += 1;
  result.done = state_.step >= cfg_.max_steps;
  result.info["blue_restores"] = static_cast<double>(restores.size());
  return result;
}

std::vector<GroundedAction> canonical_kill_chain_trace(const Topology& topo,
                                                       const ScenarioConfig& cfg,
                                                       bool stealth) {
  // Lowest-id non-decoy exploitable target in the entry subnet.
  SubnetId home = topo.host(topo.red_entry_host).subnet;
  HostId target = -1;
  for (const auto& h : topo.hosts) {
    if (h.subnet == home && h.id != topo.red_entry_host && !h.is_decoy && h.exploitable()) {
      target = h.id;
      break;
    }
  }
  if (target < 0) throw std::invalid_argument("entry subnet has no exploitable target");

  Environment sim(topo, cfg);
  sim.reset();
  HostId entry = topo.red_entry_host;

  std::vector<GroundedAction> trace;
  auto attempt = [&](GroundedAction ga) -> bool {
    Environment probe = sim;
    StepResult r = probe.step(ga);
    if (r.observation.action_outcome == ActionOutcome::Blocked) return false;
    sim.step(ga);
    trace.push_back(ga);
    return true;
  };

  while (!sim.done()) {
    const TrueState& st = sim.true_state();
    const HostTruth& t = st.host(target);
    GroundedAction next;
    if (!t.discovered) {
      next = GroundedAction::on_subnet(ActionId::DiscoverRemoteSystems, home, entry);
    } else if (!t.scanned) {
      next = GroundedAction::on_host(
          stealth ? ActionId::StealthServiceDiscovery : ActionId::AggressiveServiceDiscovery,
          target, entry);
    } else if (t.access == AccessLevel::None) {
      next = GroundedAction::on_host(ActionId::ExploitRemoteService, target, entry);
    } else if (t.access != AccessLevel::Root) {
      next = GroundedAction::on_host(ActionId::PrivilegeEscalate, target, entry);
    } else if (!t.impacted) {
      next = GroundedAction::on_host(ActionId::Impact, target, entry);
    } else {
      break;  // impact achieved
    }
    if (!attempt(next)) {
      sim.step(GroundedAction::sleep());
      trace.push_back(GroundedAction::sleep());
    }
  }
  if (!sim.true_state().host(target).impacted)
    throw std::logic_error("canonical trace did not reach impact within the horizon");
  return trace;
}

}  // namespace redsim
