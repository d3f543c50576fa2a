#include "redsim/belief.hpp"

#include <algorithm>

namespace redsim {

namespace {
constexpr size_t kFailureWindow = 32;
}

BeliefState::BeliefState(HostId entry_host, SubnetId entry_subnet, int max_steps, EnvRules rules)
    : entry_(entry_host), max_steps_(max_steps), rules_(rules) {
  KnownHost& e = ensure_host(entry_host, entry_subnet);
  e.discovered = true;
  e.access = AccessLevel::User;
  e.session = true;
  e.ready_at = 0;
  ensure_subnet(entry_subnet).ready_at = 0;
}

KnownHost& BeliefState::ensure_host(HostId h, SubnetId subnet_hint) {
  auto [it, inserted] = hosts_.try_emplace(h);
  if (inserted) {
    it->second.id = h;
    it->second.subnet = subnet_hint;
  }
  return it->second;
}

KnownSubnet& BeliefState::ensure_subnet(SubnetId s) {
  auto [it, inserted] = subnets_.try_emplace(s);
  if (inserted) it->second.id = s;
  return it->second;
}

const KnownHost* BeliefState::host(HostId h) const {
  auto it = hosts_.find(h);
  return it == hosts_.end() ? nullptr : &it->second;
}

std::vector<HostId> BeliefState::session_hosts() const {
  std::vector<HostId> out;
  for (const auto& [id, h] : hosts_)
    if (h.session) out.push_back(id);
  return out;
}

bool BeliefState::reachable(SubnetId subnet) const {
  return source_for(subnet).has_value();
}

std::optional<HostId> BeliefState::source_for(SubnetId subnet) const {
  for (const auto& [id, h] : hosts_) {  // ascending ids
    if (!h.session) continue;
    if (h.subnet == subnet) return id;
    auto adj = adjacency_.find(h.subnet);
    if (adj != adjacency_.end() && adj->second.count(subnet)) return id;
  }
  return std::nullopt;
}

void BeliefState::apply(const Observation& obs, const GroundedAction& acted) {
  const int t = obs.step;
  last_action_ = acted.index;
  last_target_ = acted.kind == TargetKind::None ? std::optional<int>{} : std::optional<int>{acted.target};
  last_outcome_ = obs.action_outcome;

  // Sweep results: hosts revealed belong to the swept subnet.
  if (!obs.newly_discovered_hosts.empty() && acted.index == ActionId::DiscoverRemoteSystems) {
    for (HostId h : obs.newly_discovered_hosts) {
      KnownHost& kh = ensure_host(h, acted.target);
      kh.discovered = true;
      kh.ready_at = t + rules_.stage_latency;
    }
  }
  if (acted.index == ActionId::DiscoverRemoteSystems && obs.action_outcome == ActionOutcome::Success) {
    ensure_subnet(acted.target).swept = true;
    for (SubnetId s : obs.newly_discovered_subnets) {
      ensure_subnet(s).ready_at = t + rules_.stage_latency;
      adjacency_[acted.target].insert(s);
      adjacency_[s].insert(acted.target);
    }
  }

  for (const auto& sr : obs.scan_results) {
    KnownHost& kh = ensure_host(sr.host, sr.host == entry_ ? hosts_[entry_].subnet : -1);
    if (!sr.services.empty()) {
      kh.scanned = true;
      kh.service_count = static_cast<int>(sr.services.size());
      if (acted.index == ActionId::StealthServiceDiscovery) {
        // Completed fingerprint: exploitability flags are authoritative.
        kh.fingerprinted = true;
        kh.stealth_progress = rules_.stealth_scan_steps;
        kh.exploitable_known = false;
        for (const auto& sv : sr.services) kh.exploitable_known |= sv.exploitable;
      }
      kh.ready_at = t + rules_.stage_latency;
    }
    if (sr.decoy_hint != DecoyHint::Unknown) kh.decoy_hint = sr.decoy_hint;
  }

  if (obs.stealth_progress) {
    auto [h, p] = *obs.stealth_progress;
    ensure_host(h, -1).stealth_progress = p;
  }

  for (const auto& [h, level] : obs.access_changes) {
    KnownHost& kh = ensure_host(h, -1);
    kh.access = level;
    if (h == entry_) continue;
    kh.session = true;
    kh.ioc_planted = true;
    kh.decoy_hint = DecoyHint::Real;  // decoys never grant access
    if (level == AccessLevel::User) kh.exploited_by_us = true;
    kh.ready_at = t + (level == AccessLevel::Root ? 1 : rules_.stage_latency);
  }

  if (obs.impacted_host) ensure_host(*obs.impacted_host, -1).impacted = true;
  if (obs.degraded_host) ensure_host(*obs.degraded_host, -1).degraded = true;
  if (obs.withdrew_host) {
    KnownHost& kh = ensure_host(*obs.withdrew_host, -1);
    kh.session = false;
    kh.ioc_planted = false;
  }
  if (obs.decoy_alert) ensure_host(*obs.decoy_alert, -1).ioc_planted = true;

  // A lost session means the defenders restored the host; the public restore
  // semantics wipe access, artifacts, and impact, and relatch the host.
  for (HostId h : obs.lost_sessions) {
    KnownHost& kh = ensure_host(h, -1);
    kh.session = false;
    kh.access = AccessLevel::None;
    kh.exploited_by_us = false;
    kh.ioc_planted = false;
    kh.impacted = false;
    kh.degraded = false;
    kh.ready_at = t + rules_.restore_relatch;
  }

  if (obs.action_outcome != ActionOutcome::Success) {
    failures_.push_back({t, acted.index, acted.kind == TargetKind::None ? -1 : acted.target,
                         obs.outcome_reason});
    if (failures_.size() > kFailureWindow) failures_.erase(failures_.begin());
    if (acted.kind == TargetKind::Host && knows_host(acted.target)) {
      KnownHost& kh = hosts_[acted.target];
      kh.last_failure_step = t;
      if (acted.index == ActionId::ExploitRemoteService) kh.exploit_failed = true;
    }
  }

  step_ = t + 1;
}

}  // namespace redsim
