#include "redsim/actions.hpp"

#include <stdexcept>

namespace redsim {

namespace {

bool host_target_ok(ActionId action, const KnownHost& h, const BeliefState& b) {
  if (h.id == b.entry_host()) return false;  // never target our own foothold
  if (!h.discovered) return false;
  if (!b.reachable(h.subnet)) return false;
  const int now = b.step();
  const bool ready = h.ready_at <= now;

  switch (action) {
    case ActionId::AggressiveServiceDiscovery:
      return !h.scanned && ready;
    case ActionId::StealthServiceDiscovery:
      return !h.scanned && (h.stealth_progress > 0 || ready);
    case ActionId::DiscoverDeception:
      return h.scanned && h.decoy_hint == DecoyHint::Unknown && ready;
    case ActionId::ExploitRemoteService:
      return h.scanned && h.access == AccessLevel::None && h.decoy_hint != DecoyHint::Decoy &&
             h.exploitable_known && ready;
    case ActionId::PrivilegeEscalate:
      return h.exploited_by_us &&
             (h.access == AccessLevel::User || h.access == AccessLevel::Elevated) && ready;
    case ActionId::Impact:
      return h.access == AccessLevel::Root && !h.impacted && ready;
    case ActionId::DegradeServices:
      return h.access == AccessLevel::Root && !h.degraded && ready;
    case ActionId::Withdraw:
      return h.session || h.ioc_planted;
    default:
      return false;
  }
}

}  // namespace

bool is_valid_target(ActionId action, int target, const BeliefState& belief) {
  if (action == ActionId::Sleep) return false;
  if (action == ActionId::DiscoverRemoteSystems) {
    auto it = belief.subnets().find(target);
    if (it == belief.subnets().end()) return false;
    const KnownSubnet& s = it->second;
    return !s.swept && s.ready_at <= belief.step() && belief.reachable(s.id);
  }
  const KnownHost* h = belief.host(target);
  return h != nullptr && host_target_ok(action, *h, belief);
}

std::vector<int> valid_targets(ActionId action, const BeliefState& belief) {
  std::vector<int> out;
  if (action == ActionId::Sleep) return out;
  if (action == ActionId::DiscoverRemoteSystems) {
    for (const auto& [id, s] : belief.subnets()) {
      if (is_valid_target(action, id, belief)) out.push_back(id);
    }
    return out;
  }
  for (const auto& [id, h] : belief.hosts()) {
    if (is_valid_target(action, id, belief)) out.push_back(id);
  }
  return out;
}

ActionMask action_mask(const BeliefState& belief) {
  ActionMask mask{};
  for (int i = 0; i < kActionCount; ++i) {
    auto a = static_cast<ActionId>(i);
    if (a == ActionId::Sleep) {
      mask[static_cast<size_t>(i)] = true;
      continue;
    }
    mask[static_cast<size_t>(i)] = !valid_targets(a, belief).empty();
  }
  return mask;
}

GroundedAction ground(ActionId index, const Intent* intent, const BeliefState& belief) {
  if (index == ActionId::Sleep) return GroundedAction::sleep();

  const TargetKind want = action_target_kind(index);
  int target = -1;
  if (intent != nullptr && intent->target_kind == want &&
      is_valid_target(index, intent->target, belief)) {
    target = intent->target;
  } else {
    auto candidates = valid_targets(index, belief);
    if (candidates.empty())
      throw std::logic_error("ground: action " + std::string(action_name(index)) +
                             " has no valid target (masked-out index)");
    target = candidates.front();
  }

  SubnetId subnet = -1;
  if (want == TargetKind::Subnet) {
    subnet = target;
  } else {
    const KnownHost* h = belief.host(target);
    if (h == nullptr) throw std::logic_error("ground: target host not in belief");
    subnet = h->subnet;
  }
  auto source = belief.source_for(subnet);
  if (!source) throw std::logic_error("ground: no session reaches the target subnet");

  return want == TargetKind::Subnet ? GroundedAction::on_subnet(index, target, *source)
                                    : GroundedAction::on_host(index, target, *source);
}

}  // namespace redsim
