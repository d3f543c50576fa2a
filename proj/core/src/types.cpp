#include "redsim/types.hpp"

namespace redsim {

namespace {

const std::array<std::string_view, kActionCount> kNames = {
    "DiscoverRemoteSystems", "AggressiveServiceDiscovery",
    "StealthServiceDiscovery", "DiscoverDeception",
    "ExploitRemoteService", "PrivilegeEscalate",
    "Impact", "DegradeServices",
    "Withdraw", "Sleep"};

const std::array<std::string_view, kActionCount> kTactics = {
    "Discovery", "Discovery", "Discovery", "Discovery",
    "Initial Access", "Privilege Escalation",
    "Impact", "Impact",
    "Defense Evasion", "Defense Evasion"};

}  // namespace

const std::array<std::string_view, kActionCount>& action_names() { return kNames; }
const std::array<std::string_view, kActionCount>& action_tactics() { return kTactics; }

std::string_view action_name(ActionId a) { return kNames[static_cast<int>(a)]; }
std::string_view action_tactic(ActionId a) { return kTactics[static_cast<int>(a)]; }

std::optional<ActionId> action_from_name(std::string_view name) {
  for (int i = 0; i < kActionCount; ++i) {
    if (kNames[i] == name) return static_cast<ActionId>(i);
  }
  return std::nullopt;
}

bool is_tactic_name(std::string_view name) {
  for (auto t : kTactics) {
    if (t == name) return true;
  }
  return false;
}

TargetKind action_target_kind(ActionId a) {
  switch (a) {
    case ActionId::DiscoverRemoteSystems:
      return TargetKind::Subnet;
    case ActionId::Sleep:
      return TargetKind::None;
    default:
      return TargetKind::Host;
  }
}

std::string_view outcome_name(ActionOutcome o) {
  switch (o) {
    case ActionOutcome::Success: return "Success";
    case ActionOutcome::Failure: return "Failure";
    case ActionOutcome::Blocked: return "Blocked";
  }
  return "?";
}

std::string_view outcome_reason_name(OutcomeReason r) {
  switch (r) {
    case OutcomeReason::Ok: return "ok";
    case OutcomeReason::UnknownTarget: return "unknown_target";
    case OutcomeReason::Unreachable: return "unreachable";
    case OutcomeReason::NoSession: return "no_session";
    case OutcomeReason::NotDiscovered: return "not_discovered";
    case OutcomeReason::NotScanned: return "not_scanned";
    case OutcomeReason::NoAccess: return "no_access";
    case OutcomeReason::WrongAccessLevel: return "wrong_access_level";
    case OutcomeReason::NotReady: return "not_ready";
    case OutcomeReason::DecoyTripped: return "decoy_tripped";
    case OutcomeReason::AlreadyDone: return "already_done";
    case OutcomeReason::EntryHost: return "entry_host";
    case OutcomeReason::StochasticFail: return "stochastic_fail";
    case OutcomeReason::KnownDecoy: return "known_decoy";
    case OutcomeReason::BadTargetKind: return "bad_target_kind";
    case OutcomeReason::NoViableTarget: return "no_viable_target";
    case OutcomeReason::Slept: return "slept";
  }
  return "?";
}

std::optional<OutcomeReason> outcome_reason_from_name(std::string_view name) {
  for (int r = 0; r <= static_cast<int>(OutcomeReason::Slept); ++r) {
    auto v = static_cast<OutcomeReason>(r);
    if (outcome_reason_name(v) == name) return v;
  }
  return std::nullopt;
}

std::string_view access_name(AccessLevel a) {
  switch (a) {
    case AccessLevel::None: return "None";
    case AccessLevel::User: return "User";
    case AccessLevel::Elevated: return "Elevated";
    case AccessLevel::Root: return "Root";
  }
  return "?";
}

std::string_view posture_name(RiskPosture p) {
  switch (p) {
    case RiskPosture::Stealthy: return "stealthy";
    case RiskPosture::Balanced: return "balanced";
    case RiskPosture::Aggressive: return "aggressive";
  }
  return "?";
}

std::optional<RiskPosture> posture_from_name(std::string_view name) {
  if (name == "stealthy") return RiskPosture::Stealthy;
  if (name == "balanced") return RiskPosture::Balanced;
  if (name == "aggressive") return RiskPosture::Aggressive;
  return std::nullopt;
}

}  // namespace redsim
