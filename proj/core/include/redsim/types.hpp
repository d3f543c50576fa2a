#pragma once

// Core identifiers, the fixed 10-action catalogue, and small shared enums.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace redsim {

using HostId = int;
using SubnetId = int;

inline constexpr int kActionCount = 10;

// Discrete action space. Indices are part of the trace file format and the
// policy head layout; do not reorder.
enum class ActionId : int {
  DiscoverRemoteSystems = 0,
  AggressiveServiceDiscovery = 1,
  StealthServiceDiscovery = 2,
  DiscoverDeception = 3,
  ExploitRemoteService = 4,
  PrivilegeEscalate = 5,
  Impact = 6,
  DegradeServices = 7,
  Withdraw = 8,
  Sleep = 9,
};

enum class AccessLevel : int { None = 0, User = 1, Elevated = 2, Root = 3 };

enum class ActionOutcome : int { Success = 0, Failure = 1, Blocked = 2 };

// Why an action resolved the way it did. Blocked reasons are ones a correct
// belief could have predicted; Failure reasons are not knowable in advance.
enum class OutcomeReason : int {
  Ok = 0,
  UnknownTarget,    // target id never observed (Failure, per contract)
  Unreachable,      // no live session in the target's subnet or a neighbour
  NoSession,        // red holds no sessions at all
  NotDiscovered,
  NotScanned,
  NoAccess,
  WrongAccessLevel,
  NotReady,         // staging latency has not elapsed
  DecoyTripped,     // exploited a decoy; alert raised on the source session
  AlreadyDone,
  EntryHost,        // kill-chain actions never target red's own foothold
  StochasticFail,
  KnownDecoy,
  BadTargetKind,
  NoViableTarget,   // e.g. no exploitable service, nothing to withdraw
  Slept,
};

enum class TargetKind : int { None = 0, Host = 1, Subnet = 2 };

enum class RiskPosture : int { Stealthy = 0, Balanced = 1, Aggressive = 2 };

enum class DecoyHint : int { Unknown = 0, Real = 1, Decoy = 2 };

const std::array<std::string_view, kActionCount>& action_names();
const std::array<std::string_view, kActionCount>& action_tactics();

std::string_view action_name(ActionId a);
std::string_view action_tactic(ActionId a);
std::optional<ActionId> action_from_name(std::string_view name);
bool is_tactic_name(std::string_view name);

// Target kind each action index expects: 0 sweeps a subnet, 1-8 act on a
// host, 9 takes no target.
TargetKind action_target_kind(ActionId a);

std::string_view outcome_name(ActionOutcome o);
std::string_view outcome_reason_name(OutcomeReason r);
std::optional<OutcomeReason> outcome_reason_from_name(std::string_view name);
std::string_view access_name(AccessLevel a);
std::string_view posture_name(RiskPosture p);
std::optional<RiskPosture> posture_from_name(std::string_view name);

// A fully grounded action: index plus a concrete target and source session.
// `target` is a host id for actions 1-8, a subnet id for action 0, and
// ignored for Sleep.
struct GroundedAction {
  ActionId index = ActionId::Sleep;
  TargetKind kind = TargetKind::None;
  int target = -1;
  HostId source = -1;

  static GroundedAction sleep() { return {}; }
  static GroundedAction on_host(ActionId a, HostId h, HostId src) {
    return {a, TargetKind::Host, h, src};
  }
  static GroundedAction on_subnet(ActionId a, SubnetId s, HostId src) {
    return {a, TargetKind::Subnet, s, src};
  }
  bool operator==(const GroundedAction&) const = default;
};

}  // namespace redsim
