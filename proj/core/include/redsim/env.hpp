#pragma once

// The POMDP core: ground-truth state, kill-chain transition rules, partial
// observations, and the per-step red-then-blue update. One Environment
// instance is strictly sequential; independent instances may run in parallel.

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "redsim/config.hpp"
#include "redsim/topology.hpp"
#include "redsim/types.hpp"

namespace redsim {

enum class MilestoneKind : int {
  DiscoverHost = 0,
  DiscoverSubnet,
  ScanHost,
  CompromiseUser,
  EscalateRoot,
  ImpactHost,
};

enum class ViolationKind : int {
  ImpactWithoutRoot = 0,
  ExploitWithoutScan,
  EscalateWithoutUser,
};

std::string_view milestone_label(MilestoneKind k);
std::string_view violation_label(ViolationKind k);

struct MilestoneEvent {
  MilestoneKind kind;
  int id = -1;          // host id, or subnet id for DiscoverSubnet
  SubnetId subnet = -1; // subnet the event happened in
  bool defended_subnet = false;
  bool operator==(const MilestoneEvent&) const = default;
};

struct ViolationEvent {
  ViolationKind kind;
  HostId host = -1;
  bool operator==(const ViolationEvent&) const = default;
};

struct HostTruth {
  AccessLevel access = AccessLevel::None;
  bool discovered = false;
  bool scanned = false;
  bool fingerprinted = false;  // exploitability intelligence gathered (stealth scan)
  bool impacted = false;
  bool degraded = false;
  bool ioc_present = false;
  bool exploited = false;  // user access gained through exploitation
  int stealth_progress = 0;
  int ready_at = 0;  // step index from which the next kill-chain stage can succeed
};

struct TrueState {
  Topology topology;
  std::vector<HostTruth> hosts;  // indexed by host id
  std::set<SubnetId> known_subnets;
  std::set<SubnetId> swept_subnets;
  std::map<SubnetId, int> subnet_ready_at;
  std::set<HostId> red_sessions;
  int step = 0;

  const HostTruth& host(HostId id) const { return hosts.at(static_cast<size_t>(id)); }
};

struct ScanResult {
  HostId host = -1;
  std::vector<Service> services;
  DecoyHint decoy_hint = DecoyHint::Unknown;
};

// Everything the red agent learns from one step. Contains only information
// causally revealed by its own actions or by session losses.
struct Observation {
  std::vector<HostId> newly_discovered_hosts;
  std::vector<SubnetId> newly_discovered_subnets;
  std::vector<ScanResult> scan_results;
  ActionOutcome action_outcome = ActionOutcome::Success;
  OutcomeReason outcome_reason = OutcomeReason::Ok;
  std::vector<std::pair<HostId, AccessLevel>> access_changes;
  std::vector<HostId> lost_sessions;
  int step = 0;

  // Side-channel facts still caused by red's own activity.
  std::optional<HostId> decoy_alert;           // source host flagged by a tripped decoy
  std::optional<std::pair<HostId, int>> stealth_progress;
  std::optional<HostId> impacted_host;
  std::optional<HostId> degraded_host;
  std::optional<HostId> withdrew_host;
};

struct RewardInputs {
  std::vector<MilestoneEvent> milestones;
  std::vector<ViolationEvent> violations;
  double blue_penalty = 0.0;  // <= 0
  std::vector<HostId> restored_hosts;
  GroundedAction executed;
  ActionOutcome outcome = ActionOutcome::Success;
};

struct StepResult {
  Observation observation;
  RewardInputs reward_inputs;
  bool done = false;
  std::map<std::string, double> info;
};

struct BlueRestore {
  int agent = -1;
  HostId host = -1;
};

// Zone-scoped IOC-driven defender team. Zones partition all subnets across
// the agents round-robin; an agent only acts on hosts in defended subnets.
class BlueTeam {
 public:
  BlueTeam() = default;
  BlueTeam(const Topology& topo, const ScenarioConfig& cfg);

  // Called once per environment step, after the red action resolves.
  // Returns restores performed this step and the (non-positive) penalty
  // accumulated before restoration takes effect.
  std::pair<std::vector<BlueRestore>, double> blue_step(TrueState& state);

  int agent_for_subnet(SubnetId s) const;
  bool host_defended(const Topology& topo, HostId h) const;
  int countdown(HostId h) const { return countdown_.at(static_cast<size_t>(h)); }
  bool in_recover_mode(HostId h) const { return recover_mode_.at(static_cast<size_t>(h)); }
  const std::set<SubnetId>& zone(int agent) const { return zones_.at(static_cast<size_t>(agent)); }
  int agent_count() const { return static_cast<int>(zones_.size()); }

 private:
  BlueConfig cfg_;
  int restore_relatch_ = 2;
  std::set<SubnetId> defended_;
  HostId entry_ = 0;
  std::vector<std::set<SubnetId>> zones_;
  std::vector<int> countdown_;     // -1 = idle
  std::vector<bool> recover_mode_; // true only on the step a restore fires
};

class Environment {
 public:
  Environment(Topology topo, ScenarioConfig cfg);

  Observation reset();
  StepResult step(const GroundedAction& action);

  // Debug/oracle access only; never exposed to the agent.
  const TrueState& true_state() const { return state_; }
  const ScenarioConfig& config() const { return cfg_; }
  const Topology& topology() const { return state_.topology; }
  int max_steps() const { return cfg_.max_steps; }
  bool done() const { return state_.step >= cfg_.max_steps; }
  bool defended(SubnetId s) const { return cfg_.defended_subnets.count(s) > 0; }
  const BlueTeam& blue() const { return blue_; }

 private:
  struct Resolution {
    ActionOutcome outcome = ActionOutcome::Success;
    OutcomeReason reason = OutcomeReason::Ok;
  };
  Resolution apply_red(const GroundedAction& a, Observation& obs,
                       std::vector<MilestoneEvent>& events,
                       std::vector<ViolationEvent>& violations);
  bool reachable_from_session(int target_subnet, HostId* source_out) const;

  ScenarioConfig cfg_;
  TrueState state_;
  BlueTeam blue_;
  std::mt19937_64 rng_;  // drawn only when exploit_failure_prob > 0
  bool active_ = false;
};

// The canonical shortest reset-to-impact action sequence for a topology whose
// entry subnet holds an exploitable non-decoy target. Emitted by simulating a
// cloned environment, so it stays exact under any rule constants.
std::vector<GroundedAction> canonical_kill_chain_trace(const Topology& topo,
                                                       const ScenarioConfig& cfg,
                                                       bool stealth);

}  // namespace redsim
