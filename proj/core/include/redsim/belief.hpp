#pragma once

// The red agent's accumulated view of the network, built strictly from its
// own observations. Staging timers are mirrored locally using the public
// environment mechanics, so the action mask can be exact.

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "redsim/config.hpp"
#include "redsim/env.hpp"
#include "redsim/types.hpp"

namespace redsim {

struct KnownHost {
  HostId id = -1;
  SubnetId subnet = -1;
  bool discovered = false;
  bool scanned = false;
  bool fingerprinted = false;  // stealth scan completed: exploitability known
  int stealth_progress = 0;
  AccessLevel access = AccessLevel::None;
  bool session = false;
  bool exploited_by_us = false;
  bool impacted = false;
  bool degraded = false;
  bool ioc_planted = false;  // we believe our artifacts are on this host
  DecoyHint decoy_hint = DecoyHint::Unknown;
  bool exploit_failed = false;  // an exploit attempt on this host failed
  bool exploitable_known = false;
  int service_count = 0;
  int ready_at = 0;
  int last_failure_step = -1;
};

struct KnownSubnet {
  SubnetId id = -1;
  bool swept = false;
  int ready_at = 0;
};

struct FailureNote {
  int step = 0;
  ActionId action = ActionId::Sleep;
  int target = -1;
  OutcomeReason reason = OutcomeReason::Ok;
};

class BeliefState {
 public:
  BeliefState() = default;
  BeliefState(HostId entry_host, SubnetId entry_subnet, int max_steps, EnvRules rules);

  // Update with what one step revealed. `acted` is the action the agent
  // executed to cause this observation.
  void apply(const Observation& obs, const GroundedAction& acted);

  // Called when the planner issues a fresh intent, for the plan-age feature.
  void note_plan(int step) { last_plan_step_ = step; }

  int step() const { return step_; }
  int max_steps() const { return max_steps_; }
  HostId entry_host() const { return entry_; }
  const EnvRules& rules() const { return rules_; }
  int last_plan_step() const { return last_plan_step_; }
  ActionOutcome last_outcome() const { return last_outcome_; }
  std::optional<ActionId> last_action() const { return last_action_; }
  std::optional<int> last_target() const { return last_target_; }

  const std::map<HostId, KnownHost>& hosts() const { return hosts_; }
  const std::map<SubnetId, KnownSubnet>& subnets() const { return subnets_; }
  const std::vector<FailureNote>& recent_failures() const { return failures_; }

  bool knows_host(HostId h) const { return hosts_.count(h) > 0; }
  const KnownHost* host(HostId h) const;
  std::vector<HostId> session_hosts() const;  // ascending
  int discovered_count() const { return static_cast<int>(hosts_.size()); }
  bool ready(const KnownHost& h) const { return h.ready_at <= step_; }

  // A session exists in `subnet` or one of the subnets we know to border it.
  bool reachable(SubnetId subnet) const;
  // Lowest-id session host that can reach `subnet`, if any.
  std::optional<HostId> source_for(SubnetId subnet) const;

 private:
  KnownHost& ensure_host(HostId h, SubnetId subnet_hint);
  KnownSubnet& ensure_subnet(SubnetId s);

  HostId entry_ = 0;
  int max_steps_ = 0;
  EnvRules rules_;
  int step_ = 0;
  int last_plan_step_ = 0;
  ActionOutcome last_outcome_ = ActionOutcome::Success;
  std::optional<ActionId> last_action_;
  std::optional<int> last_target_;
  std::map<HostId, KnownHost> hosts_;
  std::map<SubnetId, KnownSubnet> subnets_;
  // Which subnets border which, as learned from sweeps (subnet -> neighbours).
  std::map<SubnetId, std::set<SubnetId>> adjacency_;
  std::vector<FailureNote> failures_;  // bounded, most recent last

  friend class BeliefTestPeer;
};

}  // namespace redsim
