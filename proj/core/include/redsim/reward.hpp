#pragma once

// Four-layer reward shaping: environment (negated defender reward), kill-chain
// milestones, constraint penalties, and intent alignment.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "redsim/config.hpp"
#include "redsim/env.hpp"
#include "redsim/intent.hpp"

namespace redsim {

struct RewardBreakdown {
  double r_env = 0.0;
  double r_progress = 0.0;
  double r_constraint = 0.0;  // <= 0
  double r_alignment = 0.0;
  double total = 0.0;
  std::vector<std::string> milestones_fired;
};

// Per-episode memory: each milestone fires at most once per (host, milestone),
// except that a defender restore re-arms the compromise and escalation
// milestones for that host. Constraint penalties fire once per (host, kind).
class MilestoneTracker {
 public:
  void reset() { *this = MilestoneTracker{}; }
  bool fired(MilestoneKind kind, int id) const {
    return fired_.count({static_cast<int>(kind), id}) > 0;
  }
  bool defended_credited(SubnetId s) const { return defended_credited_.count(s) > 0; }

 private:
  friend RewardBreakdown shape(const RewardInputs&, const Intent*, MilestoneTracker&,
                               const RewardConfig&);
  std::set<std::pair<int, int>> fired_;
  std::set<SubnetId> defended_credited_;
  std::set<std::pair<int, HostId>> violations_seen_;
};

// True when the executed action matches the active intent: the category must
// name the action (or its tactic), and when the intent names a target the
// executed target must equal it (unless configured category-only).
bool intent_matches(const Intent& intent, const GroundedAction& executed,
                    const RewardConfig& cfg);

// Computes the step reward. `intent` may be null (RL-only mode): the
// alignment layer then contributes exactly zero.
RewardBreakdown shape(const RewardInputs& inputs, const Intent* intent,
                      MilestoneTracker& tracker, const RewardConfig& cfg);

}  // namespace redsim
