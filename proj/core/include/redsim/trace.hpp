#pragma once

// Episode traces: every step's action, outcome, and reward facts, serialized
// as line-delimited JSON for replay and reflection generation. Reports are
// pure functions of these files.

#include <optional>
#include <string>
#include <vector>

#include "redsim/intent.hpp"
#include "redsim/reward.hpp"
#include "redsim/types.hpp"

namespace redsim {

struct TraceStep {
  int step = 0;
  GroundedAction action;
  ActionOutcome outcome = ActionOutcome::Success;
  OutcomeReason reason = OutcomeReason::Ok;
  RewardBreakdown reward;
  std::vector<std::string> violations;
  std::vector<HostId> restored_hosts;
  int discovered_count = 0;  // hosts known to red after this step
  bool planner_invoked = false;
  bool planner_fallback = false;
  std::optional<Intent> intent;  // set when the planner ran this step
};

struct EpisodeTrace {
  int episode_id = 0;
  std::uint64_t seed = 0;
  std::string agent_label;
  std::string scenario_hash;
  std::string reward_hash;
  std::vector<TraceStep> steps;
};

struct EpisodeMetrics {
  bool compromised = false;  // at least one exploit-achieved compromise
  int attack_actions = 0;    // attempted exploit/escalate/impact-tactic actions
  int attack_successes = 0;
  int peak_hosts_discovered = 0;
  double total_reward = 0.0;
  int steps_to_first_compromise = -1;  // -1 = never
  int planner_invocations = 0;
  int planner_fallbacks = 0;
};

// Derives the per-episode metrics from a trace (the only path: evaluation
// also goes through this, so re-aggregation from files is exact).
EpisodeMetrics metrics_from_trace(const EpisodeTrace& trace);

std::string trace_to_jsonl(const EpisodeTrace& trace);
EpisodeTrace trace_from_jsonl(const std::string& text);

void write_trace_file(const EpisodeTrace& trace, const std::string& path);
EpisodeTrace read_trace_file(const std::string& path);

}  // namespace redsim
