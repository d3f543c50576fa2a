#pragma once

// Episode driver: wires environment, belief, planner, mask, grounding, reward
// shaping, rollout collection, and trace recording for one episode.

#include <cstdint>
#include <functional>
#include <optional>

#include "redsim/actions.hpp"
#include "redsim/config.hpp"
#include "redsim/encoders.hpp"
#include "redsim/env.hpp"
#include "redsim/planner.hpp"
#include "redsim/ppo.hpp"
#include "redsim/trace.hpp"

namespace redsim {

enum class AgentKind : int {
  Policy = 0,      // actor-critic controller, optionally intent-conditioned
  Random,          // uniform over masked-in actions
  SleepOnly,       // always Sleep (degenerate baseline)
  OracleGreedy,    // executes the planner intent's action when masked-in
};

std::string_view agent_kind_name(AgentKind k);

struct EpisodeSpec {
  const RunConfig* run = nullptr;
  AgentKind kind = AgentKind::Policy;
  const PolicyParams* params = nullptr;  // required for AgentKind::Policy
  Planner* planner = nullptr;            // null = RL-only (null intent, no plans)
  std::uint64_t seed = 0;                // drives topology and action sampling
  int episode_id = 0;
  RolloutBuffer* rollout = nullptr;      // optional collection sink
  EpisodeTrace* trace = nullptr;         // optional trace sink
};

// Deterministic derivation of per-episode seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t salt = 0);

// Runs one fixed-horizon episode and returns its metrics. Throws only on
// configuration errors; planner failures fall back internally.
EpisodeMetrics run_episode(const EpisodeSpec& spec);

}  // namespace redsim
