#pragma once

// Dual state representation: the controller's numeric feature vector, the
// planner's text summary, and the fixed intent embedding. Pure functions.

#include <string>
#include <vector>

#include "redsim/belief.hpp"
#include "redsim/config.hpp"
#include "redsim/intent.hpp"

namespace redsim {

struct ReflectionEntry {
  int episode_id = 0;
  std::string text;
  bool compromised = false;              // ECR flag for the episode
  int hosts_compromised = 0;
  int steps_to_first_compromise = -1;    // -1 = never
};

// Fixed-dimension feature vector; all entries in [0,1], host blocks ordered
// by host id, padding identically zero. Throws std::invalid_argument when the
// belief exceeds the configured host capacity (message carries the counts).
std::vector<double> featurize(const BeliefState& belief, const FeatureConfig& cfg,
                              int planner_horizon = 20);

// Deterministic template rendering, hard-truncated to the whitespace-token
// budget with priority: sessions > recent failures > host list > reflections.
std::string summarize(const BeliefState& belief,
                      const std::vector<ReflectionEntry>& reflections,
                      const FeatureConfig& cfg);

int count_tokens(const std::string& text);  // whitespace tokens

// 128-dim encoding of an intent; a null intent encodes to all zeros.
std::vector<double> encode_intent(const Intent* intent, const FeatureConfig& cfg);

// Machine-readable layout description shipped with checkpoints; hashing this
// string guards checkpoint/scenario compatibility.
std::string feature_layout_manifest(const FeatureConfig& cfg);

}  // namespace redsim
