#pragma once

// Structured strategic intent emitted by the planner and consumed by the
// controller, plus the tolerant parser for model-produced JSON.

#include <optional>
#include <string>

#include "redsim/types.hpp"

namespace redsim {

struct Intent {
  // Either one of the 10 action names or a coarse tactic name
  // ("Discovery", "Initial Access", "Privilege Escalation", "Impact",
  // "Defense Evasion").
  std::string category;
  std::string tactic;
  TargetKind target_kind = TargetKind::None;
  int target = -1;  // host id or subnet id when target_kind != None
  RiskPosture risk_posture = RiskPosture::Balanced;
  double confidence = 1.0;
  std::string rationale;

  bool has_target() const { return target_kind != TargetKind::None; }
  // The action index this intent names, if the category is a concrete action.
  std::optional<ActionId> category_action() const { return action_from_name(category); }
  bool valid() const;

  static Intent for_action(ActionId a, TargetKind kind, int target,
                           RiskPosture posture = RiskPosture::Balanced,
                           double confidence = 1.0, std::string rationale = "");
};

std::string intent_to_json(const Intent& intent);

struct IntentParseResult {
  std::optional<Intent> intent;
  std::string error;
  bool ok() const { return intent.has_value(); }
};

// Strict-schema parse with a lenient envelope: if `raw` is not itself a JSON
// object, the first balanced {...} block is extracted (models often wrap the
// object in prose). Unknown fields are ignored; missing required fields,
// malformed JSON, and out-of-vocabulary categories are errors.
IntentParseResult parse_intent(const std::string& raw);

// Serialized target forms: "host-3", "subnet-1", or null/none.
std::string target_to_string(TargetKind kind, int id);
bool target_from_string(const std::string& text, TargetKind* kind, int* id);

}  // namespace redsim
