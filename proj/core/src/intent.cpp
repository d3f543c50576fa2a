#include "redsim/intent.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

namespace redsim {

namespace {
using json = nlohmann::json;
}

bool Intent::valid() const {
  if (!(confidence >= 0.0 && confidence <= 1.0)) return false;
  if (category.empty()) return false;
  if (!action_from_name(category) && !is_tactic_name(category)) return false;
  if (target_kind != TargetKind::None && target < 0) return false;
  return true;
}

Intent Intent::for_action(ActionId a, TargetKind kind, int target, RiskPosture posture,
                          double confidence, std::string rationale) {
  Intent it;
  it.category = std::string(action_name(a));
  it.tactic = std::string(action_tactic(a));
  it.target_kind = kind;
  it.target = target;
  it.risk_posture = posture;
  it.confidence = confidence;
  it.rationale = std::move(rationale);
  return it;
}

std::string target_to_string(TargetKind kind, int id) {
  switch (kind) {
    case TargetKind::Host: return "host-" + std::to_string(id);
    case TargetKind::Subnet: return "subnet-" + std::to_string(id);
    case TargetKind::None: return "none";
  }
  return "none";
}

bool target_from_string(const std::string& text, TargetKind* kind, int* id) {
  auto parse_tail = [&](size_t prefix_len) -> bool {
    const std::string tail = text.substr(prefix_len);
    if (tail.empty() || !std::all_of(tail.begin(), tail.end(),
                                     [](unsigned char c) { return std::isdigit(c); }))
      return false;
    *id = std::stoi(tail);
    return true;
  };
  if (text == "none" || text == "null" || text.empty()) {
    *kind = TargetKind::None;
    *id = -1;
    return true;
  }
  if (text.rfind("host-", 0) == 0 && parse_tail(5)) {
    *kind = TargetKind::Host;
    return true;
  }
  if (text.rfind("subnet-", 0) == 0 && parse_tail(7)) {
    *kind = TargetKind::Subnet;
    return true;
  }
  return false;
}

std::string intent_to_json(const Intent& intent) {
  json j;
  j["category"] = intent.category;
  j["tactic"] = intent.tactic;
  if (intent.target_kind == TargetKind::None) {
    j["target"] = nullptr;
  } else {
    j["target"] = target_to_string(intent.target_kind, intent.target);
  }
  j["risk_posture"] = std::string(posture_name(intent.risk_posture));
  j["confidence"] = intent.confidence;
  j["rationale"] = intent.rationale;
  return j.dump();
}

namespace {

// First balanced top-level {...} block, string-literal aware.
std::optional<std::string> extract_object(const std::string& raw) {
  size_t start = raw.find('{');
  if (start == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return raw.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

IntentParseResult fail(std::string why) { return {std::nullopt, std::move(why)}; }

}  // namespace

IntentParseResult parse_intent(const std::string& raw) {
  auto block = extract_object(raw);
  if (!block) return fail("no JSON object found");

  json j = json::parse(*block, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return fail("malformed JSON object");

  Intent intent;
  if (!j.contains("category") || !j["category"].is_string())
    return fail("missing required field: category");
  intent.category = j["category"].get<std::string>();

  auto as_action = action_from_name(intent.category);
  if (!as_action && !is_tactic_name(intent.category))
    return fail("category not in vocabulary: " + intent.category);

  if (j.contains("tactic") && j["tactic"].is_string()) {
    intent.tactic = j["tactic"].get<std::string>();
  } else if (as_action) {
    intent.tactic = std::string(action_tactic(*as_action));
  } else {
    intent.tactic = intent.category;
  }

  if (!j.contains("target")) return fail("missing required field: target");
  const auto& jt = j["target"];
  if (jt.is_null()) {
    intent.target_kind = TargetKind::None;
  } else if (jt.is_string()) {
    if (!target_from_string(jt.get<std::string>(), &intent.target_kind, &intent.target))
      return fail("unparseable target: " + jt.get<std::string>());
  } else if (jt.is_number_integer()) {
    // Bare integers read as host ids.
    intent.target_kind = TargetKind::Host;
    intent.target = jt.get<int>();
    if (intent.target < 0) return fail("negative target id");
  } else {
    return fail("target must be a string, integer, or null");
  }

  if (j.contains("risk_posture")) {
    if (!j["risk_posture"].is_string()) return fail("risk_posture must be a string");
    auto p = posture_from_name(j["risk_posture"].get<std::string>());
    if (!p) return fail("risk_posture not in vocabulary");
    intent.risk_posture = *p;
  }

  if (j.contains("confidence")) {
    if (!j["confidence"].is_number()) return fail("confidence must be a number");
    intent.confidence = j["confidence"].get<double>();
    if (intent.confidence < 0.0 || intent.confidence > 1.0)
      return fail("confidence out of [0,1]");
  }

  if (j.contains("rationale") && j["rationale"].is_string())
    intent.rationale = j["rationale"].get<std::string>();

  if (!intent.valid()) return fail("intent failed validation");
  return {intent, ""};
}

}  // namespace redsim
