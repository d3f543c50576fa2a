#include "redsim/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace redsim {

namespace {
using json = nlohmann::ordered_json;

bool is_attack_action(ActionId a) {
  return a == ActionId::ExploitRemoteService || a == ActionId::PrivilegeEscalate ||
         a == ActionId::Impact || a == ActionId::DegradeServices;
}

bool step_has_compromise(const TraceStep& s) {
  for (const auto& label : s.reward.milestones_fired) {
    if (label.rfind("compromise_user:", 0) == 0) return true;
  }
  return false;
}

json intent_json(const Intent& it) {
  json j;
  j["category"] = it.category;
  j["tactic"] = it.tactic;
  j["target"] = it.target_kind == TargetKind::None
                    ? json(nullptr)
                    : json(target_to_string(it.target_kind, it.target));
  j["risk_posture"] = std::string(posture_name(it.risk_posture));
  j["confidence"] = it.confidence;
  j["rationale"] = it.rationale;
  return j;
}

Intent intent_from(const json& j) {
  auto parsed = parse_intent(j.dump());
  if (!parsed.ok()) throw std::runtime_error("trace: bad intent record: " + parsed.error);
  return *parsed.intent;
}

}  // namespace

EpisodeMetrics metrics_from_trace(const EpisodeTrace& trace) {
  EpisodeMetrics m;
  for (const auto& s : trace.steps) {
    if (is_attack_action(s.action.index)) {
      ++m.attack_actions;
      if (s.outcome == ActionOutcome::Success) ++m.attack_successes;
    }
    if (step_has_compromise(s)) {
      m.compromised = true;
      if (m.steps_to_first_compromise < 0) m.steps_to_first_compromise = s.step;
    }
    m.peak_hosts_discovered = std::max(m.peak_hosts_discovered, s.discovered_count);
    m.total_reward += s.reward.total;
    m.planner_invocations += s.planner_invoked ? 1 : 0;
    m.planner_fallbacks += s.planner_fallback ? 1 : 0;
  }
  return m;
}

std::string trace_to_jsonl(const EpisodeTrace& trace) {
  std::ostringstream out;
  {
    json h;
    h["type"] = "header";
    h["episode_id"] = trace.episode_id;
    h["seed"] = trace.seed;
    h["agent"] = trace.agent_label;
    h["scenario_hash"] = trace.scenario_hash;
    h["reward_hash"] = trace.reward_hash;
    out << h.dump() << "\n";
  }
  for (const auto& s : trace.steps) {
    json j;
    j["type"] = "step";
    j["step"] = s.step;
    j["action"] = {{"index", static_cast<int>(s.action.index)},
                   {"name", std::string(action_name(s.action.index))},
                   {"target", s.action.kind == TargetKind::None
                                  ? json(nullptr)
                                  : json(target_to_string(s.action.kind, s.action.target))},
                   {"source", s.action.source}};
    j["outcome"] = std::string(outcome_name(s.outcome));
    j["reason"] = std::string(outcome_reason_name(s.reason));
    j["reward"] = {{"env", s.reward.r_env},
                   {"progress", s.reward.r_progress},
                   {"constraint", s.reward.r_constraint},
                   {"alignment", s.reward.r_alignment},
                   {"total", s.reward.total}};
    j["milestones"] = s.reward.milestones_fired;
    j["violations"] = s.violations;
    j["restored"] = s.restored_hosts;
    j["discovered"] = s.discovered_count;
    if (s.planner_invoked) {
      j["planner"] = {{"fallback", s.planner_fallback}, {"intent", intent_json(*s.intent)}};
    }
    out << j.dump() << "\n";
  }
  return out.str();
}

EpisodeTrace trace_from_jsonl(const std::string& text) {
  EpisodeTrace trace;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      trace.episode_id = j.at("episode_id").get<int>();
      trace.seed = j.at("seed").get<std::uint64_t>();
      trace.agent_label = j.at("agent").get<std::string>();
      trace.scenario_hash = j.at("scenario_hash").get<std::string>();
      trace.reward_hash = j.at("reward_hash").get<std::string>();
      saw_header = true;
      continue;
    }
    TraceStep s;
    s.step = j.at("step").get<int>();
    const auto& ja = j.at("action");
    s.action.index = static_cast<ActionId>(ja.at("index").get<int>());
    if (ja.at("target").is_null()) {
      s.action.kind = TargetKind::None;
      s.action.target = -1;
    } else {
      if (!target_from_string(ja.at("target").get<std::string>(), &s.action.kind,
                              &s.action.target))
        throw std::runtime_error("trace: bad target string");
    }
    s.action.source = ja.at("source").get<HostId>();
    {
      const std::string o = j.at("outcome").get<std::string>();
      s.outcome = o == "Success" ? ActionOutcome::Success
                                 : o == "Failure" ? ActionOutcome::Failure : ActionOutcome::Blocked;
      if (auto reason = outcome_reason_from_name(j.at("reason").get<std::string>()))
        s.reason = *reason;
    }
    const auto& jr = j.at("reward");
    s.reward.r_env = jr.at("env").get<double>();
    s.reward.r_progress = jr.at("progress").get<double>();
    s.reward.r_constraint = jr.at("constraint").get<double>();
    s.reward.r_alignment = jr.at("alignment").get<double>();
    s.reward.total = jr.at("total").get<double>();
    s.reward.milestones_fired = j.at("milestones").get<std::vector<std::string>>();
    s.violations = j.at("violations").get<std::vector<std::string>>();
    s.restored_hosts = j.at("restored").get<std::vector<HostId>>();
    s.discovered_count = j.at("discovered").get<int>();
    if (j.contains("planner")) {
      s.planner_invoked = true;
      s.planner_fallback = j.at("planner").at("fallback").get<bool>();
      s.intent = intent_from(j.at("planner").at("intent"));
    }
    trace.steps.push_back(std::move(s));
  }
  if (!saw_header) throw std::runtime_error("trace: missing header line");
  return trace;
}

void write_trace_file(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write trace: " + path);
  f << trace_to_jsonl(trace);
}

EpisodeTrace read_trace_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return trace_from_jsonl(ss.str());
}

}  // namespace redsim
