#include "redsim/planner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace redsim {

namespace {
using json = nlohmann::json;
}

BeliefDigest make_digest(const BeliefState& belief) {
  BeliefDigest d;
  d.step = belief.step();
  for (const auto& [id, h] : belief.hosts()) {
    if (id == belief.entry_host() || !h.discovered) continue;
    if (h.access == AccessLevel::Root) {
      if (!h.impacted) d.root_not_impacted.push_back(id);
      continue;
    }
    if (h.exploited_by_us &&
        (h.access == AccessLevel::User || h.access == AccessLevel::Elevated)) {
      d.escalatable.push_back(id);
      continue;
    }
    if (h.scanned && h.access == AccessLevel::None) {
      if (h.exploitable_known && h.decoy_hint == DecoyHint::Unknown) {
        d.unverified.push_back(id);
      } else if (h.exploitable_known && h.decoy_hint == DecoyHint::Real) {
        d.exploitable_verified.push_back(id);
      }
      continue;
    }
    if (!h.scanned) d.unscanned.push_back(id);
  }
  for (const auto& [id, s] : belief.subnets()) {
    if (!s.swept) d.unswept.push_back(id);
    else d.swept.push_back(id);
  }
  for (const auto& [id, h] : belief.hosts()) {
    if (id == belief.entry_host()) continue;
    if (h.decoy_hint != DecoyHint::Decoy && !h.impacted) d.outstanding_hosts = true;
  }
  return d;
}

Intent scripted_oracle(const BeliefDigest& d, RiskPosture posture) {
  auto mk = [&](ActionId a, TargetKind kind, int target, double conf, std::string why) {
    return Intent::for_action(a, kind, target, posture, conf, std::move(why));
  };
  if (!d.root_not_impacted.empty()) {
    HostId h = d.root_not_impacted.front();
    return mk(ActionId::Impact, TargetKind::Host, h, 0.95,
              "host-" + std::to_string(h) + " is rooted; detonate impact");
  }
  if (!d.escalatable.empty()) {
    HostId h = d.escalatable.front();
    return mk(ActionId::PrivilegeEscalate, TargetKind::Host, h, 0.9,
              "escalate privileges on compromised host-" + std::to_string(h));
  }
  if (!d.exploitable_verified.empty()) {
    HostId h = d.exploitable_verified.front();
    return mk(ActionId::ExploitRemoteService, TargetKind::Host, h, 0.85,
              "host-" + std::to_string(h) + " verified real and exploitable");
  }
  if (!d.unverified.empty()) {
    HostId h = d.unverified.front();
    return mk(ActionId::DiscoverDeception, TargetKind::Host, h, 0.7,
              "vet host-" + std::to_string(h) + " for deception before exploiting");
  }
  if (!d.unscanned.empty()) {
    HostId h = d.unscanned.front();
    ActionId scan = posture == RiskPosture::Stealthy ? ActionId::StealthServiceDiscovery
                                                     : ActionId::AggressiveServiceDiscovery;
    return mk(scan, TargetKind::Host, h, 0.8,
              "enumerate services on host-" + std::to_string(h));
  }
  if (!d.unswept.empty()) {
    SubnetId s = d.unswept.front();
    return mk(ActionId::DiscoverRemoteSystems, TargetKind::Subnet, s, 0.75,
              "sweep subnet-" + std::to_string(s) + " for hosts");
  }
  if (d.outstanding_hosts && !d.swept.empty()) {
    // Unfinished network but no actionable target: keep patrolling. The
    // controller cannot satisfy a re-sweep, so idling earns no alignment.
    SubnetId s = d.swept.front();
    return mk(ActionId::DiscoverRemoteSystems, TargetKind::Subnet, s, 0.4,
              "re-sweep subnet-" + std::to_string(s) + "; targets remain unresolved");
  }
  return mk(ActionId::Sleep, TargetKind::None, -1, 0.5, "no remaining objectives");
}

// ---------------------------------------------------------------------------
// Remote transport

namespace {

class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(PlannerConfig cfg) : cfg_(std::move(cfg)) {}

  std::optional<std::string> complete(const std::string& system_prompt,
                                      const std::string& user_prompt,
                                      std::string* error) override {
    if (cfg_.endpoint.empty()) {
      if (error) *error = "no endpoint configured";
      return std::nullopt;
    }
    httplib::Client client(cfg_.endpoint);
    client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
    client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    client.set_write_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);

    json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    body["messages"] = json::array({{{"role", "system"}, {"content", system_prompt}},
                                    {{"role", "user"}, {"content", user_prompt}}});
    auto res = client.Post("/v1/chat/completions", body.dump(), "application/json");
    if (!res) {
      if (error) *error = "transport error: " + httplib::to_string(res.error());
      return std::nullopt;
    }
    if (res->status != 200) {
      if (error) *error = "http status " + std::to_string(res->status);
      return std::nullopt;
    }
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) {
      if (error) *error = "response is not JSON";
      return std::nullopt;
    }
    try {
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      if (error) *error = std::string("unexpected response shape: ") + e.what();
      return std::nullopt;
    }
  }

 private:
  PlannerConfig cfg_;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) return "";
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void replace_all(std::string& text, const std::string& key, const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
}

std::string action_vocabulary() {
  std::ostringstream os;
  for (int i = 0; i < kActionCount; ++i) {
    os << i << ". " << action_names()[static_cast<size_t>(i)] << " ("
       << action_tactics()[static_cast<size_t>(i)] << ")\n";
  }
  return os.str();
}

}  // namespace

std::unique_ptr<ChatBackend> make_remote_backend(const PlannerConfig& cfg) {
  return std::make_unique<HttpChatBackend>(cfg);
}

PromptTemplates load_prompts(const std::string& prompt_dir) {
  PromptTemplates t;
  t.system = read_file(prompt_dir + "/system.txt");
  t.user = read_file(prompt_dir + "/user.txt");
  t.reflect = read_file(prompt_dir + "/reflect.txt");
  t.loaded = !t.system.empty() && !t.user.empty() && !t.reflect.empty();
  return t;
}

Planner::Planner(PlannerConfig cfg, FeatureConfig features)
    : cfg_(std::move(cfg)), features_(features) {
  if (cfg_.backend == PlannerBackendKind::Remote) {
    prompts_ = load_prompts(cfg_.prompt_dir);
    remote_ = make_remote_backend(cfg_);
  }
}

void Planner::set_backend_for_test(std::unique_ptr<ChatBackend> backend) {
  remote_ = std::move(backend);
  if (!prompts_.loaded) {
    prompts_.system = "You plan red-team operations. Vocabulary:\n{{actions}}\nReply with JSON.";
    prompts_.user = "{{summary}}\n{{reflections}}";
    prompts_.reflect = "Summarize the episode:\n{{digest}}";
    prompts_.loaded = true;
  }
}

bool Planner::should_plan(int step, std::optional<ActionOutcome> last_outcome) const {
  if (step % std::max(1, cfg_.horizon) == 0) return true;
  if (cfg_.replan_on_failure && last_outcome && *last_outcome != ActionOutcome::Success)
    return true;
  return false;
}

std::optional<Intent> Planner::try_remote(const BeliefState& belief, std::string* why) {
  if (!remote_) {
    *why = "remote backend unavailable";
    return std::nullopt;
  }
  if (!prompts_.loaded) {
    *why = "prompt templates missing under " + cfg_.prompt_dir;
    return std::nullopt;
  }
  std::vector<ReflectionEntry> refl(memory_.begin(), memory_.end());
  std::string summary = summarize(belief, cfg_.reflexion ? refl : std::vector<ReflectionEntry>{},
                                  features_);
  std::string system = prompts_.system;
  replace_all(system, "{{actions}}", action_vocabulary());
  std::string user = prompts_.user;
  replace_all(user, "{{summary}}", summary);
  {
    std::ostringstream rs;
    if (cfg_.reflexion) {
      for (const auto& r : memory_) rs << "- " << r.text << "\n";
    }
    replace_all(user, "{{reflections}}", rs.str());
  }

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    std::string err;
    auto text = remote_->complete(system, user, &err);
    if (!text) {
      last_error = err;
      continue;
    }
    auto parsed = parse_intent(*text);
    if (parsed.ok()) return parsed.intent;
    last_error = parsed.error;
  }
  *why = last_error.empty() ? "remote planning failed" : last_error;
  return std::nullopt;
}

PlanOutcome Planner::plan(const BeliefState& belief) {
  PlanOutcome out;
  if (cfg_.backend == PlannerBackendKind::Remote) {
    std::string why;
    if (auto intent = try_remote(belief, &why)) {
      out.intent = *intent;
      return out;
    }
    out.fallback_used = true;
    out.fallback_reason = why;
  }
  out.intent = scripted_oracle(make_digest(belief), cfg_.posture);
  return out;
}

std::string Planner::render_reflection_text(const EpisodeDigest& d) const {
  std::ostringstream os;
  if (d.compromised) {
    os << "Compromised " << d.hosts_compromised << " host(s); first at step "
       << d.steps_to_first_compromise << ".";
  } else {
    os << "No compromise achieved.";
  }
  // Top-3 failed action categories by count, ties by name.
  std::vector<std::pair<int, std::string>> ranked;
  for (const auto& [name, n] : d.failures_by_action) ranked.push_back({-n, name});
  std::sort(ranked.begin(), ranked.end());
  if (!ranked.empty()) {
    os << " Top failed actions:";
    for (size_t i = 0; i < ranked.size() && i < 3; ++i) {
      os << " " << ranked[i].second << "(" << -ranked[i].first << ")";
    }
    os << ".";
  }
  if (d.restores_observed > 0)
    os << " Defenders restored hosts " << d.restores_observed
       << " time(s); withdraw or act faster after planting artifacts.";
  if (!d.scanned_not_exploited.empty()) {
    os << " Scanned but never exploited:";
    for (HostId h : d.scanned_not_exploited) os << " host-" << h;
    os << ".";
  }
  return os.str();
}

ReflectionEntry Planner::reflect(const EpisodeDigest& digest) {
  ReflectionEntry entry;
  entry.episode_id = digest.episode_id;
  entry.compromised = digest.compromised;
  entry.hosts_compromised = digest.hosts_compromised;
  entry.steps_to_first_compromise = digest.steps_to_first_compromise;

  bool remote_done = false;
  if (cfg_.backend == PlannerBackendKind::Remote && remote_ && prompts_.loaded) {
    std::string prompt = prompts_.reflect;
    replace_all(prompt, "{{digest}}", render_reflection_text(digest));
    std::string err;
    if (auto text = remote_->complete(prompts_.system, prompt, &err); text && !text->empty()) {
      entry.text = *text;
      remote_done = true;
    }
  }
  if (!remote_done) entry.text = render_reflection_text(digest);

  memory_.push_back(entry);
  while (static_cast<int>(memory_.size()) > std::max(1, cfg_.reflexion_capacity))
    memory_.pop_front();
  return entry;
}

}  // namespace redsim
