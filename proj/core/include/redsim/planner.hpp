#pragma once

// Strategic layer: emits a structured Intent every h steps or on action
// failure, via the deterministic scripted oracle or a remote chat-completion
// backend, with scripted fallback so an episode can never stall. Keeps the
// bounded FIFO of cross-episode reflections.

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "redsim/belief.hpp"
#include "redsim/config.hpp"
#include "redsim/encoders.hpp"
#include "redsim/intent.hpp"

namespace redsim {

// Belief digest the scripted oracle consumes; every list is ascending and
// excludes the entry host.
struct BeliefDigest {
  int step = 0;
  std::vector<HostId> root_not_impacted;
  std::vector<HostId> escalatable;          // user/elevated access we planted
  std::vector<HostId> exploitable_verified; // fingerprinted exploitable, verified real, no access
  std::vector<HostId> unverified;           // fingerprinted exploitable, deception status unknown
  std::vector<HostId> unscanned;            // discovered, not yet scanned
  std::vector<SubnetId> unswept;            // known subnets not yet swept
  std::vector<SubnetId> swept;              // for the patrol fall-through
  bool outstanding_hosts = false;           // any known target not yet impacted
};

BeliefDigest make_digest(const BeliefState& belief);

// Deterministic rule table, first match wins:
//   1. rooted host not yet impacted     -> Impact it
//   2. host with planted user access    -> PrivilegeEscalate it
//   3. verified, fingerprinted target   -> ExploitRemoteService it
//   4. fingerprinted, deception unknown -> DiscoverDeception it
//   5. discovered unscanned host        -> service scan (stealth per posture)
//   6. known unswept subnet             -> DiscoverRemoteSystems it
//   7. targets remain but nothing is actionable -> patrol sweep (re-recon)
//   8. network fully resolved           -> Sleep
// Ties break to the lowest id.
Intent scripted_oracle(const BeliefDigest& digest, RiskPosture posture);

// Raw text completion transport (chat style). Implementations must enforce
// their own wall-clock timeout.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Returns the assistant text, or nullopt with `error` filled.
  virtual std::optional<std::string> complete(const std::string& system_prompt,
                                              const std::string& user_prompt,
                                              std::string* error) = 0;
};

// OpenAI-style /v1/chat/completions client over HTTP.
std::unique_ptr<ChatBackend> make_remote_backend(const PlannerConfig& cfg);

struct PromptTemplates {
  std::string system;
  std::string user;
  std::string reflect;
  bool loaded = false;
};
// Loads prompt templates from cfg.prompt_dir (system.txt, user.txt,
// reflect.txt). Missing files leave `loaded` false.
PromptTemplates load_prompts(const std::string& prompt_dir);

struct PlanOutcome {
  Intent intent;
  bool fallback_used = false;   // remote path failed and the oracle answered
  std::string fallback_reason;
};

// Per-episode digest used for reflection generation.
struct EpisodeDigest {
  int episode_id = 0;
  bool compromised = false;
  int hosts_compromised = 0;
  int steps_to_first_compromise = -1;
  int restores_observed = 0;
  double total_reward = 0.0;
  std::map<std::string, int> failures_by_action;
  std::vector<HostId> scanned_not_exploited;
};

class Planner {
 public:
  Planner() = default;
  explicit Planner(PlannerConfig cfg, FeatureConfig features = {});

  // Scheduling contract: plan at steps {0, h, 2h, ...} and immediately after
  // any step whose outcome was not Success.
  bool should_plan(int step, std::optional<ActionOutcome> last_outcome) const;

  PlanOutcome plan(const BeliefState& belief);

  // End-of-episode reflection; pushes into the FIFO (oldest evicted at K).
  ReflectionEntry reflect(const EpisodeDigest& digest);

  const std::deque<ReflectionEntry>& memory() const { return memory_; }
  void clear_memory() { memory_.clear(); }
  const PlannerConfig& config() const { return cfg_; }

  // Test hook: inject a transport (used instead of the configured endpoint).
  void set_backend_for_test(std::unique_ptr<ChatBackend> backend);

 private:
  std::optional<Intent> try_remote(const BeliefState& belief, std::string* why);
  std::string render_reflection_text(const EpisodeDigest& d) const;

  PlannerConfig cfg_;
  FeatureConfig features_;
  PromptTemplates prompts_;
  std::unique_ptr<ChatBackend> remote_;
  std::deque<ReflectionEntry> memory_;
};

}  // namespace redsim
