#include "redsim/runner.hpp"

#include <stdexcept>

#include "redsim/reward.hpp"
#include "redsim/topology.hpp"

namespace redsim {

std::string_view agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::Policy: return "policy";
    case AgentKind::Random: return "random";
    case AgentKind::SleepOnly: return "sleep_only";
    case AgentKind::OracleGreedy: return "oracle_greedy";
  }
  return "?";
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t salt) {
  // splitmix64 over the combined key.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1) + salt * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

EpisodeMetrics run_episode(const EpisodeSpec& spec) {
  if (spec.run == nullptr) throw std::invalid_argument("run_episode: missing run config");
  const RunConfig& rc = *spec.run;
  if (spec.kind == AgentKind::Policy && spec.params == nullptr)
    throw std::invalid_argument("run_episode: policy agent needs params");
  if (spec.kind == AgentKind::OracleGreedy && spec.planner == nullptr)
    throw std::invalid_argument("run_episode: oracle agent needs a planner");

  ScenarioConfig scen = rc.scenario;
  scen.seed = derive_seed(spec.seed, 0, 0x70);
  Topology topo = generate_scenario(scen);
  Environment env(topo, scen);
  Observation first = env.reset();

  BeliefState belief(topo.red_entry_host, topo.host(topo.red_entry_host).subnet,
                     scen.max_steps, scen.rules);
  (void)first;  // the constructor seeds exactly the reset observation's facts

  MilestoneTracker tracker;
  std::mt19937_64 rng(derive_seed(spec.seed, 1, 0xa5));

  std::optional<Intent> intent;
  std::optional<ActionOutcome> last_outcome;
  const int horizon = rc.planner.horizon;

  EpisodeTrace local_trace;
  EpisodeTrace* trace = spec.trace != nullptr ? spec.trace : &local_trace;
  trace->episode_id = spec.episode_id;
  trace->seed = spec.seed;
  trace->agent_label = std::string(agent_kind_name(spec.kind));
  trace->scenario_hash = hash_hex(serialize_scenario_config(scen));
  trace->reward_hash = hash_hex(serialize_reward_config(rc.reward));
  trace->steps.clear();

  EpisodeDigest digest;
  digest.episode_id = spec.episode_id;
  int restores_seen = 0;

  for (int t = 0; t < scen.max_steps; ++t) {
    bool planned = false;
    bool fallback = false;
    if (spec.planner != nullptr && spec.planner->should_plan(t, last_outcome)) {
      PlanOutcome po = spec.planner->plan(belief);
      intent = po.intent;
      fallback = po.fallback_used;
      planned = true;
      belief.note_plan(t);
    }

    const Intent* intent_ptr = intent.has_value() ? &*intent : nullptr;
    ActionMask mask = action_mask(belief);

    int action = static_cast<int>(ActionId::Sleep);
    double logp = 0.0;
    double value = 0.0;
    switch (spec.kind) {
      case AgentKind::Policy: {
        Vec features = featurize(belief, rc.features, horizon);
        Vec iemb = encode_intent(intent_ptr, rc.features);
        Vec logits;
        forward(*spec.params, features, iemb, nullptr, &logits, &value);
        auto [a, lp] = sample_action(logits, mask, rng);
        action = a;
        logp = lp;
        if (spec.rollout != nullptr) {
          Transition tr;
          tr.features = std::move(features);
          tr.intent = std::move(iemb);
          tr.mask = mask;
          tr.action = action;
          tr.logp = logp;
          tr.value = value;
          spec.rollout->steps.push_back(std::move(tr));
        }
        break;
      }
      case AgentKind::Random: {
        int valid = 0;
        for (bool b : mask) valid += b ? 1 : 0;
        int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(valid));
        for (int i = 0; i < kActionCount; ++i) {
          if (!mask[static_cast<size_t>(i)]) continue;
          if (pick-- == 0) {
            action = i;
            break;
          }
        }
        break;
      }
      case AgentKind::SleepOnly:
        action = static_cast<int>(ActionId::Sleep);
        break;
      case AgentKind::OracleGreedy: {
        action = static_cast<int>(ActionId::Sleep);
        if (intent_ptr != nullptr) {
          if (auto a = intent_ptr->category_action();
              a && mask[static_cast<size_t>(static_cast<int>(*a))])
            action = static_cast<int>(*a);
        }
        break;
      }
    }

    GroundedAction ga = ground(static_cast<ActionId>(action), intent_ptr, belief);
    StepResult sr = env.step(ga);
    RewardBreakdown rb = shape(sr.reward_inputs, intent_ptr, tracker, rc.reward);
    belief.apply(sr.observation, ga);
    last_outcome = sr.observation.action_outcome;
    restores_seen += static_cast<int>(sr.reward_inputs.restored_hosts.size());

    if (spec.rollout != nullptr && spec.kind == AgentKind::Policy) {
      Transition& tr = spec.rollout->steps.back();
      tr.reward = rb.total;
      tr.done = sr.done;
    }

    if (sr.observation.action_outcome != ActionOutcome::Success) {
      digest.failures_by_action[std::string(action_name(ga.index))] += 1;
    }

    {
      TraceStep ts;
      ts.step = t;
      ts.action = ga;
      ts.outcome = sr.observation.action_outcome;
      ts.reason = sr.observation.outcome_reason;
      ts.reward = rb;
      for (const auto& v : sr.reward_inputs.violations)
        ts.violations.push_back(std::string(violation_label(v.kind)));
      ts.restored_hosts = sr.reward_inputs.restored_hosts;
      ts.discovered_count = belief.discovered_count();
      ts.planner_invoked = planned;
      ts.planner_fallback = fallback;
      if (planned) ts.intent = intent;
      trace->steps.push_back(std::move(ts));
    }
  }

  // Metrics always flow through the trace, so file re-aggregation is exact.
  EpisodeMetrics metrics = metrics_from_trace(*trace);

  if (spec.planner != nullptr && spec.planner->config().reflexion) {
    digest.compromised = metrics.compromised;
    digest.steps_to_first_compromise = metrics.steps_to_first_compromise;
    digest.total_reward = metrics.total_reward;
    digest.restores_observed = restores_seen;
    int hosts_compromised = 0;
    for (const auto& [id, h] : belief.hosts()) {
      if (h.exploited_by_us || h.access != AccessLevel::None) {
        if (id != belief.entry_host()) ++hosts_compromised;
      }
      if (h.scanned && h.access == AccessLevel::None && id != belief.entry_host() &&
          h.decoy_hint != DecoyHint::Decoy)
        digest.scanned_not_exploited.push_back(id);
    }
    digest.hosts_compromised = hosts_compromised;
    spec.planner->reflect(digest);
  }
  return metrics;
}

}  // namespace redsim
