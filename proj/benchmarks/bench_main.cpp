// Microbenchmarks for the hot paths: environment stepping, featurization,
// the policy forward pass, and one PPO minibatch update.

#include <benchmark/benchmark.h>

#include <random>

#include "redsim/actions.hpp"
#include "redsim/belief.hpp"
#include "redsim/encoders.hpp"
#include "redsim/env.hpp"
#include "redsim/ppo.hpp"
#include "redsim/topology.hpp"

using namespace redsim;

namespace {

ScenarioConfig bench_scenario() {
  ScenarioConfig cfg = curriculum_stage(1);
  cfg.seed = 99;
  return cfg;
}

void BM_GenerateScenario(benchmark::State& state) {
  ScenarioConfig cfg = bench_scenario();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = ++seed;
    benchmark::DoNotOptimize(generate_scenario(cfg));
  }
}
BENCHMARK(BM_GenerateScenario);

void BM_EnvRandomStep(benchmark::State& state) {
  ScenarioConfig cfg = bench_scenario();
  Topology topo = generate_scenario(cfg);
  Environment env(topo, cfg);
  env.reset();
  BeliefState belief(topo.red_entry_host, 0, cfg.max_steps, cfg.rules);
  std::mt19937_64 rng(1);
  for (auto _ : state) {
    if (env.done()) {
      env.reset();
      belief = BeliefState(topo.red_entry_host, 0, cfg.max_steps, cfg.rules);
    }
    ActionMask mask = action_mask(belief);
    std::vector<int> valid;
    for (int i = 0; i < kActionCount; ++i)
      if (mask[static_cast<size_t>(i)]) valid.push_back(i);
    GroundedAction ga = ground(static_cast<ActionId>(valid[rng() % valid.size()]), nullptr, belief);
    StepResult r = env.step(ga);
    belief.apply(r.observation, ga);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_EnvRandomStep);

void BM_Featurize(benchmark::State& state) {
  ScenarioConfig cfg = bench_scenario();
  Topology topo = generate_scenario(cfg);
  Environment env(topo, cfg);
  env.reset();
  BeliefState belief(topo.red_entry_host, 0, cfg.max_steps, cfg.rules);
  GroundedAction sweep = GroundedAction::on_subnet(ActionId::DiscoverRemoteSystems, 0, 0);
  belief.apply(env.step(sweep).observation, sweep);
  FeatureConfig fc;
  for (auto _ : state) benchmark::DoNotOptimize(featurize(belief, fc));
}
BENCHMARK(BM_Featurize);

void BM_PolicyForward(benchmark::State& state) {
  std::mt19937_64 rng(7);
  FeatureConfig fc;
  PolicyParams p;
  p.resize(fc.dimension());
  p.init(rng);
  Vec x(static_cast<size_t>(fc.dimension()));
  Vec z(static_cast<size_t>(FeatureConfig::kIntentDim));
  for (auto& v : x) v = static_cast<double>(rng() % 2);
  for (auto& v : z) v = static_cast<double>(rng() % 2);
  Vec logits;
  double value;
  for (auto _ : state) {
    forward(p, x, z, nullptr, &logits, &value);
    benchmark::DoNotOptimize(logits);
  }
}
BENCHMARK(BM_PolicyForward);

void BM_PpoMinibatch(benchmark::State& state) {
  std::mt19937_64 rng(7);
  FeatureConfig fc;
  PolicyParams p;
  p.resize(fc.dimension());
  p.init(rng);
  TrainConfig cfg;

  std::vector<Transition> batch;
  for (int i = 0; i < 64; ++i) {
    Transition t;
    t.features.assign(static_cast<size_t>(fc.dimension()), 0.0);
    for (auto& v : t.features) v = static_cast<double>(rng() % 2);
    t.intent.assign(static_cast<size_t>(FeatureConfig::kIntentDim), 0.0);
    t.mask.fill(true);
    Vec logits;
    double value;
    forward(p, t.features, t.intent, nullptr, &logits, &value);
    auto [a, logp] = sample_action(logits, t.mask, rng);
    t.action = a;
    t.logp = logp;
    t.value = value;
    batch.push_back(std::move(t));
  }
  std::vector<const Transition*> rows;
  std::vector<double> adv, ret;
  for (auto& t : batch) {
    rows.push_back(&t);
    adv.push_back(0.5);
    ret.push_back(0.0);
  }
  PolicyParams grads = p;
  for (auto _ : state) {
    grads.zero();
    benchmark::DoNotOptimize(compute_loss_and_grad(p, rows, adv, ret, cfg, &grads, 1));
  }
}
BENCHMARK(BM_PpoMinibatch);

}  // namespace

BENCHMARK_MAIN();
