#include <doctest.h>

#include <limits>
#include <stdexcept>

#include <cmath>
#include <random>

#include "redsim/ppo.hpp"

using namespace redsim;

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

PolicyParams small_params(std::mt19937_64& rng, int features = 12, int intent = 6, int hidden = 8,
                          int head = 10) {
  PolicyParams p;
  p.intent_dim = intent;
  p.hidden = hidden;
  p.head_hidden = head;
  p.resize(features);
  p.init(rng);
  return p;
}

Transition random_transition(std::mt19937_64& rng, const PolicyParams& p) {
  Transition t;
  t.features.resize(static_cast<size_t>(p.feature_dim));
  for (auto& x : t.features) x = unit(rng);
  t.intent.resize(static_cast<size_t>(p.intent_dim));
  for (auto& x : t.intent) x = unit(rng);
  int valid = 0;
  for (int i = 0; i < kActionCount; ++i) {
    t.mask[static_cast<size_t>(i)] = unit(rng) < 0.6;
    valid += t.mask[static_cast<size_t>(i)];
  }
  if (valid == 0) t.mask[9] = true;
  Vec logits;
  double value = 0.0;
  forward(p, t.features, t.intent, nullptr, &logits, &value);
  auto [a, logp] = sample_action(logits, t.mask, rng);
  t.action = a;
  // Perturbed collection-time log-prob keeps the ratio near but not at 1.
  t.logp = logp + 0.1 * (unit(rng) - 0.5);
  t.value = value;
  return t;
}

// Explicit discounted double-sum GAE oracle (independent of the recursion).
void gae_oracle(const std::vector<double>& rewards, const std::vector<double>& values,
                const std::vector<bool>& dones, double gamma, double lambda,
                std::vector<double>* adv) {
  const size_t T = rewards.size();
  adv->assign(T, 0.0);
  for (size_t t = 0; t < T; ++t) {
    double factor = 1.0;
    double acc = 0.0;
    for (size_t l = t; l < T; ++l) {
      const double not_done = dones[l] ? 0.0 : 1.0;
      const double delta = rewards[l] + gamma * values[l + 1] * not_done - values[l];
      acc += factor * delta;
      if (dones[l]) break;
      factor *= gamma * lambda;
    }
    (*adv)[t] = acc;
  }
}

// Collects |preactivation| minima so gradcheck instances stay away from the
// ReLU kink (finite differences are only valid at smooth points).
double min_abs_preact(const PolicyParams& p, const std::vector<Transition>& batch) {
  double lo = 1e9;
  for (const auto& t : batch) {
    ForwardCache c;
    Vec logits;
    double value;
    forward(p, t.features, t.intent, &c, &logits, &value);
    for (double x : c.h0_pre) lo = std::min(lo, std::abs(x));
    for (double x : c.b1.a_pre) lo = std::min(lo, std::abs(x));
    for (double x : c.b2.a_pre) lo = std::min(lo, std::abs(x));
    for (double x : c.pi_pre) lo = std::min(lo, std::abs(x));
    for (double x : c.v_pre) lo = std::min(lo, std::abs(x));
  }
  return lo;
}

}  // namespace

TEST_CASE("zero-initialized heads give uniform logits and zero value") {
  std::mt19937_64 rng(1);
  PolicyParams p = small_params(rng);
  p.zero();
  // Restore LayerNorm gains so the encoder is well-defined.
  p.block1.ln.gamma.assign(p.block1.ln.gamma.size(), 1.0);
  p.block2.ln.gamma.assign(p.block2.ln.gamma.size(), 1.0);
  Vec x(static_cast<size_t>(p.feature_dim), 0.0), z(static_cast<size_t>(p.intent_dim), 0.0);
  Vec logits;
  double value;
  forward(p, x, z, nullptr, &logits, &value);
  for (double l : logits) CHECK(l == doctest::Approx(logits[0]));
  CHECK(value == doctest::Approx(0.0));

  // Determinism: identical inputs, identical outputs.
  Vec logits2;
  double value2;
  forward(p, x, z, nullptr, &logits2, &value2);
  CHECK(logits2 == logits);
  CHECK(value2 == value);
}

TEST_CASE("dimension mismatches are configuration errors") {
  std::mt19937_64 rng(2);
  PolicyParams p = small_params(rng);
  Vec bad(static_cast<size_t>(p.feature_dim + 1), 0.0), z(static_cast<size_t>(p.intent_dim), 0.0);
  Vec logits;
  double value;
  CHECK_THROWS_AS(forward(p, bad, z, nullptr, &logits, &value), std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences (>=100 instances)") {
  std::mt19937_64 rng(20250810);
  TrainConfig cfg;
  cfg.entropy_coef = 0.05;
  cfg.value_coef = 0.5;
  const double eps = 1e-4;

  int instances = 0;
  int probes = 0;
  while (instances < 100) {
    PolicyParams p = small_params(rng);
    std::vector<Transition> batch;
    for (int k = 0; k < 4; ++k) batch.push_back(random_transition(rng, p));
    if (min_abs_preact(p, batch) < 1e-3) continue;  // resample away from ReLU kinks

    std::vector<double> adv, ret;
    bool near_clip_kink = false;
    for (auto& t : batch) {
      adv.push_back(2.0 * unit(rng) - 1.0);
      ret.push_back(2.0 * unit(rng) - 1.0);
      Vec logits;
      double value;
      forward(p, t.features, t.intent, nullptr, &logits, &value);
      MaskedDist d = masked_distribution(logits, t.mask);
      double ratio = std::exp(d.logp[static_cast<size_t>(t.action)] - t.logp);
      if (std::abs(ratio - (1.0 - cfg.clip_ratio)) < 1e-3 ||
          std::abs(ratio - (1.0 + cfg.clip_ratio)) < 1e-3)
        near_clip_kink = true;
    }
    if (near_clip_kink) continue;

    std::vector<const Transition*> rows;
    for (auto& t : batch) rows.push_back(&t);

    PolicyParams grads = p;
    grads.zero();
    compute_loss_and_grad(p, rows, adv, ret, cfg, &grads, 1);

    // Probe a handful of coordinates in every tensor group.
    std::vector<Vec*> tensors, gtensors;
    p.visit([&](const std::string&, Vec& v, std::vector<int>) { tensors.push_back(&v); });
    grads.visit([&](const std::string&, Vec& v, std::vector<int>) { gtensors.push_back(&v); });

    for (size_t k = 0; k < tensors.size(); ++k) {
      size_t idx = static_cast<size_t>(rng() % tensors[k]->size());
      const double saved = (*tensors[k])[idx];

      (*tensors[k])[idx] = saved + eps;
      PolicyParams dummy = p;
      dummy.zero();
      double up = compute_loss_and_grad(p, rows, adv, ret, cfg, &dummy, 1).total_loss;
      (*tensors[k])[idx] = saved - eps;
      dummy.zero();
      double down = compute_loss_and_grad(p, rows, adv, ret, cfg, &dummy, 1).total_loss;
      (*tensors[k])[idx] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = (*gtensors[k])[idx];
      const double denom = std::max({1e-6, std::abs(numeric), std::abs(analytic)});
      CHECK(std::abs(numeric - analytic) / denom < 1e-3);
      ++probes;
    }
    ++instances;
  }
  CHECK(instances >= 100);
  CHECK(probes >= 100);
}

TEST_CASE("gae matches the worked example and its degenerate cases") {
  std::vector<double> adv, ret;
  gae({1.0, 0.0}, {0.5, 0.25, 0.0}, {false, false}, 1.0, 1.0, &adv, &ret);
  CHECK(adv[0] == doctest::Approx(0.5));
  CHECK(adv[1] == doctest::Approx(-0.25));
  CHECK(ret[0] == doctest::Approx(1.0));   // advantages + values
  CHECK(ret[1] == doctest::Approx(0.0));

  // lambda = 0 reduces to one-step TD errors.
  std::vector<double> r = {0.3, -0.2, 1.0};
  std::vector<double> v = {0.1, 0.4, -0.3, 0.2};
  std::vector<bool> d = {false, false, false};
  gae(r, v, d, 0.9, 0.0, &adv, &ret);
  for (size_t t = 0; t < r.size(); ++t) {
    CHECK(adv[t] == doctest::Approx(r[t] + 0.9 * v[t + 1] - v[t]));
  }

  // All-zero input gives all-zero advantages.
  gae({0, 0, 0}, {0, 0, 0, 0}, {false, false, true}, 0.99, 0.95, &adv, &ret);
  for (double a : adv) CHECK(a == 0.0);
}

TEST_CASE("gae equals the explicit double-sum oracle on random short episodes") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 400; ++trial) {
    const size_t T = 1 + rng() % 8;
    std::vector<double> rewards(T), values(T + 1);
    std::vector<bool> dones(T, false);
    for (auto& x : rewards) x = 4.0 * unit(rng) - 2.0;
    for (auto& x : values) x = 4.0 * unit(rng) - 2.0;
    // Mix fixed-horizon episodes and mid-buffer boundaries.
    for (size_t t = 0; t + 1 < T; ++t) dones[t] = unit(rng) < 0.2;
    dones[T - 1] = true;
    const double gamma = 0.5 + 0.5 * unit(rng);
    const double lambda = 0.5 + 0.5 * unit(rng);

    std::vector<double> adv, ret, want;
    gae(rewards, values, dones, gamma, lambda, &adv, &ret);
    gae_oracle(rewards, values, dones, gamma, lambda, &want);
    for (size_t t = 0; t < T; ++t) {
      CHECK(std::abs(adv[t] - want[t]) < 1e-10);
      CHECK(std::abs(ret[t] - (want[t] + values[t])) < 1e-10);
    }
  }
}

TEST_CASE("masked sampling: forced choice, soundness, and empirical frequencies") {
  std::mt19937_64 rng(5);
  Vec logits(kActionCount, 0.0);

  Mask single{};
  single[4] = true;
  auto [a, logp] = sample_action(logits, single, rng);
  CHECK(a == 4);
  CHECK(logp == doctest::Approx(0.0));

  Mask pair{};
  pair[0] = pair[9] = true;
  int zeros = 0;
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    auto [act, lp] = sample_action(logits, pair, rng);
    CHECK(pair[static_cast<size_t>(act)]);
    zeros += act == 0;
    CHECK(lp == doctest::Approx(std::log(0.5)));
  }
  CHECK(std::abs(zeros / static_cast<double>(N) - 0.5) < 0.01);

  // Random masks: the sample is always masked-in; masked logp is -inf.
  for (int trial = 0; trial < 2000; ++trial) {
    Mask m{};
    int count = 0;
    for (int i = 0; i < kActionCount; ++i) {
      m[static_cast<size_t>(i)] = rng() % 3 == 0;
      count += m[static_cast<size_t>(i)];
    }
    if (count == 0) m[9] = true;
    Vec l(kActionCount);
    for (auto& x : l) x = 2.0 * unit(rng) - 1.0;
    auto [act, lp] = sample_action(l, m, rng);
    CHECK(m[static_cast<size_t>(act)]);
    MaskedDist dist = masked_distribution(l, m);
    for (int i = 0; i < kActionCount; ++i) {
      if (!m[static_cast<size_t>(i)])
        CHECK(dist.logp[static_cast<size_t>(i)] == -std::numeric_limits<double>::infinity());
    }
    (void)lp;
  }

  Mask none{};
  CHECK_THROWS_AS(masked_distribution(logits, none), std::logic_error);
}

TEST_CASE("zero advantages: the policy term contributes no gradient") {
  std::mt19937_64 rng(11);
  PolicyParams p = small_params(rng);
  std::vector<Transition> batch;
  for (int k = 0; k < 6; ++k) batch.push_back(random_transition(rng, p));
  std::vector<const Transition*> rows;
  std::vector<double> adv(batch.size(), 0.0), ret;
  for (auto& t : batch) {
    rows.push_back(&t);
    ret.push_back(t.value);  // zero value error as well
  }
  TrainConfig cfg;
  cfg.entropy_coef = 0.0;
  cfg.value_coef = 0.0;
  PolicyParams grads = p;
  grads.zero();
  LossStats ls = compute_loss_and_grad(p, rows, adv, ret, cfg, &grads, 1);
  CHECK(ls.policy_loss == doctest::Approx(0.0));
  grads.visit([&](const std::string&, Vec& v, std::vector<int>) {
    for (double g : v) CHECK(g == doctest::Approx(0.0));
  });

  // With the value term back on, parameters do move.
  TrainConfig cfg2;
  cfg2.entropy_coef = 0.0;
  std::vector<double> ret_off;
  for (auto& t : batch) ret_off.push_back(t.value + 1.0);
  grads.zero();
  compute_loss_and_grad(p, rows, adv, ret_off, cfg2, &grads, 1);
  double norm = 0.0;
  grads.visit([&](const std::string&, Vec& v, std::vector<int>) {
    for (double g : v) norm += g * g;
  });
  CHECK(norm > 0.0);
}

TEST_CASE("clipped branch: surrogate equals the clip constant and carries no gradient") {
  std::mt19937_64 rng(13);
  PolicyParams p = small_params(rng);
  Transition t = random_transition(rng, p);
  Vec logits;
  double value;
  forward(p, t.features, t.intent, nullptr, &logits, &value);
  MaskedDist d = masked_distribution(logits, t.mask);
  // Force ratio = 1.5 with a positive advantage: min picks the clipped branch.
  t.logp = d.logp[static_cast<size_t>(t.action)] - std::log(1.5);

  TrainConfig cfg;
  cfg.clip_ratio = 0.2;
  cfg.entropy_coef = 0.0;
  cfg.value_coef = 0.0;
  std::vector<const Transition*> rows = {&t};
  std::vector<double> adv = {2.0}, ret = {value};
  PolicyParams grads = p;
  grads.zero();
  LossStats ls = compute_loss_and_grad(p, rows, adv, ret, cfg, &grads, 1);
  // Hand-evaluated: -clip(1.5, 0.8, 1.2) * 2.0 = -2.4
  CHECK(ls.policy_loss == doctest::Approx(-2.4));
  CHECK(ls.clip_fraction == doctest::Approx(1.0));
  grads.visit([&](const std::string&, Vec& v, std::vector<int>) {
    for (double g : v) CHECK(g == doctest::Approx(0.0));
  });
}

TEST_CASE("ppo_update keeps parameters finite and aborts cleanly on NaN rewards") {
  std::mt19937_64 rng(17);
  PolicyParams p = small_params(rng);
  TrainConfig cfg;
  cfg.minibatch_size = 8;
  cfg.ppo_epochs = 2;
  AdamOptimizer opt(cfg);

  RolloutBuffer buf;
  for (int k = 0; k < 24; ++k) {
    Transition t = random_transition(rng, p);
    t.reward = 2.0 * unit(rng) - 1.0;
    t.done = (k % 8) == 7;
    buf.steps.push_back(std::move(t));
  }
  std::mt19937_64 urng(3);
  UpdateStats st = ppo_update(&buf, &p, &opt, cfg, &urng, 3e-4);
  CHECK_FALSE(st.aborted);
  CHECK(st.minibatches > 0);
  CHECK(p.finite());

  // Poison the rewards: the update must abort and restore parameters.
  PolicyParams before = p;
  RolloutBuffer bad;
  for (int k = 0; k < 16; ++k) {
    Transition t = random_transition(rng, p);
    t.reward = std::numeric_limits<double>::quiet_NaN();
    t.done = (k % 8) == 7;
    bad.steps.push_back(std::move(t));
  }
  AdamOptimizer opt2(cfg);
  UpdateStats st2 = ppo_update(&bad, &p, &opt2, cfg, &urng, 3e-4);
  CHECK(st2.aborted);
  bool same = true;
  std::vector<Vec*> pa, pb;
  p.visit([&](const std::string&, Vec& v, std::vector<int>) { pa.push_back(&v); });
  before.visit([&](const std::string&, Vec& v, std::vector<int>) { pb.push_back(&v); });
  for (size_t k = 0; k < pa.size(); ++k) same &= *pa[k] == *pb[k];
  CHECK(same);
}

TEST_CASE("learning-rate schedules hit their endpoints exactly") {
  TrainConfig cfg;
  CHECK(scheduled_lr(cfg, 0.0) == 3e-4);
  CHECK(scheduled_lr(cfg, 1.0) == 3e-5);
  CHECK(scheduled_lr(cfg, 0.5) == doctest::Approx(0.5 * (3e-4 + 3e-5)));

  TrainConfig cos = cfg;
  cos.lr_schedule = LrSchedule::Cosine;
  CHECK(scheduled_lr(cos, 0.0) == doctest::Approx(3e-4));
  CHECK(scheduled_lr(cos, 1.0) == doctest::Approx(3e-5));
}

TEST_CASE("early-stop rule: worked example and counterexamples") {
  TrainConfig cfg;  // 0.5% threshold, 5 windows, 20000 episode minimum
  std::vector<double> rewards = {100.0, 100.2, 100.3, 100.4, 100.4, 100.45};
  CHECK(early_stop_triggered(rewards, 20000, cfg));
  CHECK_FALSE(early_stop_triggered(rewards, 19999, cfg));  // minimum not reached

  std::vector<double> improving = {100.0, 100.2, 100.3, 100.4, 100.4, 101.5};
  CHECK_FALSE(early_stop_triggered(improving, 30000, cfg));

  std::vector<double> short_history = {100.0, 100.1, 100.1};
  CHECK_FALSE(early_stop_triggered(short_history, 30000, cfg));
}

TEST_CASE("checkpoints round-trip exactly") {
  std::mt19937_64 rng(23);
  PolicyParams p = small_params(rng);
  const std::string path = "/tmp/redsim_test_checkpoint.json";
  save_checkpoint(p, "layout-x", "hash-y", path);
  Checkpoint ck = load_checkpoint(path);
  CHECK(ck.layout_manifest == "layout-x");
  CHECK(ck.config_hash == "hash-y");
  bool same = true;
  std::vector<Vec*> pa, pb;
  p.visit([&](const std::string&, Vec& v, std::vector<int>) { pa.push_back(&v); });
  ck.params.visit([&](const std::string&, Vec& v, std::vector<int>) { pb.push_back(&v); });
  REQUIRE(pa.size() == pb.size());
  for (size_t k = 0; k < pa.size(); ++k) same &= *pa[k] == *pb[k];
  CHECK(same);
}
