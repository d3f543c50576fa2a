#include "redsim/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace redsim {

void gae(const std::vector<double>& rewards, const std::vector<double>& values,
         const std::vector<bool>& dones, double gamma, double lambda,
         std::vector<double>* advantages, std::vector<double>* returns) {
  const size_t T = rewards.size();
  if (values.size() != T + 1 || dones.size() != T)
    throw std::invalid_argument("gae: rewards/values/dones length mismatch");
  advantages->assign(T, 0.0);
  returns->assign(T, 0.0);
  double running = 0.0;
  for (size_t i = T; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * values[i + 1] * not_done - values[i];
    running = delta + gamma * lambda * not_done * running;
    (*advantages)[i] = running;
    (*returns)[i] = running + values[i];
  }
}

void compute_advantages(RolloutBuffer* buffer, double gamma, double lambda) {
  const size_t T = buffer->steps.size();
  std::vector<double> rewards(T), values(T + 1, 0.0);
  std::vector<bool> dones(T);
  for (size_t i = 0; i < T; ++i) {
    rewards[i] = buffer->steps[i].reward;
    values[i] = buffer->steps[i].value;
    dones[i] = buffer->steps[i].done;
  }
  values[T] = 0.0;  // every episode in the buffer terminates at its horizon
  gae(rewards, values, dones, gamma, lambda, &buffer->advantages, &buffer->returns);
}

namespace {

struct ShardResult {
  PolicyParams grads;
  double policy_loss = 0.0, value_loss = 0.0, entropy = 0.0;
  double clipped = 0.0, kl = 0.0;
  bool finite = true;
};

ShardResult loss_shard(const PolicyParams& params, const std::vector<const Transition*>& rows,
                       const std::vector<double>& advantages, const std::vector<double>& returns,
                       const TrainConfig& cfg, size_t begin, size_t end, double inv_n) {
  ShardResult r;
  r.grads = params;
  r.grads.zero();
  const double eps = cfg.clip_ratio;

  for (size_t i = begin; i < end; ++i) {
    const Transition& tr = *rows[i];
    ForwardCache cache;
    Vec logits;
    double value = 0.0;
    forward(params, tr.features, tr.intent, &cache, &logits, &value);
    MaskedDist dist = masked_distribution(logits, tr.mask);

    const double logp_new = dist.logp[static_cast<size_t>(tr.action)];
    const double ratio = std::exp(logp_new - tr.logp);
    const double adv = advantages[i];
    const double surr1 = ratio * adv;
    const double clipped_ratio = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double surr2 = clipped_ratio * adv;

    // d(-min)/dlogp: gradient flows only through the unclipped branch.
    double dlogp = 0.0;
    if (surr1 <= surr2) {
      r.policy_loss += -surr1;
      dlogp = -ratio * adv;
    } else {
      r.policy_loss += -surr2;
      r.clipped += 1.0;
    }
    r.kl += tr.logp - logp_new;

    const double verr = value - returns[i];
    r.value_loss += 0.5 * verr * verr;
    r.entropy += dist.entropy;

    Vec dlogits(kActionCount, 0.0);
    for (int j = 0; j < kActionCount; ++j) {
      if (!tr.mask[static_cast<size_t>(j)]) continue;
      const double pj = dist.prob[static_cast<size_t>(j)];
      const double indicator = (j == tr.action) ? 1.0 : 0.0;
      double g = dlogp * (indicator - pj);
      // Entropy bonus: d(-c_e * H)/dlogits_j = c_e * p_j (logp_j + H)
      g += cfg.entropy_coef * pj * (dist.logp[static_cast<size_t>(j)] + dist.entropy);
      dlogits[static_cast<size_t>(j)] = g * inv_n;
    }
    const double dvalue = cfg.value_coef * verr * inv_n;
    backward(params, cache, dlogits, dvalue, &r.grads);

    if (!std::isfinite(logp_new) || !std::isfinite(value)) r.finite = false;
  }
  return r;
}

double accumulate_and_norm(PolicyParams* total, std::vector<ShardResult>& shards) {
  for (size_t s = 1; s < shards.size(); ++s) {
    // Fixed-order reduction keeps results deterministic across runs.
    auto& dst = shards[0].grads;
    auto& src = shards[s].grads;
    std::vector<Vec*> dsts, srcs;
    dst.visit([&](const std::string&, Vec& v, std::vector<int>) { dsts.push_back(&v); });
    src.visit([&](const std::string&, Vec& v, std::vector<int>) { srcs.push_back(&v); });
    for (size_t k = 0; k < dsts.size(); ++k)
      for (size_t j = 0; j < dsts[k]->size(); ++j) (*dsts[k])[j] += (*srcs[k])[j];
  }
  *total = std::move(shards[0].grads);
  double sq = 0.0;
  total->visit([&](const std::string&, Vec& v, std::vector<int>) {
    for (double g : v) sq += g * g;
  });
  return std::sqrt(sq);
}

}  // namespace

LossStats compute_loss_and_grad(const PolicyParams& params,
                                const std::vector<const Transition*>& rows,
                                const std::vector<double>& advantages,
                                const std::vector<double>& returns, const TrainConfig& cfg,
                                PolicyParams* grads, int workers) {
  const size_t n = rows.size();
  if (n == 0) throw std::invalid_argument("compute_loss_and_grad: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);

  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<ShardResult> shards;
  if (workers == 1) {
    shards.push_back(loss_shard(params, rows, advantages, returns, cfg, 0, n, inv_n));
  } else {
    std::vector<std::future<ShardResult>> futures;
    const size_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const size_t b = static_cast<size_t>(w) * chunk;
      const size_t e = std::min(n, b + chunk);
      if (b >= e) break;
      futures.push_back(std::async(std::launch::async, [&, b, e] {
        return loss_shard(params, rows, advantages, returns, cfg, b, e, inv_n);
      }));
    }
    for (auto& f : futures) shards.push_back(f.get());
  }

  LossStats stats;
  bool finite = true;
  for (auto& s : shards) {
    stats.policy_loss += s.policy_loss;
    stats.value_loss += s.value_loss;
    stats.entropy += s.entropy;
    stats.clip_fraction += s.clipped;
    stats.approx_kl += s.kl;
    finite &= s.finite;
  }
  stats.policy_loss *= inv_n;
  stats.value_loss *= inv_n;
  stats.entropy *= inv_n;
  stats.clip_fraction *= inv_n;
  stats.approx_kl *= inv_n;
  stats.total_loss =
      stats.policy_loss + cfg.value_coef * stats.value_loss - cfg.entropy_coef * stats.entropy;
  if (!finite) stats.total_loss = std::numeric_limits<double>::quiet_NaN();

  std::vector<ShardResult>& mutable_shards = shards;
  accumulate_and_norm(grads, mutable_shards);
  return stats;
}

double AdamOptimizer::step(PolicyParams* params, PolicyParams* grads, double lr) {
  std::vector<Vec*> ps, gs;
  params->visit([&](const std::string&, Vec& v, std::vector<int>) { ps.push_back(&v); });
  grads->visit([&](const std::string&, Vec& v, std::vector<int>) { gs.push_back(&v); });
  if (m_.empty()) {
    for (auto* p : ps) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }

  double sq = 0.0;
  for (auto* g : gs)
    for (double x : *g) sq += x * x;
  const double norm = std::sqrt(sq);
  const double scale = norm > cfg_.max_grad_norm ? cfg_.max_grad_norm / (norm + 1e-12) : 1.0;

  ++t_;
  const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (size_t k = 0; k < ps.size(); ++k) {
    Vec& p = *ps[k];
    Vec& g = *gs[k];
    Vec& m = m_[k];
    Vec& v = v_[k];
    for (size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] * scale;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
    }
  }
  return norm;
}

UpdateStats ppo_update(RolloutBuffer* buffer, PolicyParams* params, AdamOptimizer* opt,
                       const TrainConfig& cfg, std::mt19937_64* rng, double lr) {
  UpdateStats out;
  const size_t n = buffer->steps.size();
  if (n == 0) return out;
  if (buffer->advantages.size() != n) compute_advantages(buffer, cfg.gamma, cfg.gae_lambda);

  // Normalize advantages over the whole rollout batch.
  std::vector<double> adv = buffer->advantages;
  double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : adv) a = (a - mean) * inv_std;

  const PolicyParams backup = *params;
  PolicyParams grads = *params;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const int workers = std::max(1, cfg.workers);
  int batches = 0;
  for (int epoch = 0; epoch < cfg.ppo_epochs; ++epoch) {
    // Fisher-Yates with the run RNG: deterministic given the seed.
    for (size_t i = n; i > 1; --i) {
      size_t j = static_cast<size_t>((*rng)() % i);
      std::swap(order[i - 1], order[j]);
    }
    for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.minibatch_size)) {
      const size_t end = std::min(n, start + static_cast<size_t>(cfg.minibatch_size));
      std::vector<const Transition*> rows;
      std::vector<double> badv, bret;
      rows.reserve(end - start);
      for (size_t k = start; k < end; ++k) {
        rows.push_back(&buffer->steps[order[k]]);
        badv.push_back(adv[order[k]]);
        bret.push_back(buffer->returns[order[k]]);
      }
      grads.zero();
      LossStats ls = compute_loss_and_grad(*params, rows, badv, bret, cfg, &grads, workers);
      if (!std::isfinite(ls.total_loss) || !grads.finite()) {
        *params = backup;
        out.aborted = true;
        return out;
      }
      out.grad_norm = opt->step(params, &grads, lr);
      if (!params->finite()) {
        *params = backup;
        out.aborted = true;
        return out;
      }
      // Running means over minibatches for reporting.
      ++batches;
      const double w = 1.0 / batches;
      out.loss.policy_loss += (ls.policy_loss - out.loss.policy_loss) * w;
      out.loss.value_loss += (ls.value_loss - out.loss.value_loss) * w;
      out.loss.entropy += (ls.entropy - out.loss.entropy) * w;
      out.loss.total_loss += (ls.total_loss - out.loss.total_loss) * w;
      out.loss.clip_fraction += (ls.clip_fraction - out.loss.clip_fraction) * w;
      out.loss.approx_kl += (ls.approx_kl - out.loss.approx_kl) * w;
    }
  }
  out.minibatches = batches;
  return out;
}

double scheduled_lr(const TrainConfig& cfg, double progress) {
  progress = std::clamp(progress, 0.0, 1.0);
  if (progress == 0.0) return cfg.lr_start;
  if (progress == 1.0) return cfg.lr_end;  // exact endpoints
  if (cfg.lr_schedule == LrSchedule::Linear) {
    return cfg.lr_start + (cfg.lr_end - cfg.lr_start) * progress;
  }
  return cfg.lr_end + (cfg.lr_start - cfg.lr_end) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

bool early_stop_triggered(const std::vector<double>& eval_rewards, int episodes_done,
                          const TrainConfig& cfg) {
  if (episodes_done < cfg.early_stop_min_episodes) return false;
  const int w = cfg.early_stop_window;
  if (static_cast<int>(eval_rewards.size()) < w + 1) return false;
  const size_t last = eval_rewards.size() - 1;
  for (int k = 0; k < w; ++k) {
    const double prev = eval_rewards[last - static_cast<size_t>(k) - 1];
    const double cur = eval_rewards[last - static_cast<size_t>(k)];
    const double rel = (cur - prev) / std::max(1e-12, std::abs(prev));
    if (rel >= cfg.early_stop_threshold) return false;
  }
  return true;
}

}  // namespace redsim
