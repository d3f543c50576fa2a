#include "redsim/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace redsim {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double gauss(std::mt19937_64& rng) {
  // Box-Muller on explicitly constructed uniforms, stable across platforms.
  double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Rows of W orthonormalized via Gram-Schmidt, then scaled by `gain`.
void orthogonal_init(Linear& l, std::mt19937_64& rng, double gain) {
  for (auto& w : l.W) w = gauss(rng);
  const int rows = l.out, cols = l.in;
  for (int r = 0; r < rows; ++r) {
    double* wr = l.W.data() + static_cast<size_t>(r) * cols;
    for (int p = 0; p < std::min(r, cols); ++p) {
      const double* wp = l.W.data() + static_cast<size_t>(p) * cols;
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += wr[c] * wp[c];
      for (int c = 0; c < cols; ++c) wr[c] -= dot * wp[c];
    }
    double norm = 0.0;
    for (int c = 0; c < cols; ++c) norm += wr[c] * wr[c];
    norm = std::sqrt(std::max(norm, 1e-12));
    for (int c = 0; c < cols; ++c) wr[c] = gain * wr[c] / norm;
  }
  std::fill(l.b.begin(), l.b.end(), 0.0);
}

void linear_fwd(const Linear& l, const Vec& x, Vec& y) {
  y.assign(static_cast<size_t>(l.out), 0.0);
  for (int r = 0; r < l.out; ++r) {
    const double* wr = l.W.data() + static_cast<size_t>(r) * l.in;
    double acc = l.b[static_cast<size_t>(r)];
    for (int c = 0; c < l.in; ++c) acc += wr[c] * x[static_cast<size_t>(c)];
    y[static_cast<size_t>(r)] = acc;
  }
}

// dy is the upstream gradient; accumulates into gl and (optionally) dx.
void linear_bwd(const Linear& l, const Vec& x, const Vec& dy, Linear& gl, Vec* dx) {
  for (int r = 0; r < l.out; ++r) {
    const double g = dy[static_cast<size_t>(r)];
    if (g == 0.0) continue;
    double* gw = gl.W.data() + static_cast<size_t>(r) * l.in;
    for (int c = 0; c < l.in; ++c) gw[c] += g * x[static_cast<size_t>(c)];
    gl.b[static_cast<size_t>(r)] += g;
  }
  if (dx) {
    dx->assign(static_cast<size_t>(l.in), 0.0);
    for (int r = 0; r < l.out; ++r) {
      const double g = dy[static_cast<size_t>(r)];
      if (g == 0.0) continue;
      const double* wr = l.W.data() + static_cast<size_t>(r) * l.in;
      for (int c = 0; c < l.in; ++c) (*dx)[static_cast<size_t>(c)] += g * wr[c];
    }
  }
}

void relu_fwd(const Vec& x, Vec& y) {
  y.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd(const Vec& pre, Vec& d) {
  for (size_t i = 0; i < d.size(); ++i)
    if (pre[i] <= 0.0) d[i] = 0.0;
}

void layernorm_fwd(const LayerNorm& ln, const Vec& x, Vec& xhat, Vec& y, double* mean,
                   double* inv_std) {
  const int d = ln.dim;
  double m = 0.0;
  for (int i = 0; i < d; ++i) m += x[static_cast<size_t>(i)];
  m /= d;
  double var = 0.0;
  for (int i = 0; i < d; ++i) {
    double c = x[static_cast<size_t>(i)] - m;
    var += c * c;
  }
  var /= d;
  double inv = 1.0 / std::sqrt(var + kLnEps);
  xhat.resize(static_cast<size_t>(d));
  y.resize(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    xhat[static_cast<size_t>(i)] = (x[static_cast<size_t>(i)] - m) * inv;
    y[static_cast<size_t>(i)] =
        ln.gamma[static_cast<size_t>(i)] * xhat[static_cast<size_t>(i)] + ln.beta[static_cast<size_t>(i)];
  }
  *mean = m;
  *inv_std = inv;
}

void layernorm_bwd(const LayerNorm& ln, const Vec& xhat, double inv_std, const Vec& dy,
                   LayerNorm& gl, Vec& dx) {
  const int d = ln.dim;
  double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
  dx.assign(static_cast<size_t>(d), 0.0);
  Vec dxhat(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    gl.gamma[static_cast<size_t>(i)] += dy[static_cast<size_t>(i)] * xhat[static_cast<size_t>(i)];
    gl.beta[static_cast<size_t>(i)] += dy[static_cast<size_t>(i)];
    dxhat[static_cast<size_t>(i)] = dy[static_cast<size_t>(i)] * ln.gamma[static_cast<size_t>(i)];
    mean_dxhat += dxhat[static_cast<size_t>(i)];
    mean_dxhat_xhat += dxhat[static_cast<size_t>(i)] * xhat[static_cast<size_t>(i)];
  }
  mean_dxhat /= d;
  mean_dxhat_xhat /= d;
  for (int i = 0; i < d; ++i) {
    dx[static_cast<size_t>(i)] = inv_std * (dxhat[static_cast<size_t>(i)] - mean_dxhat -
                                            xhat[static_cast<size_t>(i)] * mean_dxhat_xhat);
  }
}

void block_fwd(const ResBlock& blk, const Vec& input, ForwardCache::BlockCache& c, Vec& out) {
  c.input = input;
  layernorm_fwd(blk.ln, input, c.xhat, c.ln_out, &c.mean, &c.inv_std);
  linear_fwd(blk.fc1, c.ln_out, c.a_pre);
  relu_fwd(c.a_pre, c.a);
  linear_fwd(blk.fc2, c.a, c.out2);
  out.resize(input.size());
  for (size_t i = 0; i < input.size(); ++i) out[i] = input[i] + c.out2[i];
}

void block_bwd(const ResBlock& blk, const ForwardCache::BlockCache& c, const Vec& dout,
               ResBlock& gblk, Vec& dinput) {
  Vec da;
  linear_bwd(blk.fc2, c.a, dout, gblk.fc2, &da);
  relu_bwd(c.a_pre, da);
  Vec dln;
  linear_bwd(blk.fc1, c.ln_out, da, gblk.fc1, &dln);
  Vec dx;
  layernorm_bwd(blk.ln, c.xhat, c.inv_std, dln, gblk.ln, dx);
  dinput.resize(dout.size());
  for (size_t i = 0; i < dout.size(); ++i) dinput[i] = dout[i] + dx[i];  // residual path
}

}  // namespace

void PolicyParams::resize(int features) {
  feature_dim = features;
  proj.resize(feature_dim, hidden);
  block1.resize(hidden);
  block2.resize(hidden);
  pi_fc.resize(combined(), head_hidden);
  pi_out.resize(head_hidden, actions);
  v_fc.resize(combined(), head_hidden);
  v_out.resize(head_hidden, 1);
}

void PolicyParams::init(std::mt19937_64& rng) {
  const double g = std::sqrt(2.0);
  orthogonal_init(proj, rng, g);
  orthogonal_init(block1.fc1, rng, g);
  orthogonal_init(block1.fc2, rng, 0.1);  // near-identity residual start
  orthogonal_init(block2.fc1, rng, g);
  orthogonal_init(block2.fc2, rng, 0.1);
  orthogonal_init(pi_fc, rng, g);
  orthogonal_init(pi_out, rng, 0.01);
  orthogonal_init(v_fc, rng, g);
  orthogonal_init(v_out, rng, 1.0);
}

void PolicyParams::zero() {
  visit([](const std::string&, Vec& v, std::vector<int>) { std::fill(v.begin(), v.end(), 0.0); });
  // LayerNorm gains are part of the parameter set; zero() is used for
  // gradient accumulators where every entry starts at 0.
}

bool PolicyParams::finite() const {
  bool ok = true;
  visit([&](const std::string&, const Vec& v, std::vector<int>) {
    for (double x : v)
      if (!std::isfinite(x)) ok = false;
  });
  return ok;
}

std::string PolicyParams::manifest_json() const {
  nlohmann::ordered_json j;
  j["feature_dim"] = feature_dim;
  j["intent_dim"] = intent_dim;
  j["hidden"] = hidden;
  j["head_hidden"] = head_hidden;
  j["actions"] = actions;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  visit([&](const std::string& n, const Vec& v, std::vector<int> shape) {
    tensors[n] = {{"shape", shape}, {"count", v.size()}};
  });
  j["tensors"] = tensors;
  return j.dump();
}

void forward(const PolicyParams& p, const Vec& features, const Vec& intent, ForwardCache* cache,
             Vec* logits, double* value) {
  if (static_cast<int>(features.size()) != p.feature_dim)
    throw std::invalid_argument("forward: feature dim " + std::to_string(features.size()) +
                                " != configured " + std::to_string(p.feature_dim));
  if (static_cast<int>(intent.size()) != p.intent_dim)
    throw std::invalid_argument("forward: intent dim mismatch");

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.x = features;
  c.z = intent;

  linear_fwd(p.proj, c.x, c.h0_pre);
  relu_fwd(c.h0_pre, c.h0);
  Vec h1, h2;
  block_fwd(p.block1, c.h0, c.b1, h1);
  block_fwd(p.block2, h1, c.b2, h2);

  c.combined.resize(static_cast<size_t>(p.combined()));
  std::copy(h2.begin(), h2.end(), c.combined.begin());
  std::copy(c.z.begin(), c.z.end(), c.combined.begin() + p.hidden);

  linear_fwd(p.pi_fc, c.combined, c.pi_pre);
  relu_fwd(c.pi_pre, c.pi_h);
  linear_fwd(p.pi_out, c.pi_h, c.logits);

  linear_fwd(p.v_fc, c.combined, c.v_pre);
  relu_fwd(c.v_pre, c.v_h);
  Vec v1;
  linear_fwd(p.v_out, c.v_h, v1);
  c.value = v1[0];

  if (logits) *logits = c.logits;
  if (value) *value = c.value;
}

void backward(const PolicyParams& p, const ForwardCache& c, const Vec& dlogits, double dvalue,
              PolicyParams* grads) {
  Vec d_combined(static_cast<size_t>(p.combined()), 0.0);

  {
    Vec d_pi_h;
    linear_bwd(p.pi_out, c.pi_h, dlogits, grads->pi_out, &d_pi_h);
    relu_bwd(c.pi_pre, d_pi_h);
    Vec d_comb_pi;
    linear_bwd(p.pi_fc, c.combined, d_pi_h, grads->pi_fc, &d_comb_pi);
    for (size_t i = 0; i < d_combined.size(); ++i) d_combined[i] += d_comb_pi[i];
  }
  if (dvalue != 0.0) {
    Vec dv1{dvalue};
    Vec d_v_h;
    linear_bwd(p.v_out, c.v_h, dv1, grads->v_out, &d_v_h);
    relu_bwd(c.v_pre, d_v_h);
    Vec d_comb_v;
    linear_bwd(p.v_fc, c.combined, d_v_h, grads->v_fc, &d_comb_v);
    for (size_t i = 0; i < d_combined.size(); ++i) d_combined[i] += d_comb_v[i];
  }

  Vec dh2(d_combined.begin(), d_combined.begin() + p.hidden);
  Vec dh1, dh0;
  block_bwd(p.block2, c.b2, dh2, grads->block2, dh1);
  block_bwd(p.block1, c.b1, dh1, grads->block1, dh0);
  relu_bwd(c.h0_pre, dh0);
  linear_bwd(p.proj, c.x, dh0, grads->proj, nullptr);
}

MaskedDist masked_distribution(const Vec& logits, const Mask& mask) {
  MaskedDist d;
  double maxv = kNegInf;
  for (int i = 0; i < kActionCount; ++i) {
    d.logp[static_cast<size_t>(i)] = mask[static_cast<size_t>(i)] ? logits[static_cast<size_t>(i)] : kNegInf;
    if (mask[static_cast<size_t>(i)]) maxv = std::max(maxv, logits[static_cast<size_t>(i)]);
  }
  if (maxv == kNegInf) throw std::logic_error("masked_distribution: all-false mask");
  double sum = 0.0;
  for (int i = 0; i < kActionCount; ++i) {
    if (mask[static_cast<size_t>(i)]) sum += std::exp(logits[static_cast<size_t>(i)] - maxv);
  }
  const double lse = maxv + std::log(sum);
  d.entropy = 0.0;
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[static_cast<size_t>(i)]) {
      d.prob[static_cast<size_t>(i)] = 0.0;
      continue;
    }
    d.logp[static_cast<size_t>(i)] = logits[static_cast<size_t>(i)] - lse;
    d.prob[static_cast<size_t>(i)] = std::exp(d.logp[static_cast<size_t>(i)]);
    d.entropy -= d.prob[static_cast<size_t>(i)] * d.logp[static_cast<size_t>(i)];
  }
  return d;
}

std::pair<int, double> sample_action(const Vec& logits, const Mask& mask, std::mt19937_64& rng) {
  MaskedDist d = masked_distribution(logits, mask);
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  int last_valid = -1;
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[static_cast<size_t>(i)]) continue;
    last_valid = i;
    acc += d.prob[static_cast<size_t>(i)];
    if (u < acc) return {i, d.logp[static_cast<size_t>(i)]};
  }
  return {last_valid, d.logp[static_cast<size_t>(last_valid)]};
}

void save_checkpoint(const PolicyParams& params, const std::string& layout_manifest,
                     const std::string& config_hash, const std::string& path) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["config_hash"] = config_hash;
  j["layout_manifest"] = layout_manifest;
  j["dims"] = {{"feature_dim", params.feature_dim},
               {"intent_dim", params.intent_dim},
               {"hidden", params.hidden},
               {"head_hidden", params.head_hidden},
               {"actions", params.actions}};
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  params.visit([&](const std::string& n, const Vec& v, std::vector<int>) { tensors[n] = v; });
  j["tensors"] = tensors;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  f << j.dump();
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported checkpoint version");
  Checkpoint ck;
  ck.config_hash = j.at("config_hash").get<std::string>();
  ck.layout_manifest = j.at("layout_manifest").get<std::string>();
  ck.params.intent_dim = j.at("dims").at("intent_dim").get<int>();
  ck.params.hidden = j.at("dims").at("hidden").get<int>();
  ck.params.head_hidden = j.at("dims").at("head_hidden").get<int>();
  ck.params.actions = j.at("dims").at("actions").get<int>();
  ck.params.resize(j.at("dims").at("feature_dim").get<int>());
  const auto& tensors = j.at("tensors");
  ck.params.visit([&](const std::string& n, Vec& v, std::vector<int>) {
    auto stored = tensors.at(n).get<Vec>();
    if (stored.size() != v.size())
      throw std::runtime_error("checkpoint tensor size mismatch for " + n);
    v = std::move(stored);
  });
  return ck;
}

}  // namespace redsim
