#pragma once

// Actor-critic network: residual state encoder with layer normalization,
// intent pass-through, and separate policy/value heads. Hand-rolled forward
// and reverse passes in 64-bit arithmetic so gradients can be checked against
// finite differences exactly.

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "redsim/types.hpp"

namespace redsim {

using Vec = std::vector<double>;

struct Linear {
  int in = 0, out = 0;
  Vec W;  // row-major [out][in]
  Vec b;  // [out]
  void resize(int in_dim, int out_dim) {
    in = in_dim;
    out = out_dim;
    W.assign(static_cast<size_t>(in) * out, 0.0);
    b.assign(static_cast<size_t>(out), 0.0);
  }
};

struct LayerNorm {
  int dim = 0;
  Vec gamma, beta;
  void resize(int d) {
    dim = d;
    gamma.assign(static_cast<size_t>(d), 1.0);
    beta.assign(static_cast<size_t>(d), 0.0);
  }
};

struct ResBlock {
  LayerNorm ln;
  Linear fc1, fc2;
  void resize(int width) {
    ln.resize(width);
    fc1.resize(width, width);
    fc2.resize(width, width);
  }
};

struct PolicyParams {
  int feature_dim = 0;
  int intent_dim = 128;
  int hidden = 128;
  int head_hidden = 256;
  int actions = kActionCount;

  Linear proj;          // feature_dim -> hidden
  ResBlock block1, block2;
  Linear pi_fc, pi_out; // (hidden+intent) -> head_hidden -> actions
  Linear v_fc, v_out;   // (hidden+intent) -> head_hidden -> 1

  void resize(int features);
  // Orthogonal-style scaled init for hidden layers, small-scale policy output.
  void init(std::mt19937_64& rng);
  void zero();
  int combined() const { return hidden + intent_dim; }

  // Visits every tensor in a fixed order: f(name, data, shape).
  template <typename F>
  void visit(F&& f) {
    auto lin = [&](const std::string& n, Linear& l) {
      f(n + ".W", l.W, std::vector<int>{l.out, l.in});
      f(n + ".b", l.b, std::vector<int>{l.out});
    };
    auto blk = [&](const std::string& n, ResBlock& r) {
      f(n + ".ln.gamma", r.ln.gamma, std::vector<int>{r.ln.dim});
      f(n + ".ln.beta", r.ln.beta, std::vector<int>{r.ln.dim});
      lin(n + ".fc1", r.fc1);
      lin(n + ".fc2", r.fc2);
    };
    lin("encoder.proj", proj);
    blk("encoder.block1", block1);
    blk("encoder.block2", block2);
    lin("policy.fc", pi_fc);
    lin("policy.out", pi_out);
    lin("value.fc", v_fc);
    lin("value.out", v_out);
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<PolicyParams*>(this)->visit(
        [&](const std::string& n, Vec& v, std::vector<int> shape) {
          f(n, const_cast<const Vec&>(v), std::move(shape));
        });
  }

  bool finite() const;
  std::string manifest_json() const;  // tensor names and shapes
};

struct ForwardCache {
  Vec x, z;
  Vec h0_pre, h0;          // proj output pre/post relu
  struct BlockCache {
    Vec input, xhat, ln_out;
    double mean = 0.0, inv_std = 0.0;
    Vec a_pre, a, out2;
  } b1, b2;
  Vec combined;
  Vec pi_pre, pi_h, logits;
  Vec v_pre, v_h;
  double value = 0.0;
};

// Deterministic forward pass. Throws std::invalid_argument on dimension
// mismatch; outputs are finite whenever params are.
void forward(const PolicyParams& p, const Vec& features, const Vec& intent,
             ForwardCache* cache, Vec* logits, double* value);

// Accumulates parameter gradients for upstream dlogits/dvalue into `grads`
// (same structure as params, pre-sized and typically zeroed by the caller).
void backward(const PolicyParams& p, const ForwardCache& cache, const Vec& dlogits,
              double dvalue, PolicyParams* grads);

// Masked categorical helpers. Masked-out logits receive -inf before softmax.
using Mask = std::array<bool, kActionCount>;
struct MaskedDist {
  std::array<double, kActionCount> logp;   // -inf on masked entries
  std::array<double, kActionCount> prob;   // 0 on masked entries
  double entropy = 0.0;
};
MaskedDist masked_distribution(const Vec& logits, const Mask& mask);

// Samples from the masked distribution; the returned index always has
// mask=true and the log-prob matches the renormalized distribution. Throws
// std::logic_error on an all-false mask (contract violation).
std::pair<int, double> sample_action(const Vec& logits, const Mask& mask, std::mt19937_64& rng);

// Checkpoint I/O: versioned JSON tensor dump with the layout manifest and
// config hash baked in. load_checkpoint verifies the manifest hash matches.
void save_checkpoint(const PolicyParams& params, const std::string& layout_manifest,
                     const std::string& config_hash, const std::string& path);
struct Checkpoint {
  PolicyParams params;
  std::string layout_manifest;
  std::string config_hash;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace redsim
