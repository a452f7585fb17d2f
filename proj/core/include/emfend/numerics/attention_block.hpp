#pragma once

#include <string>

#include "emfend/numerics/ops.hpp"
#include "emfend/numerics/parameter_store.hpp"

namespace emfend::numerics {

struct AttentionBlockConfig {
  std::size_t width = 256;
  std::size_t heads = 8;
  std::size_t ffn_dim = 512;
  double layer_norm_eps = 1e-5;
  /// When false both residual sublayers skip normalisation (test mode).
  bool layer_norm = true;
};

/// Post-norm transformer block whose queries come from one stream and whose
/// keys and values come from another:
///   h   = LN(x + MultiHead(x W_Q, c W_K, c W_V) W_O)
///   out = LN(h + FFN(h))
/// Self-attention is the special case c == x. Keys carry no bias: it adds
/// the same score to every key of a query and cancels in the softmax.
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(ParameterStore& store, const std::string& prefix,
                 const AttentionBlockConfig& config, Rng& init_rng);

  /// Multi-head attention sublayer output before the residual, n_x x width.
  Var attend(const Var& x, const Var& context, const Mask& context_mask, double dropout_rate,
             Rng* rng) const;

  /// Full block. `rng` non-null enables dropout on attention weights and
  /// the FFN output.
  Var forward(const Var& x, const Var& context, const Mask& context_mask, double dropout_rate,
              Rng* rng) const;

  const AttentionBlockConfig& config() const { return config_; }

 private:
  AttentionBlockConfig config_;
  Var wq_, bq_, wk_, wv_, bv_, wo_, bo_;
  Var ln1_gain_, ln1_bias_, ln2_gain_, ln2_bias_;
  Var w1_, b1_, w2_, b2_;
};

}  // namespace emfend::numerics
