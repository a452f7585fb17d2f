#include "emfend/numerics/attention_block.hpp"

#include <stdexcept>
#include <vector>

namespace emfend::numerics {

AttentionBlock::AttentionBlock(ParameterStore& store, const std::string& prefix,
                               const AttentionBlockConfig& config, Rng& init_rng)
    : config_(config) {
  const std::size_t d = config.width;
  if (config.heads == 0 || d % config.heads != 0) {
    throw std::invalid_argument("attention block: width " + std::to_string(d) +
                                " is not divisible by " + std::to_string(config.heads) + " heads");
  }
  auto weight = [&](const std::string& name, std::size_t in, std::size_t out) {
    return store.add(prefix + "." + name, glorot_uniform({in, out}, in, out, init_rng));
  };
  auto constant = [&](const std::string& name, std::size_t n, double value) {
    return store.add(prefix + "." + name, Tensor(Shape{n}, value));
  };
  wq_ = weight("wq", d, d);
  bq_ = constant("bq", d, 0.0);
  wk_ = weight("wk", d, d);
  wv_ = weight("wv", d, d);
  bv_ = constant("bv", d, 0.0);
  wo_ = weight("wo", d, d);
  bo_ = constant("bo", d, 0.0);
  w1_ = weight("ffn.w1", d, config.ffn_dim);
  b1_ = constant("ffn.b1", config.ffn_dim, 0.0);
  w2_ = weight("ffn.w2", config.ffn_dim, d);
  b2_ = constant("ffn.b2", d, 0.0);
  if (config.layer_norm) {
    ln1_gain_ = constant("ln1.gain", d, 1.0);
    ln1_bias_ = constant("ln1.bias", d, 0.0);
    ln2_gain_ = constant("ln2.gain", d, 1.0);
    ln2_bias_ = constant("ln2.bias", d, 0.0);
  }
}

Var AttentionBlock::attend(const Var& x, const Var& context, const Mask& context_mask,
                           double dropout_rate, Rng* rng) const {
  const std::size_t d = config_.width;
  if (x.cols() != d || context.cols() != d) {
    throw std::invalid_argument("attention block: stream width differs from " + std::to_string(d));
  }
  const Var q = ops::linear(x, wq_, bq_);
  const Var k = ops::matmul(context, wk_);
  const Var v = ops::linear(context, wv_, bv_);
  const std::size_t head_dim = d / config_.heads;
  std::vector<Var> heads;
  heads.reserve(config_.heads);
  for (std::size_t h = 0; h < config_.heads; ++h) {
    const std::size_t start = h * head_dim;
    heads.push_back(ops::scaled_dot_attention(
        ops::slice_cols(q, start, head_dim), ops::slice_cols(k, start, head_dim),
        ops::slice_cols(v, start, head_dim), context_mask, dropout_rate, rng));
  }
  const Var merged = config_.heads == 1 ? heads[0] : ops::concat_cols(heads);
  return ops::linear(merged, wo_, bo_);
}

Var AttentionBlock::forward(const Var& x, const Var& context, const Mask& context_mask,
                            double dropout_rate, Rng* rng) const {
  Var h = ops::add(x, attend(x, context, context_mask, dropout_rate, rng));
  if (config_.layer_norm) h = ops::layer_norm_rows(h, ln1_gain_, ln1_bias_, config_.layer_norm_eps);
  Var ffn = ops::linear(ops::relu(ops::linear(h, w1_, b1_)), w2_, b2_);
  if (rng != nullptr && dropout_rate > 0.0) ffn = ops::dropout(ffn, dropout_rate, *rng);
  Var out = ops::add(h, ffn);
  if (config_.layer_norm) out = ops::layer_norm_rows(out, ln2_gain_, ln2_bias_, config_.layer_norm_eps);
  return out;
}

}  // namespace emfend::numerics
