#include "emfend/fusion/co_attention.hpp"

#include <algorithm>
#include <stdexcept>

#include "emfend/numerics/ops.hpp"

namespace emfend::fusion {

namespace ops = numerics::ops;

namespace {

numerics::AttentionBlockConfig block_config(const MCTConfig& config) {
  numerics::AttentionBlockConfig block;
  block.width = config.width;
  block.heads = config.heads;
  block.ffn_dim = config.ffn_dim;
  block.layer_norm_eps = config.layer_norm_eps;
  block.layer_norm = config.layer_norm;
  return block;
}

bool fully_masked(const Mask& mask) {
  return !mask.empty() && std::none_of(mask.begin(), mask.end(), [](bool m) { return m; });
}

void check_stream(const Var& x, const Mask& mask, std::size_t width, const char* label) {
  if (x.cols() != width) {
    throw std::invalid_argument(std::string("mct: stream ") + label + " has width " +
                                std::to_string(x.cols()) + ", expected " + std::to_string(width));
  }
  if (!mask.empty() && mask.size() != x.rows()) {
    throw std::invalid_argument(std::string("mct: mask length differs for stream ") + label);
  }
  if (fully_masked(mask)) {
    throw std::invalid_argument(std::string("mct: every row of stream ") + label + " is masked");
  }
}

}  // namespace

MCTLayer::MCTLayer(numerics::ParameterStore& store, const std::string& prefix,
                   const MCTConfig& config, numerics::Rng& init_rng)
    : block_a_(store, prefix + ".a", block_config(config), init_rng),
      block_b_(store, prefix + ".b", block_config(config), init_rng) {}

MCTOutput MCTLayer::forward(const Var& a, const Mask& a_mask, const Var& b, const Mask& b_mask,
                            double dropout_rate, numerics::Rng* rng) const {
  const std::size_t d = block_a_.config().width;
  check_stream(a, a_mask, d, "a");
  check_stream(b, b_mask, d, "b");
  MCTOutput out;
  out.stream_a = block_a_.forward(a, b, b_mask, dropout_rate, rng);
  out.stream_b = block_b_.forward(b, a, a_mask, dropout_rate, rng);
  return out;
}

MCTStage::MCTStage(numerics::ParameterStore& store, const std::string& prefix,
                   const MCTConfig& config, numerics::Rng& init_rng) {
  if (config.layers == 0) throw std::invalid_argument("mct: a stage needs at least one layer");
  for (std::size_t i = 0; i < config.layers; ++i) {
    layers_.emplace_back(store, prefix + ".layer" + std::to_string(i), config, init_rng);
  }
}

MCTOutput MCTStage::forward(const Var& a, const Mask& a_mask, const Var& b, const Mask& b_mask,
                            double dropout_rate, numerics::Rng* rng) const {
  MCTOutput out{a, b};
  for (const auto& layer : layers_) {
    out = layer.forward(out.stream_a, a_mask, out.stream_b, b_mask, dropout_rate, rng);
  }
  return out;
}

Var masked_mean(const Var& x, const Mask& mask) { return ops::masked_mean_rows(x, mask); }

Fusion::Fusion(numerics::ParameterStore& store, const FusionConfig& config,
               numerics::Rng& init_rng)
    : config_(config) {
  const std::size_t d = config.mct.width;
  if (config.use_visual_entities) {
    if (config.use_coattention_ve) stage_ve_.emplace(store, "fusion.mct_ve", config.mct, init_rng);
    Tensor row(numerics::Shape{1, d});
    for (auto& v : row.data()) v = init_rng.uniform(-0.1, 0.1);
    sentinel_ = store.add("fusion.ve_sentinel", std::move(row));
  }
  if (config.use_coattention_vf) stage_vf_.emplace(store, "fusion.mct_vf", config.mct, init_rng);
}

FusedFeatures Fusion::fuse(const Var& text, const Mask& text_mask,
                           const std::optional<Var>& entities, const Var& regions,
                           double dropout_rate, numerics::Rng* rng) const {
  const std::size_t d = config_.mct.width;
  check_stream(text, text_mask, d, "text");
  check_stream(regions, {}, d, "regions");

  FusedFeatures out;
  Var text_ve = text;
  if (config_.use_visual_entities) {
    const Var stream = entities && entities->defined() && entities->rows() > 0 ? *entities : sentinel_;
    check_stream(stream, {}, d, "visual entities");
    if (stage_ve_) {
      const MCTOutput stage = stage_ve_->forward(text, text_mask, stream, {}, dropout_rate, rng);
      text_ve = stage.stream_a;
      out.x_ve = masked_mean(stage.stream_b, {});
    } else {
      out.x_ve = masked_mean(stream, {});
    }
  } else {
    out.x_ve = Var::constant(Tensor(numerics::Shape{1, d}, 0.0));
  }

  if (stage_vf_) {
    const MCTOutput stage = stage_vf_->forward(text_ve, text_mask, regions, {}, dropout_rate, rng);
    out.x_t = masked_mean(stage.stream_a, text_mask);
    out.x_v = masked_mean(stage.stream_b, {});
  } else {
    out.x_t = masked_mean(text_ve, text_mask);
    out.x_v = masked_mean(regions, {});
  }
  return out;
}

}  // namespace emfend::fusion
