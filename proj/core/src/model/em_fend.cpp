#include "emfend/model/em_fend.hpp"

#include <algorithm>
#include <cmath>

#include "emfend/error.hpp"
#include "emfend/fusion/consistency.hpp"
#include "emfend/numerics/ops.hpp"

namespace emfend::model {

namespace ops = numerics::ops;
using numerics::Shape;

Var classify(const Var& x_m, const Var& weight, const Var& bias) {
  return ops::softmax_rows(ops::linear(x_m, weight, bias));
}

double loss(const Prediction& p, int label) {
  const double q = label == 1 ? p.p_fake : p.p_real;
  return -std::log(std::clamp(q, 1e-12, 1.0 - 1e-12));
}

EmFend::EmFend(const ModelConfig& config)
    : config_(config), store_(std::make_unique<numerics::ParameterStore>()) {
  config_.validate();
  numerics::Rng init(config_.seed);
  const std::size_t d = config_.d;

  encoders::TextEncoderConfig text;
  text.vocab_size = config_.vocab_size;
  text.width = d;
  text.max_len = config_.L_max;
  text.layers = config_.encoder_layers;
  text.heads = config_.heads;
  text.ffn_dim = config_.ffn_multiplier * d;
  encoder_ = std::make_unique<encoders::TextEncoder>(*store_, text, init);

  visual_ = std::make_unique<encoders::VisualProjector>(*store_, config_.d_visual, d, init,
                                                        config_.finetune_visual_projection);

  fusion::FusionConfig fusion;
  fusion.mct.width = d;
  fusion.mct.heads = config_.heads;
  fusion.mct.ffn_dim = config_.ffn_multiplier * d;
  fusion.mct.layers = config_.mct_layers;
  fusion.use_visual_entities = config_.use_visual_entities;
  fusion.use_coattention_ve = config_.use_coattention_ve;
  fusion.use_coattention_vf = config_.use_coattention_vf;
  fusion_ = std::make_unique<fusion::Fusion>(*store_, fusion, init);

  const std::size_t width = 3 * d + 3;
  head_w_ = store_->add("head.w", numerics::glorot_uniform({width, 2}, width, 2, init));
  head_b_ = store_->add("head.b", Tensor(Shape{2}, 0.0));
}

Var EmFend::text_stream(const corpus::NewsPost& post, numerics::Mask& mask,
                        numerics::Rng* rng) const {
  if (post.text_features) {
    const corpus::FeatureMatrix& f = *post.text_features;
    if (f.cols != config_.d || f.rows == 0) {
      throw DataError("post '" + post.id + "': text_features are " + std::to_string(f.rows) + "x" +
                      std::to_string(f.cols) + ", model width is " + std::to_string(config_.d));
    }
    mask.assign(f.rows, true);
    return Var::constant(encoders::to_tensor(f));
  }
  static const corpus::Tokens kNoOcr;
  const encoders::ComposedText composed =
      encoders::compose_text(post.text, config_.use_ocr ? post.ocr_text : kNoOcr, config_.L_max);
  mask = composed.mask;
  return encoder_->encode(composed, config_.dropout, rng);
}

ForwardTrace EmFend::trace(const corpus::NewsPost& post, numerics::Rng* rng) const {
  if (post.visual_regions.rows != config_.n_regions) {
    throw DataError("post '" + post.id + "': expected " + std::to_string(config_.n_regions) +
                    " visual regions, got " + std::to_string(post.visual_regions.rows));
  }
  ForwardTrace t;
  numerics::Mask text_mask;
  const Var text = text_stream(post, text_mask, rng);
  const Var regions = visual_->project(post.visual_regions);

  std::optional<Var> entities;
  if (config_.use_visual_entities && !post.visual_entities.empty()) {
    std::vector<Var> rows;
    rows.reserve(post.visual_entities.size());
    for (const auto& m : post.visual_entities) rows.push_back(encoder_->embed_entity(m));
    entities = rows.size() == 1 ? rows[0] : ops::concat_rows(rows);
  }

  const fusion::FusedFeatures fused =
      fusion_->fuse(text, text_mask, entities, regions, config_.dropout, rng);
  t.x_t = fused.x_t;
  t.x_ve = fused.x_ve;
  t.x_v = fused.x_v;

  if (config_.use_entity_consistency) {
    fusion::ConsistencyOptions options;
    options.clamp = config_.clamp_consistency;
    options.differentiable = config_.consistency_gradient;
    t.x_s = fusion::consistency_vector(
        post, [this](const corpus::EntityMention& m) { return encoder_->embed_entity(m); }, options);
  } else {
    t.x_s = Var::constant(Tensor(Shape{1, 3}, 1.0));
  }
  t.x_m = fusion::concat_multimodal(t.x_t, t.x_ve, t.x_v, t.x_s);
  t.probs = classify(t.x_m, head_w_, head_b_);
  return t;
}

Prediction EmFend::predict(const corpus::NewsPost& post) const {
  const Tensor p = forward(post).value();
  return Prediction{post.id, p[0], p[1]};
}

Var EmFend::loss(const corpus::NewsPost& post, numerics::Rng* rng) const {
  const Var nll = ops::negative_log_likelihood(forward(post, rng), static_cast<std::size_t>(post.label));
  return post.label == corpus::kLabelFake && config_.positive_class_weight != 1.0
             ? ops::scale(nll, config_.positive_class_weight)
             : nll;
}

}  // namespace emfend::model
