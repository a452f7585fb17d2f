#pragma once

#include <memory>
#include <optional>

#include "emfend/corpus/news_post.hpp"
#include "emfend/encoders/text_encoder.hpp"
#include "emfend/encoders/visual.hpp"
#include "emfend/fusion/co_attention.hpp"
#include "emfend/model/config.hpp"
#include "emfend/model/prediction.hpp"

namespace emfend::model {

using numerics::Tensor;
using numerics::Var;

/// softmax(x_m W + b) as a 1 x 2 row.
Var classify(const Var& x_m, const Var& weight, const Var& bias);

/// -log p[label] with probabilities clamped to [1e-12, 1 - 1e-12].
double loss(const Prediction& p, int label);

/// Intermediate features of one forward pass.
struct ForwardTrace {
  Var x_t;
  Var x_ve;
  Var x_v;
  Var x_s;
  Var x_m;
  Var probs;
};

/// The full fusion classifier. Parameters live in an owned store whose
/// initial values are a function of the config (including its seed).
class EmFend {
 public:
  explicit EmFend(const ModelConfig& config);

  EmFend(const EmFend&) = delete;
  EmFend& operator=(const EmFend&) = delete;

  /// Class probabilities as a differentiable 1 x 2 row. `rng` non-null
  /// means training: dropout is active and draws from it.
  ForwardTrace trace(const corpus::NewsPost& post, numerics::Rng* rng = nullptr) const;
  Var forward(const corpus::NewsPost& post, numerics::Rng* rng = nullptr) const {
    return trace(post, rng).probs;
  }

  Prediction predict(const corpus::NewsPost& post) const;

  /// Weighted negative log-likelihood of the true label.
  Var loss(const corpus::NewsPost& post, numerics::Rng* rng = nullptr) const;

  const ModelConfig& config() const { return config_; }
  numerics::ParameterStore& parameters() { return *store_; }
  const numerics::ParameterStore& parameters() const { return *store_; }
  const encoders::TextEncoder& encoder() const { return *encoder_; }

 private:
  Var text_stream(const corpus::NewsPost& post, numerics::Mask& mask, numerics::Rng* rng) const;

  ModelConfig config_;
  std::unique_ptr<numerics::ParameterStore> store_;
  std::unique_ptr<encoders::TextEncoder> encoder_;
  std::unique_ptr<encoders::VisualProjector> visual_;
  std::unique_ptr<fusion::Fusion> fusion_;
  Var head_w_;
  Var head_b_;
};

}  // namespace emfend::model
