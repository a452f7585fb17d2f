#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emfend/numerics/attention_block.hpp"

namespace emfend::fusion {

using numerics::Mask;
using numerics::Tensor;
using numerics::Var;

struct MCTConfig {
  std::size_t width = 256;
  std::size_t heads = 8;
  std::size_t ffn_dim = 512;
  /// Stacked co-attention layers per stage.
  std::size_t layers = 1;
  double layer_norm_eps = 1e-5;
  bool layer_norm = true;
};

struct MCTOutput {
  Var stream_a;  // a enhanced by b, n_a x d
  Var stream_b;  // b enhanced by a, n_b x d
};

/// One co-attention layer: two attention blocks, each taking queries from
/// its own stream and keys/values from the other. Both directions read the
/// layer inputs, not each other's outputs.
class MCTLayer {
 public:
  MCTLayer(numerics::ParameterStore& store, const std::string& prefix, const MCTConfig& config,
           numerics::Rng& init_rng);

  MCTOutput forward(const Var& a, const Mask& a_mask, const Var& b, const Mask& b_mask,
                    double dropout_rate = 0.0, numerics::Rng* rng = nullptr) const;

  const numerics::AttentionBlock& block_a() const { return block_a_; }
  const numerics::AttentionBlock& block_b() const { return block_b_; }

 private:
  numerics::AttentionBlock block_a_;
  numerics::AttentionBlock block_b_;
};

/// `config.layers` MCT layers applied in sequence. Parameters are named
/// prefix.layerN.{a,b}.*.
class MCTStage {
 public:
  MCTStage(numerics::ParameterStore& store, const std::string& prefix, const MCTConfig& config,
           numerics::Rng& init_rng);

  MCTOutput forward(const Var& a, const Mask& a_mask, const Var& b, const Mask& b_mask,
                    double dropout_rate = 0.0, numerics::Rng* rng = nullptr) const;

 private:
  std::vector<MCTLayer> layers_;
};

/// Mean over unmasked rows as a 1 x d row; an empty mask means all rows.
/// Throws std::invalid_argument when every row is masked.
Var masked_mean(const Var& x, const Mask& mask);

struct FusionConfig {
  MCTConfig mct;
  bool use_visual_entities = true;
  bool use_coattention_ve = true;
  bool use_coattention_vf = true;
};

struct FusedFeatures {
  Var x_t;
  Var x_ve;
  Var x_v;
};

/// Two-stage fusion. Stage one co-attends text and visual entities, stage
/// two co-attends the entity-enhanced text with the image regions. A
/// disabled stage is replaced by mean pooling of its inputs. Without visual
/// entities x_ve is a zero row and the text skips stage one.
class Fusion {
 public:
  Fusion(numerics::ParameterStore& store, const FusionConfig& config, numerics::Rng& init_rng);

  /// `entities` is the stacked entity stream (n_ve x d); absent or empty
  /// means the learned sentinel row stands in. Image regions carry no mask.
  FusedFeatures fuse(const Var& text, const Mask& text_mask, const std::optional<Var>& entities,
                     const Var& regions, double dropout_rate = 0.0,
                     numerics::Rng* rng = nullptr) const;

  const FusionConfig& config() const { return config_; }

 private:
  FusionConfig config_;
  std::optional<MCTStage> stage_ve_;
  std::optional<MCTStage> stage_vf_;
  Var sentinel_;
};

}  // namespace emfend::fusion
