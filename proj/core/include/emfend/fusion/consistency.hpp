#pragma once

#include <functional>
#include <span>
#include <vector>

#include "emfend/corpus/news_post.hpp"
#include "emfend/numerics/autodiff.hpp"

namespace emfend::fusion {

using numerics::Var;

/// Maps an entity mention to a 1 x d embedding row.
using EntityEmbedder = std::function<Var(const corpus::EntityMention&)>;

/// max over textual t of sum over visual v of rho(v) * cos(t, v), as a
/// scalar. Exactly 1 when either side is empty. Confidences must lie in
/// (0, 1].
Var entity_similarity(std::span<const Var> textual, std::span<const Var> visual,
                      std::span<const double> confidence);

Var entity_similarity(const std::vector<corpus::EntityMention>& textual,
                      const std::vector<corpus::EntityMention>& visual,
                      const EntityEmbedder& embed);

struct ConsistencyOptions {
  /// Clamp each component to [-1, 1].
  bool clamp = true;
  /// Let gradients reach the embeddings; otherwise the result is a constant.
  bool differentiable = false;
};

/// (person, location, context) similarities as a 1 x 3 row.
Var consistency_vector(const corpus::NewsPost& post, const EntityEmbedder& embed,
                       const ConsistencyOptions& options = {});

/// Concatenation (x_t, x_ve, x_v, x_s) into a 1 x (3d + 3) row.
/// Throws std::invalid_argument on any width mismatch.
Var concat_multimodal(const Var& x_t, const Var& x_ve, const Var& x_v, const Var& x_s);

}  // namespace emfend::fusion
