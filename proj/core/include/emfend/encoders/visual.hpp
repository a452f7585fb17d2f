#pragma once

#include <cstdint>
#include <string_view>

#include "emfend/corpus/news_post.hpp"
#include "emfend/numerics/parameter_store.hpp"

namespace emfend::encoders {

/// Region features as a (rows, cols) tensor.
numerics::Tensor to_tensor(const corpus::FeatureMatrix& features);

/// Affine map of every region row into model width: regions W + b.
/// Throws DataError when the region width differs from W's fan-in.
numerics::Var project_visual(const corpus::FeatureMatrix& regions, const numerics::Var& weight,
                             const numerics::Var& bias);

/// Trainable projection standing in for the fine-tuned image backbone.
class VisualProjector {
 public:
  VisualProjector(numerics::ParameterStore& store, std::size_t visual_width, std::size_t width,
                  numerics::Rng& init_rng, bool trainable = true);

  numerics::Var project(const corpus::FeatureMatrix& regions) const {
    return project_visual(regions, weight_, bias_);
  }

 private:
  numerics::Var weight_;
  numerics::Var bias_;
};

/// Deterministic non-negative pseudo region features, keyed by a post
/// descriptor and a seed. Stands in for backbone output in fixtures.
corpus::FeatureMatrix synth_visual_features(std::string_view descriptor, std::uint64_t seed,
                                            std::size_t visual_width,
                                            std::size_t regions = corpus::kDefaultRegionCount);

}  // namespace emfend::encoders
