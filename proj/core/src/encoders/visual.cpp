#include "emfend/encoders/visual.hpp"

#include <cmath>

#include "emfend/corpus/text.hpp"
#include "emfend/error.hpp"
#include "emfend/numerics/ops.hpp"

namespace emfend::encoders {

numerics::Tensor to_tensor(const corpus::FeatureMatrix& features) {
  return numerics::Tensor(numerics::Shape{features.rows, features.cols},
                          std::vector<double>(features.values.begin(), features.values.end()));
}

numerics::Var project_visual(const corpus::FeatureMatrix& regions, const numerics::Var& weight,
                             const numerics::Var& bias) {
  if (regions.cols != weight.rows()) {
    throw DataError("visual regions have width " + std::to_string(regions.cols) +
                    ", projection expects " + std::to_string(weight.rows()));
  }
  return numerics::ops::linear(numerics::Var::constant(to_tensor(regions)), weight, bias);
}

VisualProjector::VisualProjector(numerics::ParameterStore& store, std::size_t visual_width,
                                 std::size_t width, numerics::Rng& init_rng, bool trainable) {
  weight_ = store.add("visual.proj.w",
                      numerics::glorot_uniform({visual_width, width}, visual_width, width, init_rng),
                      trainable);
  bias_ = store.add("visual.proj.b", numerics::Tensor(numerics::Shape{width}, 0.0), trainable);
}

corpus::FeatureMatrix synth_visual_features(std::string_view descriptor, std::uint64_t seed,
                                            std::size_t visual_width, std::size_t regions) {
  numerics::Rng rng(corpus::fnv1a64(descriptor, 0xcbf29ce484222325ULL ^ seed));
  corpus::FeatureMatrix out;
  out.rows = regions;
  out.cols = visual_width;
  out.values.reserve(regions * visual_width);
  for (std::size_t i = 0; i < regions * visual_width; ++i) {
    out.values.push_back(static_cast<float>(std::abs(rng.normal())));
  }
  return out;
}

}  // namespace emfend::encoders
