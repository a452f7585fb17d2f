#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "emfend/numerics/parameter_store.hpp"

namespace emfend::numerics {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

/// One bias-corrected Adam update over the trainable entries of `params`.
/// Frozen entries are left untouched. Throws std::invalid_argument if lr <= 0.
void adam_step(ParameterStore& params, AdamState& state);

}  // namespace emfend::numerics
