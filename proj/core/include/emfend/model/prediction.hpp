#pragma once

#include <cstddef>
#include <string>

namespace emfend::model {

/// Class probabilities for one post. Label 0 is real, 1 is fake.
struct Prediction {
  std::string id;
  double p_real = 0.5;
  double p_fake = 0.5;

  int label() const { return p_fake > p_real ? 1 : 0; }
};

}  // namespace emfend::model
