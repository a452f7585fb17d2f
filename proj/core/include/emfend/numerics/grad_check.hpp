#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "emfend/numerics/parameter_store.hpp"

namespace emfend::numerics {

struct GradCheckEntry {
  std::string name;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  double tolerance = 0.0;
  std::vector<GradCheckEntry> entries;

  bool all_passed() const;
  double worst_error() const;
  void print(std::ostream& out) const;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double epsilon = 1e-5;
  /// Called between the analytic sweep and the comparison; tests use it to
  /// inject faults into the computed gradients.
  std::function<void(ParameterStore&)> after_backward;
};

/// Compares reverse-mode gradients of `forward` against central finite
/// differences for every trainable coordinate. Relative error is
/// |a - n| / max(|a|, |n|, 1e-8). Throws NumericError when two baseline
/// evaluations of `forward` disagree.
GradCheckReport grad_check(const std::function<Var()>& forward, ParameterStore& params,
                           const GradCheckOptions& options = {});

}  // namespace emfend::numerics
