#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "emfend/model/prediction.hpp"

namespace emfend::eval {

/// Accuracy plus precision, recall and F1 of the fake class (label 1).
/// Any ratio whose denominator is zero is reported as 0.
struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

Metrics confusion_metrics(std::span<const int> predicted, std::span<const int> labels);
Metrics confusion_metrics(std::span<const model::Prediction> predictions, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  /// Scores >= threshold are called fake. The leading (0,0) point carries +inf.
  double threshold = 0.0;
};

/// Threshold sweep over the distinct scores, highest first. Equal scores
/// move together. Starts at (0,0) and ends at (1,1). Throws
/// std::invalid_argument unless both classes are present.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under the curve.
double auc(std::span<const RocPoint> points);

std::string metrics_json(const Metrics& m, int indent = 2);
void write_metrics_table(std::ostream& out, const Metrics& m);
void write_roc_csv(std::ostream& out, std::span<const RocPoint> points);

}  // namespace emfend::eval
