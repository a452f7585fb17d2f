#include "emfend/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace emfend::eval {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void check_label(int label) {
  if (label != 0 && label != 1) {
    throw std::invalid_argument("metrics: label " + std::to_string(label) + " is not 0 or 1");
  }
}

}  // namespace

Metrics confusion_metrics(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) {
    throw std::invalid_argument("confusion_metrics: " + std::to_string(predicted.size()) +
                                " predictions for " + std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw std::invalid_argument("confusion_metrics: no predictions");
  Metrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_label(predicted[i]);
    check_label(labels[i]);
    if (predicted[i] == 1) {
      labels[i] == 1 ? ++m.tp : ++m.fp;
    } else {
      labels[i] == 0 ? ++m.tn : ++m.fn;
    }
  }
  const auto tp = static_cast<double>(m.tp);
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  m.precision = ratio(tp, tp + static_cast<double>(m.fp));
  m.recall = ratio(tp, tp + static_cast<double>(m.fn));
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

Metrics confusion_metrics(std::span<const model::Prediction> predictions,
                          std::span<const int> labels) {
  std::vector<int> predicted;
  predicted.reserve(predictions.size());
  for (const auto& p : predictions) predicted.push_back(p.label());
  return confusion_metrics(predicted, labels);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("roc_curve: score and label counts differ");
  }
  std::size_t positives = 0;
  for (int y : labels) {
    check_label(y);
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("roc_curve: both classes must be present");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> points{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      labels[order[i]] == 1 ? ++tp : ++fp;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                      static_cast<double>(tp) / static_cast<double>(positives), threshold});
  }
  return points;
}

double auc(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

std::string metrics_json(const Metrics& m, int indent) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  return j.dump(indent);
}

void write_metrics_table(std::ostream& out, const Metrics& m) {
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %8s\n", "metric", "value");
  out << line;
  const std::pair<const char*, double> rows[] = {
      {"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  for (const auto& [name, value] : rows) {
    std::snprintf(line, sizeof line, "%-10s %8.4f\n", name, value);
    out << line;
  }
  std::snprintf(line, sizeof line, "tp=%zu fp=%zu tn=%zu fn=%zu\n", m.tp, m.fp, m.tn, m.fn);
  out << line;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> points) {
  out << "fpr,tpr,threshold\n";
  char line[96];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.fpr, p.tpr, p.threshold);
    out << line;
  }
}

}  // namespace emfend::eval
