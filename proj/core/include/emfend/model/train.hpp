#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "emfend/eval/metrics.hpp"
#include "emfend/model/em_fend.hpp"

namespace emfend::model {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  eval::Metrics validation;
};

struct History {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

struct FitOptions {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Mini-batch Adam over `train` with a seeded epoch shuffle. Stops once
/// validation accuracy has not strictly improved for more than `patience`
/// epochs and leaves the model holding the best epoch's parameters.
/// Parameters are rounded to 32-bit after every step. An empty validation
/// set falls back to scoring the training set. Throws std::invalid_argument
/// when `train` is empty.
History fit(EmFend& model, std::span<const corpus::NewsPost> train,
            std::span<const corpus::NewsPost> validation, const FitOptions& options = {});

std::vector<Prediction> predict_all(const EmFend& model, std::span<const corpus::NewsPost> posts);
eval::Metrics evaluate(const EmFend& model, std::span<const corpus::NewsPost> posts);

/// `epoch,train_loss,val_acc,val_f1` with a header row.
void write_history_csv(std::ostream& out, const History& history);

}  // namespace emfend::model
