#include "emfend/model/train.hpp"

#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "emfend/numerics/adam.hpp"
#include "emfend/numerics/ops.hpp"

namespace emfend::model {

namespace ops = numerics::ops;

namespace {

constexpr std::uint64_t kTrainStream = 0x9e3779b97f4a7c15ULL;

std::vector<int> labels_of(std::span<const corpus::NewsPost> posts) {
  std::vector<int> labels;
  labels.reserve(posts.size());
  for (const auto& p : posts) labels.push_back(p.label);
  return labels;
}

}  // namespace

std::vector<Prediction> predict_all(const EmFend& model, std::span<const corpus::NewsPost> posts) {
  std::vector<Prediction> out;
  out.reserve(posts.size());
  for (const auto& post : posts) out.push_back(model.predict(post));
  return out;
}

eval::Metrics evaluate(const EmFend& model, std::span<const corpus::NewsPost> posts) {
  const std::vector<Prediction> predictions = predict_all(model, posts);
  return eval::confusion_metrics(predictions, labels_of(posts));
}

History fit(EmFend& model, std::span<const corpus::NewsPost> train,
            std::span<const corpus::NewsPost> validation, const FitOptions& options) {
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  const ModelConfig& config = model.config();
  numerics::ParameterStore& store = model.parameters();
  const std::span<const corpus::NewsPost> scored = validation.empty() ? train : validation;

  store.quantize_to_float32();
  numerics::AdamState adam;
  adam.lr = config.lr;
  numerics::Rng rng(config.seed ^ kTrainStream);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  History history;
  numerics::ParameterStore::Snapshot best = store.snapshot();
  double best_accuracy = -1.0;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Var batch_loss = model.loss(train[order[start]], &rng);
      for (std::size_t i = start + 1; i < end; ++i) {
        batch_loss = ops::add(batch_loss, model.loss(train[order[i]], &rng));
      }
      loss_total += batch_loss.value().item();
      numerics::backward(ops::scale(batch_loss, 1.0 / static_cast<double>(end - start)), store);
      numerics::adam_step(store, adam);
      store.quantize_to_float32();
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_total / static_cast<double>(train.size());
    record.validation = evaluate(model, scored);
    history.epochs.push_back(record);
    if (options.on_epoch) options.on_epoch(record);

    if (record.validation.accuracy > best_accuracy) {
      best_accuracy = record.validation.accuracy;
      history.best_epoch = epoch;
      best = store.snapshot();
      stale = 0;
    } else if (++stale > config.patience) {
      history.stopped_early = true;
      break;
    }
  }
  store.restore(best);
  return history;
}

void write_history_csv(std::ostream& out, const History& history) {
  out << "epoch,train_loss,val_acc,val_f1\n";
  char line[128];
  for (const auto& e : history.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss,
                  e.validation.accuracy, e.validation.f1);
    out << line;
  }
}

}  // namespace emfend::model
