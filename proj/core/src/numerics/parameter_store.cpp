#include "emfend/numerics/parameter_store.hpp"

#include <cmath>
#include <stdexcept>

namespace emfend::numerics {

Var ParameterStore::add(const std::string& name, Tensor init, bool trainable) {
  if (contains(name)) throw std::invalid_argument("parameter '" + name + "' already registered");
  Var var = Var::leaf(std::move(init), trainable);
  entries_.emplace(name, Entry{var, trainable});
  return var;
}

ParameterStore::Entry& ParameterStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

const ParameterStore::Entry& ParameterStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

const Var& ParameterStore::get(const std::string& name) const { return entry(name).var; }

Tensor& ParameterStore::value(const std::string& name) { return entry(name).var.node()->value; }

const Tensor& ParameterStore::value(const std::string& name) const {
  return entry(name).var.value();
}

Tensor ParameterStore::grad(const std::string& name) const { return entry(name).var.grad(); }

void ParameterStore::set_trainable(const std::string& name, bool trainable) {
  Entry& e = entry(name);
  e.trainable = trainable;
  e.var.node()->requires_grad = trainable;
  if (!trainable) e.var.node()->grad = Tensor();
}

bool ParameterStore::trainable(const std::string& name) const { return entry(name).trainable; }

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [_, e] : entries_) total += e.var.value().size();
  return total;
}

void ParameterStore::zero_grad() {
  for (auto& [_, e] : entries_) {
    Node& node = *e.var.node();
    if (!node.grad.empty()) node.grad.fill(0.0);
  }
}

ParameterStore::Snapshot ParameterStore::snapshot() const {
  Snapshot out;
  for (const auto& [name, e] : entries_) out.emplace(name, e.var.value());
  return out;
}

void ParameterStore::restore(const Snapshot& values) {
  for (const auto& [name, tensor] : values) {
    Tensor& dst = value(name);
    if (dst.shape() != tensor.shape()) {
      throw std::invalid_argument("restore: shape mismatch for '" + name + "'");
    }
    dst = tensor;
  }
}

void ParameterStore::quantize_to_float32() {
  for (auto& [_, e] : entries_) {
    for (auto& v : e.var.node()->value.data()) v = static_cast<double>(static_cast<float>(v));
  }
}

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor out(std::move(shape));
  for (auto& v : out.data()) v = rng.uniform(-limit, limit);
  return out;
}

void backward(const Var& loss, ParameterStore& store) {
  store.zero_grad();
  numerics::backward(loss);
}

}  // namespace emfend::numerics
