#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "emfend/numerics/autodiff.hpp"
#include "emfend/numerics/random.hpp"

namespace emfend::numerics {

/// Named trainable tensors. Iteration is sorted by name, so anything that
/// walks the store (optimizer, checkpoint, gradient check) is deterministic.
class ParameterStore {
 public:
  struct Entry {
    Var var;
    bool trainable = true;
  };

  /// Registers a new parameter; duplicate names are rejected.
  Var add(const std::string& name, Tensor init, bool trainable = true);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const Var& get(const std::string& name) const;
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor grad(const std::string& name) const;

  void set_trainable(const std::string& name, bool trainable);
  bool trainable(const std::string& name) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

  void zero_grad();

  using Snapshot = std::map<std::string, Tensor>;
  Snapshot snapshot() const;
  void restore(const Snapshot& values);

  /// Rounds every value to the nearest 32-bit float.
  void quantize_to_float32();

 private:
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  std::map<std::string, Entry> entries_;
};

/// uniform(+-sqrt(6 / (fan_in + fan_out))) over `shape`.
Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Zeroes every registered gradient, then runs the reverse sweep from `loss`.
/// Identical forwards therefore give identical gradients.
void backward(const Var& loss, ParameterStore& store);

}  // namespace emfend::numerics
