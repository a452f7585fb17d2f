#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "emfend/numerics/tensor.hpp"

namespace emfend::numerics {

/// A recorded value in the computation graph. Leaves carry no inputs;
/// interior nodes carry a closure that pushes their gradient to inputs.
struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> propagate;

  /// Gradient storage, zero-initialised on first use.
  Tensor& grad_buffer();
};

/// Handle to a graph node. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Var constant(Tensor value);
  static Var leaf(Tensor value, bool requires_grad);

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }

  /// Gradient accumulated by the last backward pass; zeros when none reached it.
  Tensor grad() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Builds an interior node. Fails with NumericError when `value` is not
/// finite. When no input requires a gradient the node is a constant.
Var make_node(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> propagate);

/// Reverse sweep from a finite scalar. Gradients accumulate into every
/// reachable leaf that requires one.
void backward(const Var& loss);

}  // namespace emfend::numerics
