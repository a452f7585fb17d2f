#include "emfend/numerics/autodiff.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "emfend/error.hpp"

namespace emfend::numerics {

Tensor& Node::grad_buffer() {
  if (grad.empty()) grad = Tensor::zeros_like(value);
  return grad;
}

Var Var::constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var Var::leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

Tensor Var::grad() const {
  if (node_->grad.empty()) return Tensor::zeros_like(node_->value);
  return node_->grad;
}

Var make_node(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> propagate) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced by primitive, shape " + shape_string(value.shape()));
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  for (const auto& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node());
    node->propagate = std::move(propagate);
  }
  return Var(std::move(node));
}

void backward(const Var& loss) {
  if (loss.value().size() != 1) {
    throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                shape_string(loss.shape()));
  }
  if (!std::isfinite(loss.value().item())) throw NumericError("backward: loss is not finite");
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients from any earlier sweep over the same graph are stale.
  for (Node* node : order) {
    if (node->propagate) node->grad = Tensor();
  }
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->propagate && !node->grad.empty()) node->propagate(*node);
  }
}

}  // namespace emfend::numerics
