#include "emfend/numerics/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace emfend::numerics {

void adam_step(ParameterStore& params, AdamState& state) {
  if (!(state.lr > 0.0)) throw std::invalid_argument("adam: learning rate must be positive");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  for (const auto& [name, entry] : params.entries()) {
    if (!entry.trainable) continue;
    Tensor& value = entry.var.node()->value;
    const Tensor& grad = entry.var.node()->grad;
    auto [m_it, m_new] = state.first_moment.try_emplace(name, Tensor::zeros_like(value));
    auto [v_it, v_new] = state.second_moment.try_emplace(name, Tensor::zeros_like(value));
    Tensor& m = m_it->second;
    Tensor& v = v_it->second;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace emfend::numerics
