#pragma once

#include <cstddef>
#include <vector>

#include "emfend/numerics/tensor.hpp"

namespace emfend::numerics {

using Mask = std::vector<bool>;

/// Numerically stable softmax along `axis` (max-subtracted).
Tensor softmax(const Tensor& x, std::size_t axis);

/// Normalises every slice along `axis` to zero mean and unit variance, then
/// applies `gain` and `bias` (both with the extent of `axis`).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, std::size_t axis,
                  double eps);

/// softmax(Q K^T / sqrt(d_k)) V with masked keys receiving zero weight.
/// An empty mask means every key is valid.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            const Mask& key_mask = {});

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

}  // namespace emfend::numerics
