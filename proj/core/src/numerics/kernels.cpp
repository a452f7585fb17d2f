#include "emfend/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emfend/error.hpp"
#include "emfend/numerics/ops.hpp"

namespace emfend::numerics {

namespace {

struct AxisLayout {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisLayout layout_for(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for shape " +
                                shape_string(shape));
  }
  AxisLayout l;
  for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
  l.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisLayout l = layout_for(x.shape(), axis);
  if (!x.all_finite()) throw NumericError("softmax: non-finite input");
  Tensor out(x.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.extent * l.inner + in;
      double peak = x[base];
      for (std::size_t j = 1; j < l.extent; ++j) peak = std::max(peak, x[base + j * l.inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < l.extent; ++j) {
        const double e = std::exp(x[base + j * l.inner] - peak);
        out[base + j * l.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < l.extent; ++j) out[base + j * l.inner] /= total;
    }
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, std::size_t axis,
                  double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("layer_norm: eps must be positive");
  const AxisLayout l = layout_for(x.shape(), axis);
  if (gain.size() != l.extent || bias.size() != l.extent) {
    throw std::invalid_argument("layer_norm: gain/bias extent must be " + std::to_string(l.extent));
  }
  Tensor out(x.shape());
  const auto n = static_cast<double>(l.extent);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.extent * l.inner + in;
      double mean = 0.0;
      for (std::size_t j = 0; j < l.extent; ++j) mean += x[base + j * l.inner];
      mean /= n;
      double var = 0.0;
      for (std::size_t j = 0; j < l.extent; ++j) {
        const double c = x[base + j * l.inner] - mean;
        var += c * c;
      }
      var /= n;
      const double inv_std = 1.0 / std::sqrt(var + eps);
      for (std::size_t j = 0; j < l.extent; ++j) {
        const std::size_t idx = base + j * l.inner;
        out[idx] = gain[j] * (x[idx] - mean) * inv_std + bias[j];
      }
    }
  }
  return out;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            const Mask& key_mask) {
  return ops::scaled_dot_attention(Var::constant(q), Var::constant(k), Var::constant(v), key_mask)
      .value();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  if (b.rows() != k) {
    throw std::invalid_argument("matmul: inner extents differ, " + shape_string(a.shape()) + " x " +
                                shape_string(b.shape()));
  }
  const std::size_t n = b.cols();
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* out_row = out.data().data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* b_row = b.data().data() + p * n;
      for (std::size_t j = 0; j < n; ++j) out_row[j] += aip * b_row[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Tensor out(Shape{n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  }
  return out;
}

}  // namespace emfend::numerics
