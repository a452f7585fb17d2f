#include "emfend/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace emfend::numerics::ops {

namespace {

// Gradient buffer of input `i`, or nullptr when that input is constant.
Tensor* input_grad(Node& self, std::size_t i) {
  Node& in = *self.inputs[i];
  return in.requires_grad ? &in.grad_buffer() : nullptr;
}

const Tensor& input_value(const Node& self, std::size_t i) { return self.inputs[i]->value; }

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                                shape_string(b.shape()) + " differ");
  }
}

void require_matrix(const Var& x, const char* op) {
  if (x.value().rank() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a matrix, got shape " +
                                shape_string(x.shape()));
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_node(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor* g = input_grad(self, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return make_node(std::move(out), {a, b}, [](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (Tensor* g = input_grad(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return make_node(std::move(out), {a, b}, [](Node& self) {
    const Tensor& av = input_value(self, 0);
    const Tensor& bv = input_value(self, 1);
    if (Tensor* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * bv[i];
    }
    if (Tensor* g = input_grad(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * av[i];
    }
  });
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.data()) v *= factor;
  return make_node(std::move(out), {a}, [factor](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * factor;
    }
  });
}

Var add_row_bias(const Var& x, const Var& bias) {
  require_matrix(x, "add_row_bias");
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (bias.value().size() != n) {
    throw std::invalid_argument("add_row_bias: bias of shape " + shape_string(bias.shape()) +
                                " does not match width " + std::to_string(n));
  }
  Tensor out = x.value();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias.value()[j];
  }
  return make_node(std::move(out), {x, bias}, [m, n](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (Tensor* g = input_grad(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*g)[j] += self.grad[i * n + j];
      }
    }
  });
}

Var matmul(const Var& a, const Var& b) {
  Tensor out = numerics::matmul(a.value(), b.value());
  return make_node(std::move(out), {a, b}, [](Node& self) {
    const Tensor& av = input_value(self, 0);
    const Tensor& bv = input_value(self, 1);
    const std::size_t m = av.rows();
    const std::size_t k = av.cols();
    const std::size_t n = bv.cols();
    const Tensor& g = self.grad;
    if (Tensor* ga = input_grad(self, 0)) {
      // dA = G B^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
          (*ga)[i * k + p] += acc;
        }
      }
    }
    if (Tensor* gb = input_grad(self, 1)) {
      // dB = A^T G
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += aip * g[i * n + j];
        }
      }
    }
  });
}

Var transpose(const Var& a) {
  Tensor out = numerics::transpose(a.value());
  return make_node(std::move(out), {a}, [](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      const Tensor back = numerics::transpose(self.grad);
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += back[i];
    }
  });
}

Var relu(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  return make_node(std::move(out), {x}, [](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      const Tensor& xv = input_value(self, 0);
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (xv[i] > 0.0) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  return add_row_bias(matmul(x, weight), bias);
}

namespace {

// Shared backward for (masked) row softmax: dx = y * (g - <g, y>).
void softmax_rows_backward(Node& self) {
  Tensor* g = input_grad(self, 0);
  if (!g) return;
  const Tensor& y = self.value;
  const std::size_t m = y.rows();
  const std::size_t n = y.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < n; ++j) dot += self.grad[i * n + j] * y[i * n + j];
    for (std::size_t j = 0; j < n; ++j) {
      (*g)[i * n + j] += y[i * n + j] * (self.grad[i * n + j] - dot);
    }
  }
}

}  // namespace

Var softmax_rows(const Var& x) {
  require_matrix(x, "softmax_rows");
  return make_node(numerics::softmax(x.value(), 1), {x}, softmax_rows_backward);
}

Var masked_softmax_rows(const Var& x, const Mask& column_mask) {
  require_matrix(x, "masked_softmax_rows");
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (column_mask.empty()) return softmax_rows(x);
  if (column_mask.size() != n) {
    throw std::invalid_argument("masked_softmax_rows: mask length " +
                                std::to_string(column_mask.size()) + " != " + std::to_string(n));
  }
  if (std::none_of(column_mask.begin(), column_mask.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("attention: every key is masked");
  }
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double peak = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (column_mask[j]) peak = std::max(peak, x.value()[i * n + j]);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!column_mask[j]) continue;
      const double e = std::exp(x.value()[i * n + j] - peak);
      out[i * n + j] = e;
      total += e;
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= total;
  }
  return make_node(std::move(out), {x}, softmax_rows_backward);
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps) {
  require_matrix(x, "layer_norm_rows");
  if (!(eps > 0.0)) throw std::invalid_argument("layer_norm: eps must be positive");
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (gain.value().size() != n || bias.value().size() != n) {
    throw std::invalid_argument("layer_norm: gain/bias extent must be " + std::to_string(n));
  }
  Tensor normalized(Shape{m, n});
  std::vector<double> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = x.value().row(i);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) normalized[i * n + j] = (row[j] - mean) * inv_std[i];
  }
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] = gain.value()[j] * normalized[i * n + j] + bias.value()[j];
    }
  }
  return make_node(
      std::move(out), {x, gain, bias},
      [m, n, normalized = std::move(normalized), inv_std = std::move(inv_std)](Node& self) {
        const Tensor& gv = input_value(self, 1);
        const Tensor& g = self.grad;
        if (Tensor* gg = input_grad(self, 1)) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) (*gg)[j] += g[i * n + j] * normalized[i * n + j];
          }
        }
        if (Tensor* gb = input_grad(self, 2)) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) (*gb)[j] += g[i * n + j];
          }
        }
        if (Tensor* gx = input_grad(self, 0)) {
          const auto nd = static_cast<double>(n);
          for (std::size_t i = 0; i < m; ++i) {
            double mean_d = 0.0;
            double mean_dx = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g[i * n + j] * gv[j];
              mean_d += d;
              mean_dx += d * normalized[i * n + j];
            }
            mean_d /= nd;
            mean_dx /= nd;
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g[i * n + j] * gv[j];
              (*gx)[i * n + j] += inv_std[i] * (d - mean_d - normalized[i * n + j] * mean_dx);
            }
          }
        }
      });
}

Var dropout(const Var& x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0, 1)");
  if (rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factors(x.value().size());
  for (auto& f : factors) f = rng.bernoulli(rate) ? 0.0 : keep_scale;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i];
  return make_node(std::move(out), {x}, [factors = std::move(factors)](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * factors[i];
    }
  });
}

Var scaled_dot_attention(const Var& q, const Var& k, const Var& v, const Mask& key_mask,
                         double dropout_rate, Rng* rng) {
  require_matrix(q, "attention");
  require_matrix(k, "attention");
  require_matrix(v, "attention");
  if (q.cols() != k.cols()) throw std::invalid_argument("attention: query and key widths differ");
  if (k.rows() != v.rows()) throw std::invalid_argument("attention: key and value counts differ");
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(k.cols()));
  Var weights = masked_softmax_rows(scale(matmul(q, transpose(k)), inv_sqrt_dk), key_mask);
  if (rng != nullptr && dropout_rate > 0.0) weights = dropout(weights, dropout_rate, *rng);
  return matmul(weights, v);
}

Var slice_cols(const Var& x, std::size_t start, std::size_t count) {
  require_matrix(x, "slice_cols");
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (count == 0 || start + count > n) throw std::invalid_argument("slice_cols: range out of bounds");
  Tensor out(Shape{m, count});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = x.value()[i * n + start + j];
  }
  return make_node(std::move(out), {x}, [m, n, start, count](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < count; ++j) (*g)[i * n + start + j] += self.grad[i * count + j];
      }
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: nothing to concatenate");
  const std::size_t m = parts[0].rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    if (p.rows() != m) throw std::invalid_argument("concat_cols: row counts differ");
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out(Shape{m, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < widths[k]; ++j) {
        out[i * total + offset + j] = parts[k].value()[i * widths[k] + j];
      }
    }
    offset += widths[k];
  }
  return make_node(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                   [m, total, widths = std::move(widths)](Node& self) {
                     std::size_t offset = 0;
                     for (std::size_t k = 0; k < widths.size(); ++k) {
                       if (Tensor* g = input_grad(self, k)) {
                         for (std::size_t i = 0; i < m; ++i) {
                           for (std::size_t j = 0; j < widths[k]; ++j) {
                             (*g)[i * widths[k] + j] += self.grad[i * total + offset + j];
                           }
                         }
                       }
                       offset += widths[k];
                     }
                   });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: nothing to concatenate");
  const std::size_t n = parts[0].cols();
  std::vector<double> data;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != n) throw std::invalid_argument("concat_rows: widths differ");
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
    rows += p.rows();
  }
  return make_node(Tensor(Shape{rows, n}, std::move(data)),
                   std::vector<Var>(parts.begin(), parts.end()), [](Node& self) {
                     std::size_t offset = 0;
                     for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                       const std::size_t len = self.inputs[k]->value.size();
                       if (Tensor* g = input_grad(self, k)) {
                         for (std::size_t i = 0; i < len; ++i) (*g)[i] += self.grad[offset + i];
                       }
                       offset += len;
                     }
                   });
}

Var gather_rows(const Var& table, std::span<const std::size_t> ids) {
  require_matrix(table, "gather_rows");
  if (ids.empty()) throw std::invalid_argument("gather_rows: no ids");
  const std::size_t vocab = table.rows();
  const std::size_t n = table.cols();
  Tensor out(Shape{ids.size(), n});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab) throw std::out_of_range("gather_rows: id " + std::to_string(ids[i]));
    const auto src = table.value().row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return make_node(std::move(out), {table},
                   [n, ids = std::vector<std::size_t>(ids.begin(), ids.end())](Node& self) {
                     if (Tensor* g = input_grad(self, 0)) {
                       for (std::size_t i = 0; i < ids.size(); ++i) {
                         for (std::size_t j = 0; j < n; ++j) {
                           (*g)[ids[i] * n + j] += self.grad[i * n + j];
                         }
                       }
                     }
                   });
}

Var masked_mean_rows(const Var& x, const Mask& row_mask) {
  require_matrix(x, "masked_mean");
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  Mask mask = row_mask.empty() ? Mask(m, true) : row_mask;
  if (mask.size() != m) {
    throw std::invalid_argument("masked_mean: mask length " + std::to_string(mask.size()) +
                                " != rows " + std::to_string(m));
  }
  const auto count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  if (count == 0) throw std::invalid_argument("masked_mean: every row is masked");
  Tensor out(Shape{1, n});
  for (std::size_t i = 0; i < m; ++i) {
    if (!mask[i]) continue;
    for (std::size_t j = 0; j < n; ++j) out[j] += x.value()[i * n + j];
  }
  const auto denom = static_cast<double>(count);
  for (auto& v : out.data()) v /= denom;
  const double inv = 1.0 / denom;
  return make_node(std::move(out), {x}, [m, n, inv, mask = std::move(mask)](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        if (!mask[i]) continue;
        for (std::size_t j = 0; j < n; ++j) (*g)[i * n + j] += self.grad[j] * inv;
      }
    }
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return make_node(Tensor::scalar(total), {x}, [](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      for (auto& v : g->data()) v += self.grad[0];
    }
  });
}

Var cosine(const Var& a, const Var& b) {
  if (a.value().size() != b.value().size()) throw std::invalid_argument("cosine: sizes differ");
  const auto& av = a.value();
  const auto& bv = b.value();
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    dot += av[i] * bv[i];
    na2 += av[i] * av[i];
    nb2 += bv[i] * bv[i];
  }
  const double na = std::sqrt(na2);
  const double nb = std::sqrt(nb2);
  const bool degenerate = na == 0.0 || nb == 0.0;
  const double c = degenerate ? 0.0 : dot / (na * nb);
  return make_node(Tensor::scalar(c), {a, b}, [degenerate, na, nb, c](Node& self) {
    if (degenerate) return;
    const Tensor& av = input_value(self, 0);
    const Tensor& bv = input_value(self, 1);
    const double g = self.grad[0];
    if (Tensor* ga = input_grad(self, 0)) {
      for (std::size_t i = 0; i < ga->size(); ++i) {
        (*ga)[i] += g * (bv[i] / (na * nb) - c * av[i] / (na * na));
      }
    }
    if (Tensor* gb = input_grad(self, 1)) {
      for (std::size_t i = 0; i < gb->size(); ++i) {
        (*gb)[i] += g * (av[i] / (na * nb) - c * bv[i] / (nb * nb));
      }
    }
  });
}

Var max_of(std::span<const Var> scalars) {
  if (scalars.empty()) throw std::invalid_argument("max_of: no operands");
  std::size_t best = 0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i].value().size() != 1) throw std::invalid_argument("max_of: operands must be scalars");
    if (scalars[i].value()[0] > scalars[best].value()[0]) best = i;
  }
  return make_node(Tensor::scalar(scalars[best].value()[0]),
                   std::vector<Var>(scalars.begin(), scalars.end()), [best](Node& self) {
                     if (Tensor* g = input_grad(self, best)) (*g)[0] += self.grad[0];
                   });
}

Var clamp(const Var& x, double lo, double hi) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = std::clamp(v, lo, hi);
  return make_node(std::move(out), {x}, [lo, hi](Node& self) {
    if (Tensor* g = input_grad(self, 0)) {
      const Tensor& xv = input_value(self, 0);
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (xv[i] >= lo && xv[i] <= hi) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var negative_log_likelihood(const Var& probs, std::size_t label) {
  constexpr double kFloor = 1e-12;
  if (label >= probs.value().size()) throw std::invalid_argument("nll: label out of range");
  const double p = probs.value()[label];
  const double clamped = std::clamp(p, kFloor, 1.0 - kFloor);
  return make_node(Tensor::scalar(-std::log(clamped)), {probs}, [label, p, clamped](Node& self) {
    if (p != clamped) return;
    if (Tensor* g = input_grad(self, 0)) (*g)[label] -= self.grad[0] / p;
  });
}

}  // namespace emfend::numerics::ops
