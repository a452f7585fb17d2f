#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "emfend/numerics/autodiff.hpp"
#include "emfend/numerics/kernels.hpp"
#include "emfend/numerics/random.hpp"

// Differentiable primitives. Matrices are rank-2; feature vectors are
// carried as 1 x n rows.
namespace emfend::numerics::ops {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);

/// Adds a 1 x n (or rank-1 n) bias to every row of an m x n matrix.
Var add_row_bias(const Var& x, const Var& bias);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var relu(const Var& x);

/// x W + b, with W stored fan_in x fan_out.
Var linear(const Var& x, const Var& weight, const Var& bias);

/// Softmax along the last axis of a matrix.
Var softmax_rows(const Var& x);

/// Row-wise softmax where columns with a false mask entry get zero weight.
/// Every row must keep at least one column.
Var masked_softmax_rows(const Var& x, const Mask& column_mask);

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps);

/// Inverted dropout; identity when rate is 0.
Var dropout(const Var& x, double rate, Rng& rng);

/// Attention over keys: softmax(Q K^T / sqrt(d_k)) V. When `rng` is
/// non-null and `dropout_rate` > 0 the attention weights are dropped out.
Var scaled_dot_attention(const Var& q, const Var& k, const Var& v, const Mask& key_mask,
                         double dropout_rate = 0.0, Rng* rng = nullptr);

Var slice_cols(const Var& x, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);

/// Rows of `table` picked by `ids`; gradients scatter-add back.
Var gather_rows(const Var& table, std::span<const std::size_t> ids);

/// Mean of the rows whose mask entry is true, as a 1 x n row. An empty
/// mask selects every row.
Var masked_mean_rows(const Var& x, const Mask& row_mask);

Var sum(const Var& x);

/// Cosine similarity of two equally shaped vectors as a scalar. A zero
/// vector on either side yields 0 with zero gradient.
Var cosine(const Var& a, const Var& b);

/// Largest of several scalars (first on ties); gradient flows to the winner.
Var max_of(std::span<const Var> scalars);

Var clamp(const Var& x, double lo, double hi);

/// -log p[label] with p clamped to [1e-12, 1 - 1e-12]; `probs` is 1 x C.
Var negative_log_likelihood(const Var& probs, std::size_t label);

}  // namespace emfend::numerics::ops
