#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "midpool/autodiff/tensor.hpp"

namespace midpool::autodiff {

enum class UnaryKind { abs, tanh, sigmoid, relu, neg, square, identity };
enum class Axis { rows, cols };
enum class ReduceKind { sum, mean, max };

Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise map. abs and relu use subgradient 0 at 0.
Tensor apply_unary(const Tensor& x, UnaryKind kind);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Hadamard product of equal-shape tensors.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

/// x[n x c] + bias[1 x c], bias broadcast over rows.
Tensor add_row(const Tensor& x, const Tensor& bias);
/// x[n x c] scaled row-wise by column vector s[n x 1] (the broadcast gate product).
Tensor mul_col(const Tensor& x, const Tensor& s);

/// Output row j is input row idx[j]. Backward scatter-adds.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx);
/// Inverse of gather: zero [n x c] matrix with row idx[j] set to x row j.
Tensor scatter_rows(const Tensor& x, std::span<const std::size_t> idx, Eigen::Index n);

Tensor concat_cols(const std::vector<Tensor>& parts);
/// Columns [begin, end).
Tensor slice_cols(const Tensor& x, Eigen::Index begin, Eigen::Index end);

/// Axis::rows collapses rows (result 1 x cols); Axis::cols collapses columns
/// (result rows x 1). Max routes gradient to the lowest-index maximum.
Tensor reduce(const Tensor& x, Axis axis, ReduceKind kind);
Tensor sum_all(const Tensor& x);

/// Divides every column by its Euclidean norm. Throws NormalizationError on a
/// zero column.
Tensor normalize_columns(const Tensor& x);

/// -log softmax(logits)[label] for a 1 x C row, max-shifted.
Tensor cross_entropy(const Tensor& logits, std::size_t label);
/// Mean squared error over all entries; `target` is treated as a constant.
Tensor mse_loss(const Tensor& prediction, const Matrix& target);

/// Value-only softmax of a 1 x C row.
Matrix softmax_row(const Matrix& logits);

}  // namespace midpool::autodiff
