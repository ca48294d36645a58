#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ppgt/tensor.hpp"

// Differentiable primitives. Every function records a backward rule on the
// active tape when one of its inputs requires grad.
//
// Broadcasting in binary elementwise ops: the shapes must be equal, or one
// shape must be a trailing suffix of the other (a rank-0 scalar is a suffix
// of every shape). Anything else is a ShapeError naming both shapes.
namespace ppgt::ops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);
Tensor neg(const Tensor& x);

Tensor relu(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor square(const Tensor& x);

/// max(x, floor) elementwise; entries that end up exactly 0 become 1 so the
/// result is always safe as a divisor (the matching numerator is 0 there).
/// Gradient passes through only where x > floor.
Tensor safe_denominator(const Tensor& x, double floor);

/// [n,k] x [k,m] -> [n,m]
Tensor matmul(const Tensor& a, const Tensor& b);
/// [n,m] -> [m,n]
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

/// Sum over one axis; the axis is removed from the shape.
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
/// Sum of all entries as a rank-0 scalar.
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

/// Euclidean norm over the last axis, which is removed. The gradient at the
/// zero vector is defined as zero.
Tensor l2norm_last(const Tensor& x);

/// Appends a trailing axis of extent `n`, repeating each value.
Tensor expand_last(const Tensor& x, std::size_t n);
Tensor concat_last(std::span<const Tensor> parts);
/// Columns [begin, end) of the last axis.
Tensor slice_last(const Tensor& x, std::size_t begin, std::size_t end);

/// Rows of x along axis 0, in the order given by `index`.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index);
/// out[s] = sum of values[i] over all i with segments[i] == s (axis 0).
Tensor segment_sum(const Tensor& values, std::span<const std::size_t> segments,
                   std::size_t num_segments);

/// Softmax over the last axis with row-max subtraction. `mask`, when given,
/// is a constant additive bias of the same shape; -inf excludes an entry.
/// A row with every entry excluded raises Error("empty attention row").
Tensor softmax_rows(const Tensor& z, const std::optional<Tensor>& mask = std::nullopt);

/// Inverted dropout with keep-probability 1 - rate; `keep` holds one 0/1 per
/// entry, drawn by the caller.
Tensor dropout(const Tensor& x, double rate, std::span<const unsigned char> keep);

}  // namespace ppgt::ops

namespace ppgt {

inline Tensor operator+(const Tensor& a, const Tensor& b) { return ops::add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return ops::sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return ops::mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return ops::div(a, b); }
inline Tensor operator-(const Tensor& x) { return ops::neg(x); }
inline Tensor operator*(const Tensor& x, double c) { return ops::scale(x, c); }
inline Tensor operator*(double c, const Tensor& x) { return ops::scale(x, c); }
inline Tensor operator/(const Tensor& x, double c) { return ops::scale(x, 1.0 / c); }
inline Tensor operator+(const Tensor& x, double c) { return ops::add_scalar(x, c); }
inline Tensor operator-(const Tensor& x, double c) { return ops::add_scalar(x, -c); }

}  // namespace ppgt
