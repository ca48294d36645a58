#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <vector>

#include "ppgt/tensor.hpp"

namespace ppgt {

/// Square matrix of exact rationals, always kept in lowest terms.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  explicit RationalMatrix(std::size_t n);

  static RationalMatrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  const mpq_class& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, mpq_class value);

  RationalMatrix operator*(const RationalMatrix& rhs) const;
  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
    return a.n_ == b.n_ && a.entries_ == b.entries_;
  }

  mpq_class row_sum(std::size_t i) const;
  /// Nearest-double image as an [n, n] tensor.
  Tensor to_tensor() const;

 private:
  std::size_t n_ = 0;
  std::vector<mpq_class> entries_;
};

}  // namespace ppgt
