#include "ppgt/rational.hpp"

namespace ppgt {

RationalMatrix::RationalMatrix(std::size_t n) : n_(n), entries_(n * n) {}

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.entries_[i * n + i] = 1;
  return m;
}

void RationalMatrix::set(std::size_t i, std::size_t j, mpq_class value) {
  value.canonicalize();
  entries_[i * n_ + j] = std::move(value);
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& rhs) const {
  if (n_ != rhs.n_) throw ShapeError("rational matmul: size mismatch");
  RationalMatrix out(n_);
  mpq_class acc;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      acc = 0;
      for (std::size_t k = 0; k < n_; ++k) {
        const auto& a = entries_[i * n_ + k];
        if (sgn(a) == 0) continue;
        acc += a * rhs.entries_[k * n_ + j];
      }
      out.entries_[i * n_ + j] = acc;
    }
  }
  return out;
}

mpq_class RationalMatrix::row_sum(std::size_t i) const {
  mpq_class s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += entries_[i * n_ + j];
  return s;
}

Tensor RationalMatrix::to_tensor() const {
  std::vector<double> data(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) data[i] = entries_[i].get_d();
  return Tensor({n_, n_}, std::move(data));
}

}  // namespace ppgt
