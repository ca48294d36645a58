#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppgt {

using Shape = std::vector<std::size_t>;

std::size_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  bool leaf = true;
  std::vector<double> grad;
  std::uint64_t tape_id = 0;
  std::size_t node = 0;
};

}  // namespace detail

/// Dense row-major f64 array. Copies share storage; values are never mutated
/// after construction, so a Tensor behaves as an immutable value.
///
/// A tensor created with `parameter()` is a gradient leaf. Any primitive that
/// consumes it while a Tape is active records itself on that tape; after
/// `Tape::backward` the leaf's gradient is available through `grad()`.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor parameter(Shape shape, std::vector<double> data);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return impl_->data.size(); }
  std::span<const double> data() const { return impl_->data; }
  const std::vector<double>& values() const { return impl_->data; }
  double operator[](std::size_t flat) const { return impl_->data[flat]; }
  double at(std::initializer_list<std::size_t> index) const;
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  bool is_leaf() const { return impl_->leaf; }

  /// Gradient from the most recent backward pass that reached this leaf;
  /// zeros of the same shape when none has been computed.
  Tensor grad() const;

  /// Same values, no gradient tracking.
  Tensor detach() const;
  /// Independent leaf with the same values that requires grad.
  Tensor as_parameter() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Tape;
  friend Tensor record_op(Shape, std::vector<double>, std::span<const Tensor>,
                          std::function<void(std::span<const double>,
                                             std::span<double* const>)>);
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl);

  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Backward rule of a recorded primitive: receives the output gradient and
/// one accumulation buffer per input (nullptr for inputs that need none).
using BackwardFn =
    std::function<void(std::span<const double> grad_out, std::span<double* const> grad_in)>;

/// Eager define-by-run tape. Constructing a Tape makes it the active tape of
/// the calling thread until it is destroyed; tapes nest and are never shared
/// between threads.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active();

  /// Populates gradients of every leaf recorded on this tape. Visits each
  /// node reachable from `loss` exactly once, in reverse recording order.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  std::uint64_t id() const { return id_; }

 private:
  friend Tensor record_op(Shape, std::vector<double>, std::span<const Tensor>, BackwardFn);

  struct Node {
    std::vector<std::size_t> parents;
    BackwardFn backward;
    std::size_t numel = 0;
    std::shared_ptr<detail::TensorImpl> leaf;
  };

  std::size_t node_for(const std::shared_ptr<detail::TensorImpl>& impl);

  std::uint64_t id_;
  Tape* previous_;
  std::vector<Node> nodes_;
};

/// Suspends recording on the current thread for its lifetime.
class NoGrad {
 public:
  NoGrad();
  ~NoGrad();
  NoGrad(const NoGrad&) = delete;
  NoGrad& operator=(const NoGrad&) = delete;

 private:
  Tape* saved_;
};

/// Creates the output of a primitive. When a tape is active and any input
/// requires grad, the primitive is recorded with `backward` as its rule.
Tensor record_op(Shape shape, std::vector<double> data, std::span<const Tensor> inputs,
                 BackwardFn backward);

}  // namespace ppgt
