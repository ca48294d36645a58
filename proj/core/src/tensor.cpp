#include "ppgt/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <sstream>

namespace ppgt {
namespace {

thread_local Tape* t_active_tape = nullptr;
std::atomic<std::uint64_t> g_next_tape_id{1};

constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

}  // namespace

std::size_t numel_of(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor() : Tensor(Shape{}, std::vector<double>{0.0}) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  if (numel_of(shape) != data.size()) {
    throw ShapeError("tensor shape " + shape_str(shape) + " does not match " +
                     std::to_string(data.size()) + " values");
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
}

Tensor::Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = numel_of(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
  Tensor t(std::move(shape), std::move(data));
  t.impl_->requires_grad = true;
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_str(shape()));
  }
  return impl_->shape[axis];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  if (index.size() != rank()) {
    throw ShapeError("index rank " + std::to_string(index.size()) + " for shape " +
                     shape_str(shape()));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= impl_->shape[axis]) throw ShapeError("index out of range for " + shape_str(shape()));
    flat = flat * impl_->shape[axis] + i;
    ++axis;
  }
  return impl_->data[flat];
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

Tensor Tensor::grad() const {
  if (impl_->grad.size() == numel()) return Tensor(impl_->shape, impl_->grad);
  return zeros(impl_->shape);
}

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->data); }

Tensor Tensor::as_parameter() const { return parameter(impl_->shape, impl_->data); }

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)), previous_(t_active_tape) {
  t_active_tape = this;
}

Tape::~Tape() { t_active_tape = previous_; }

Tape* Tape::active() { return t_active_tape; }

std::size_t Tape::node_for(const std::shared_ptr<detail::TensorImpl>& impl) {
  if (impl->tape_id == id_) return impl->node;
  if (!impl->requires_grad || !impl->leaf) return kNoParent;
  // Leaf seen for the first time on this tape.
  impl->tape_id = id_;
  impl->node = nodes_.size();
  Node node;
  node.numel = impl->data.size();
  node.leaf = impl;
  nodes_.push_back(std::move(node));
  return impl->node;
}

void Tape::backward(const Tensor& loss) {
  const auto& impl = loss.impl_;
  if (impl->data.size() != 1) {
    throw Error("backward() needs a scalar loss, got shape " + shape_str(impl->shape));
  }
  if (impl->tape_id != id_) {
    throw Error("backward(): loss is not recorded on this tape (detached tape)");
  }

  std::vector<std::vector<double>> grads(nodes_.size());
  grads[impl->node].assign(1, 1.0);

  std::vector<double*> grad_in;
  for (std::size_t i = impl->node + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (grads[i].empty() || !node.backward) continue;
    grad_in.assign(node.parents.size(), nullptr);
    for (std::size_t p = 0; p < node.parents.size(); ++p) {
      const std::size_t parent = node.parents[p];
      if (parent == kNoParent) continue;
      auto& g = grads[parent];
      if (g.empty()) g.assign(nodes_[parent].numel, 0.0);
      grad_in[p] = g.data();
    }
    node.backward(grads[i], grad_in);
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& leaf = nodes_[i].leaf;
    if (!leaf) continue;
    if (grads[i].empty()) {
      leaf->grad.assign(leaf->data.size(), 0.0);
    } else {
      leaf->grad = std::move(grads[i]);
    }
  }
}

NoGrad::NoGrad() : saved_(t_active_tape) { t_active_tape = nullptr; }

NoGrad::~NoGrad() { t_active_tape = saved_; }

Tensor record_op(Shape shape, std::vector<double> data, std::span<const Tensor> inputs,
                 BackwardFn backward) {
  Tensor out(std::move(shape), std::move(data));
  Tape* tape = t_active_tape;
  if (tape == nullptr) return out;

  std::vector<std::size_t> parents;
  parents.reserve(inputs.size());
  bool any = false;
  for (const auto& in : inputs) {
    const auto parent = tape->node_for(in.impl_);
    any = any || parent != kNoParent;
    parents.push_back(parent);
  }
  if (!any) return out;

  Tape::Node node;
  node.parents = std::move(parents);
  node.backward = std::move(backward);
  node.numel = out.numel();
  out.impl_->requires_grad = true;
  out.impl_->leaf = false;
  out.impl_->tape_id = tape->id_;
  out.impl_->node = tape->nodes_.size();
  tape->nodes_.push_back(std::move(node));
  return out;
}

}  // namespace ppgt
