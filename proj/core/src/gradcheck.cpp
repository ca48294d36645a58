#include "ppgt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ppgt {
namespace {

double eval(const ScalarFn& f, const std::vector<Tensor>& inputs, std::size_t input,
            std::size_t index) {
  const Tensor out = f(inputs);
  if (out.numel() != 1) throw Error("grad_check: function must return a scalar");
  const double v = out.item();
  if (!std::isfinite(v)) {
    throw Error("grad_check: non-finite value at input " + std::to_string(input) +
                ", coordinate " + std::to_string(index));
  }
  return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double h) {
  if (!(h > 0.0 && h <= 1e-3)) throw Error("grad_check: step must lie in (0, 1e-3]");

  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const auto& x : inputs) leaves.push_back(x.as_parameter());
  {
    Tape tape;
    const Tensor loss = f(leaves);
    tape.backward(loss);
  }

  std::vector<Tensor> analytic;
  analytic.reserve(leaves.size());
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    analytic.push_back(leaves[k].grad());
    for (std::size_t i = 0; i < analytic[k].numel(); ++i) {
      if (!std::isfinite(analytic[k][i])) {
        throw Error("grad_check: non-finite gradient at input " + std::to_string(k) +
                    ", coordinate " + std::to_string(i));
      }
    }
  }

  GradCheckResult result;
  NoGrad no_grad;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<double> base = inputs[k].values();
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double a = analytic[k][i];
      std::vector<double> shifted = base;
      shifted[i] = base[i] + h;
      probe[k] = Tensor(inputs[k].shape(), shifted);
      const double up = eval(f, probe, k, i);
      shifted[i] = base[i] - h;
      probe[k] = Tensor(inputs[k].shape(), std::move(shifted));
      const double down = eval(f, probe, k, i);
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_input = k;
        result.worst_index = i;
      }
      ++result.coordinates;
    }
    probe[k] = inputs[k];
  }
  return result;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double h) {
  return grad_check([&f](const std::vector<Tensor>& in) { return f(in[0]); },
                    std::vector<Tensor>{x}, h)
      .max_rel_error;
}

}  // namespace ppgt
