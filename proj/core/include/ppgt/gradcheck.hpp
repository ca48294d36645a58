#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ppgt/tensor.hpp"

namespace ppgt {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

using ScalarFn = std::function<Tensor(const std::vector<Tensor>&)>;

/// Compares reverse-mode gradients of `f` against central differences with
/// step `h` in (0, 1e-3]. Error per coordinate is
/// |analytic - numeric| / max(1, |analytic|); the maximum is returned.
/// Throws if any evaluation or gradient entry is non-finite, naming the
/// input and coordinate.
GradCheckResult grad_check(const ScalarFn& f, const std::vector<Tensor>& inputs, double h = 1e-6);

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double h = 1e-6);

}  // namespace ppgt
