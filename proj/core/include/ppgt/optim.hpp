#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ppgt/tensor.hpp"

namespace ppgt {

struct OptimizerState {
  std::size_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  double lr = 1e-3;
  std::pair<double, double> betas{0.9, 0.999};
  double weight_decay = 0.01;
  double eps = 1e-8;
};

/// One AdamW update with bias correction and decoupled weight decay:
///   p <- p - lr * wd * p - lr * m_hat / (sqrt(v_hat) + eps)
/// Each `*params[i]` is replaced by a new leaf holding the updated values.
/// Moments are created on the first step; a non-finite gradient throws
/// Error("non-finite gradient") before anything is modified.
void adamw_step(OptimizerState& state, std::span<Tensor* const> params,
                std::span<const Tensor> grads);

/// Same, reading each parameter's gradient from its last backward pass.
void adamw_step(OptimizerState& state, std::span<Tensor* const> params);

/// Linear warmup from 0 to lr_max over `warmup` steps, then cosine annealing
/// to 0 at `total`. Steps beyond `total` are clamped.
double cosine_lr(std::size_t step, std::size_t warmup, std::size_t total, double lr_max);

}  // namespace ppgt
