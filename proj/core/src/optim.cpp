#include "ppgt/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ppgt {

void adamw_step(OptimizerState& state, std::span<Tensor* const> params,
                std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("adamw_step: " + std::to_string(params.size()) + " params vs " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (!(state.lr > 0.0)) throw Error("adamw_step: learning rate must be positive");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i]->shape()) {
      throw ShapeError("adamw_step: gradient " + shape_str(grads[i].shape()) +
                       " for parameter " + shape_str(params[i]->shape()));
    }
    for (double g : grads[i].data()) {
      if (!std::isfinite(g)) throw Error("non-finite gradient");
    }
  }
  if (state.m.empty()) {
    for (auto* p : params) {
      state.m.emplace_back(p->numel(), 0.0);
      state.v.emplace_back(p->numel(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adamw_step: parameter count changed");

  ++state.step;
  const auto [b1, b2] = state.betas;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != params[i]->numel()) throw ShapeError("adamw_step: moment shape mismatch");
    std::vector<double> p = params[i]->values();
    const auto g = grads[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] -= state.lr * state.weight_decay * p[j];
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
    *params[i] = Tensor::parameter(params[i]->shape(), std::move(p));
  }
}

void adamw_step(OptimizerState& state, std::span<Tensor* const> params) {
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (auto* p : params) grads.push_back(p->grad());
  adamw_step(state, params, grads);
}

double cosine_lr(std::size_t step, std::size_t warmup, std::size_t total, double lr_max) {
  step = std::min(step, total);
  if (step < warmup) return lr_max * static_cast<double>(step) / static_cast<double>(warmup);
  if (total <= warmup) return lr_max;
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
  return lr_max * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace ppgt
