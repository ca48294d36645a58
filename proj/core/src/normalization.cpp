#include "ppgt/normalization.hpp"

#include <cmath>
#include <string>

#include "ppgt/ops.hpp"

namespace ppgt {
namespace {

void expect(const Tensor& x, const NormParams& params, NormKind kind, const char* name) {
  if (params.kind != kind) {
    throw Error(std::string(name) + " called with " + std::string(to_string(params.kind)) +
                " parameters");
  }
  if (x.rank() == 0 || x.shape().back() != params.dim) {
    throw ShapeError(std::string(name) + ": input " + shape_str(x.shape()) +
                     " does not end in D=" + std::to_string(params.dim));
  }
}

// max(||x|| / sqrt(D), eps) per token, with an exact zero mapped to 1.
Tensor rms_denominator(const Tensor& x, std::size_t dim, double eps) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
  return ops::safe_denominator(ops::l2norm_last(x) * inv_sqrt_d, eps);
}

}  // namespace

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::ln: return "ln";
    case NormKind::rmsn: return "rmsn";
    case NormKind::adarmsn: return "adarmsn";
    case NormKind::bn: return "bn";
  }
  return "?";
}

NormKind parse_norm_kind(std::string_view name) {
  if (name == "ln") return NormKind::ln;
  if (name == "rmsn") return NormKind::rmsn;
  if (name == "adarmsn") return NormKind::adarmsn;
  if (name == "bn") return NormKind::bn;
  throw Error("unknown norm kind '" + std::string(name) + "'");
}

NormParams NormParams::init(NormKind kind, std::size_t dim, double eps) {
  if (eps < 0.0) throw Error("norm eps must be >= 0");
  NormParams p;
  p.kind = kind;
  p.dim = dim;
  p.eps = eps;
  switch (kind) {
    case NormKind::ln:
    case NormKind::bn:
      p.gamma = Tensor::parameter({dim}, std::vector<double>(dim, 1.0));
      p.beta = Tensor::parameter({dim}, std::vector<double>(dim, 0.0));
      break;
    case NormKind::rmsn:
      p.gamma = Tensor::parameter({dim}, std::vector<double>(dim, 1.0));
      break;
    case NormKind::adarmsn:
      p.alpha = Tensor::parameter({dim}, std::vector<double>(dim, 0.0));
      p.beta = Tensor::parameter({dim}, std::vector<double>(dim, 1.0));
      break;
  }
  if (kind == NormKind::bn) {
    p.running_mean.assign(dim, 0.0);
    p.running_var.assign(dim, 1.0);
  }
  return p;
}

Tensor layer_norm(const Tensor& x, const NormParams& params) {
  expect(x, params, NormKind::ln, "layer_norm");
  const std::size_t d = params.dim;
  const std::size_t last = x.rank() - 1;
  const Tensor centered = x - ops::expand_last(ops::mean(x, last), d);
  const Tensor var = ops::mean(ops::square(centered), last);
  const Tensor denom = ops::safe_denominator(ops::sqrt(var + params.eps), 0.0);
  return centered / ops::expand_last(denom, d) * params.gamma + params.beta;
}

Tensor rmsn(const Tensor& x, const NormParams& params) {
  expect(x, params, NormKind::rmsn, "rmsn");
  return x / ops::expand_last(rms_denominator(x, params.dim, params.eps), params.dim) *
         params.gamma;
}

Tensor ada_rmsn(const Tensor& x, const NormParams& params) {
  expect(x, params, NormKind::adarmsn, "ada_rmsn");
  const std::size_t d = params.dim;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const Tensor unit = x / ops::expand_last(rms_denominator(x, d, params.eps), d);
  const Tensor adaptive_scale = ops::l2norm_last(x * params.alpha + params.beta) * inv_sqrt_d;
  return unit * ops::expand_last(adaptive_scale, d);
}

Tensor batch_norm_1d(const Tensor& x, NormParams& params, bool training) {
  expect(x, params, NormKind::bn, "batch_norm_1d");
  if (x.rank() != 2) throw ShapeError("batch_norm_1d needs [B, D], got " + shape_str(x.shape()));
  const std::size_t batch = x.dim(0);
  const std::size_t d = params.dim;
  if (!training) {
    std::vector<double> mean = params.running_mean;
    std::vector<double> inv_std(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double s = std::sqrt(params.running_var[j] + params.eps);
      inv_std[j] = s > 0.0 ? 1.0 / s : 1.0;
    }
    const Tensor centered = x - Tensor({d}, std::move(mean));
    return centered * Tensor({d}, std::move(inv_std)) * params.gamma + params.beta;
  }
  if (batch < 2) throw Error("degenerate batch");

  const Tensor mu = ops::mean(x, 0);
  const Tensor centered = x - mu;
  const Tensor var = ops::mean(ops::square(centered), 0);
  const Tensor denom = ops::safe_denominator(ops::sqrt(var + params.eps), 0.0);

  const double m = params.momentum;
  const double unbias = static_cast<double>(batch) / static_cast<double>(batch - 1);
  for (std::size_t j = 0; j < d; ++j) {
    params.running_mean[j] = (1.0 - m) * params.running_mean[j] + m * mu[j];
    params.running_var[j] = (1.0 - m) * params.running_var[j] + m * var[j] * unbias;
  }
  return centered / denom * params.gamma + params.beta;
}

Tensor normalize(const Tensor& x, const NormParams& params) {
  switch (params.kind) {
    case NormKind::ln: return layer_norm(x, params);
    case NormKind::rmsn: return rmsn(x, params);
    case NormKind::adarmsn: return ada_rmsn(x, params);
    case NormKind::bn: {
      if (x.rank() != 2) {
        // Token tensors of higher rank are normalized as a flat batch.
        const Shape shape = x.shape();
        return ops::reshape(normalize(ops::reshape(x, {x.numel() / params.dim, params.dim}), params),
                            shape);
      }
      NormParams copy = params;
      return batch_norm_1d(x, copy, false);
    }
  }
  throw Error("unknown norm kind");
}

}  // namespace ppgt
