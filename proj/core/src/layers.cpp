#include "ppgt/layers.hpp"

#include <cmath>
#include <string>

#include "ppgt/ops.hpp"

namespace ppgt {

Linear Linear::zeros(std::size_t in, std::size_t out) {
  return {Tensor::parameter({in, out}, std::vector<double>(in * out, 0.0)),
          Tensor::parameter({out}, std::vector<double>(out, 0.0))};
}

Linear Linear::truncated_normal(std::size_t in, std::size_t out, double sigma, Rng& rng) {
  std::vector<double> w(in * out);
  for (auto& v : w) v = rng.truncated_normal(sigma);
  return {Tensor::parameter({in, out}, std::move(w)),
          Tensor::parameter({out}, std::vector<double>(out, 0.0))};
}

Linear Linear::kaiming_uniform(std::size_t in, std::size_t out, double a, Rng& rng) {
  const double fan_in = static_cast<double>(in);
  const double bound = std::sqrt(6.0 / ((1.0 + a * a) * fan_in));
  const double bias_bound = 1.0 / std::sqrt(fan_in);
  std::vector<double> w(in * out);
  for (auto& v : w) v = rng.uniform(-bound, bound);
  std::vector<double> b(out);
  for (auto& v : b) v = rng.uniform(-bias_bound, bias_bound);
  return {Tensor::parameter({in, out}, std::move(w)), Tensor::parameter({out}, std::move(b))};
}

Tensor linear(const Tensor& x, const Linear& layer) {
  if (x.rank() == 0 || x.shape().back() != layer.in()) {
    throw ShapeError("linear: input " + shape_str(x.shape()) + " vs weight " +
                     shape_str(layer.weight.shape()));
  }
  if (x.rank() == 2) return ops::matmul(x, layer.weight) + layer.bias;
  Shape out_shape = x.shape();
  out_shape.back() = layer.out();
  const Tensor flat = ops::reshape(x, {x.numel() / layer.in(), layer.in()});
  return ops::reshape(ops::matmul(flat, layer.weight) + layer.bias, std::move(out_shape));
}

Tensor mlp(const Tensor& x, const Mlp& m) { return linear(ops::relu(linear(x, m.fc1)), m.fc2); }

Tensor feed_forward(const Tensor& x, const FeedForward& ffn) {
  return x + mlp(normalize(x, ffn.norm), ffn.mlp);
}

}  // namespace ppgt
