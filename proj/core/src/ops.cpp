#include "ppgt/ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace ppgt::ops {
namespace {

bool is_suffix(const Shape& shorter, const Shape& longer) {
  if (shorter.size() > longer.size()) return false;
  return std::equal(shorter.rbegin(), shorter.rend(), longer.rbegin());
}

struct Broadcast {
  Shape out;
  std::size_t na, nb;
};

Broadcast broadcast(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape() || is_suffix(b.shape(), a.shape())) {
    return {a.shape(), a.numel(), b.numel()};
  }
  if (is_suffix(a.shape(), b.shape())) return {b.shape(), a.numel(), b.numel()};
  throw ShapeError(std::string("shape mismatch in ") + op + ": " + shape_str(a.shape()) +
                   " vs " + shape_str(b.shape()));
}

template <class Fwd, class Da, class Db>
Tensor binary(const char* name, const Tensor& a, const Tensor& b, Fwd fwd, Da da, Db db) {
  auto bc = broadcast(name, a, b);
  const std::size_t n = numel_of(bc.out);
  std::vector<double> out(n);
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i % bc.na], bv[i % bc.nb]);
  const std::array<Tensor, 2> inputs{a, b};
  return record_op(std::move(bc.out), std::move(out), inputs,
                   [a, b, na = bc.na, nb = bc.nb, da, db](std::span<const double> g,
                                                          std::span<double* const> gin) {
                     const auto av = a.data();
                     const auto bv = b.data();
                     for (std::size_t i = 0; i < g.size(); ++i) {
                       const double x = av[i % na];
                       const double y = bv[i % nb];
                       if (gin[0]) gin[0][i % na] += g[i] * da(x, y);
                       if (gin[1]) gin[1][i % nb] += g[i] * db(x, y);
                     }
                   });
}

// `deriv(x, y)` receives the input and output values.
template <class Fwd, class Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  std::vector<double> out(x.numel());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
  Tensor saved_out(x.shape(), out);
  const std::array<Tensor, 1> inputs{x};
  return record_op(x.shape(), std::move(out), inputs,
                   [x, saved_out, deriv](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     const auto xv = x.data();
                     const auto yv = saved_out.data();
                     for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * deriv(xv[i], yv[i]);
                   });
}

// View of a shape as [outer, axis, inner] around one axis.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_str(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

std::size_t last_extent(const Tensor& x, const char* op) {
  if (x.rank() == 0) throw ShapeError(std::string(op) + " needs rank >= 1, got scalar");
  return x.shape().back();
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; }, [](double x, double y) { return -x / (y * y); });
}

Tensor scale(const Tensor& x, double c) {
  return unary(x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& x, double c) {
  return unary(x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sin(const Tensor& x) {
  return unary(
      x, [](double v) { return std::sin(v); }, [](double v, double) { return std::cos(v); });
}

Tensor cos(const Tensor& x) {
  return unary(
      x, [](double v) { return std::cos(v); }, [](double v, double) { return -std::sin(v); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  return unary(
      x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor square(const Tensor& x) {
  return unary(
      x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor safe_denominator(const Tensor& x, double floor) {
  return unary(
      x,
      [floor](double v) {
        const double m = std::max(v, floor);
        return m == 0.0 ? 1.0 : m;
      },
      [floor](double v, double) { return v > floor ? 1.0 : 0.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("shape mismatch in matmul: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  std::vector<double> out(n * m, 0.0);
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = bv.data() + p * m;
      double* orow = out.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  const std::array<Tensor, 2> inputs{a, b};
  return record_op({n, m}, std::move(out), inputs,
                   [a, b, n, k, m](std::span<const double> g, std::span<double* const> gin) {
                     const auto av = a.data();
                     const auto bv = b.data();
                     if (gin[0]) {
                       // dA = G B^T
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t p = 0; p < k; ++p) {
                           double s = 0.0;
                           for (std::size_t j = 0; j < m; ++j) s += g[i * m + j] * bv[p * m + j];
                           gin[0][i * k + p] += s;
                         }
                     }
                     if (gin[1]) {
                       // dB = A^T G
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t p = 0; p < k; ++p) {
                           const double aip = av[i * k + p];
                           double* drow = gin[1] + p * m;
                           for (std::size_t j = 0; j < m; ++j) drow[j] += aip * g[i * m + j];
                         }
                     }
                   });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("transpose needs rank 2, got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), m = x.dim(1);
  std::vector<double> out(n * m);
  const auto xv = x.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = xv[i * m + j];
  const std::array<Tensor, 1> inputs{x};
  return record_op({m, n}, std::move(out), inputs,
                   [n, m](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < m; ++j) gin[0][i * m + j] += g[j * n + i];
                   });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel_of(shape) != x.numel()) {
    throw ShapeError("shape mismatch in reshape: " + shape_str(x.shape()) + " vs " +
                     shape_str(shape));
  }
  const std::array<Tensor, 1> inputs{x};
  return record_op(std::move(shape), x.values(), inputs,
                   [](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
                   });
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const auto s = split_axis(x.shape(), axis);
  Shape shape = x.shape();
  shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
  std::vector<double> out(s.outer * s.inner, 0.0);
  const auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t a = 0; a < s.extent; ++a)
      for (std::size_t i = 0; i < s.inner; ++i)
        out[o * s.inner + i] += xv[(o * s.extent + a) * s.inner + i];
  const std::array<Tensor, 1> inputs{x};
  return record_op(std::move(shape), std::move(out), inputs,
                   [s](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t o = 0; o < s.outer; ++o)
                       for (std::size_t a = 0; a < s.extent; ++a)
                         for (std::size_t i = 0; i < s.inner; ++i)
                           gin[0][(o * s.extent + a) * s.inner + i] += g[o * s.inner + i];
                   });
}

Tensor mean(const Tensor& x, std::size_t axis) {
  const auto extent = split_axis(x.shape(), axis).extent;
  if (extent == 0) throw ShapeError("mean over empty axis of " + shape_str(x.shape()));
  return scale(sum(x, axis), 1.0 / static_cast<double>(extent));
}

Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  const std::array<Tensor, 1> inputs{x};
  return record_op(Shape{}, {s}, inputs,
                   [n = x.numel()](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t i = 0; i < n; ++i) gin[0][i] += g[0];
                   });
}

Tensor mean_all(const Tensor& x) {
  if (x.numel() == 0) throw ShapeError("mean of empty tensor");
  return scale(sum_all(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor l2norm_last(const Tensor& x) {
  const std::size_t d = last_extent(x, "l2norm_last");
  Shape shape(x.shape().begin(), x.shape().end() - 1);
  const std::size_t rows = d == 0 ? 0 : x.numel() / d;
  std::vector<double> out(numel_of(shape), 0.0);
  const auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += xv[r * d + c] * xv[r * d + c];
    out[r] = std::sqrt(s);
  }
  Tensor norms(shape, out);
  const std::array<Tensor, 1> inputs{x};
  return record_op(std::move(shape), std::move(out), inputs,
                   [x, norms, d, rows](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     const auto xv = x.data();
                     for (std::size_t r = 0; r < rows; ++r) {
                       const double nr = norms[r];
                       if (nr == 0.0) continue;
                       for (std::size_t c = 0; c < d; ++c) gin[0][r * d + c] += g[r] * xv[r * d + c] / nr;
                     }
                   });
}

Tensor expand_last(const Tensor& x, std::size_t n) {
  Shape shape = x.shape();
  shape.push_back(n);
  std::vector<double> out(x.numel() * n);
  const auto xv = x.data();
  for (std::size_t i = 0; i < x.numel(); ++i)
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(i * n), n, xv[i]);
  const std::array<Tensor, 1> inputs{x};
  return record_op(std::move(shape), std::move(out), inputs,
                   [n, m = x.numel()](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t i = 0; i < m; ++i) {
                       double s = 0.0;
                       for (std::size_t j = 0; j < n; ++j) s += g[i * n + j];
                       gin[0][i] += s;
                     }
                   });
}

Tensor concat_last(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_last of zero tensors");
  const Shape& first = parts[0].shape();
  if (first.empty()) throw ShapeError("concat_last needs rank >= 1");
  Shape lead(first.begin(), first.end() - 1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != first.size() || !std::equal(lead.begin(), lead.end(), p.shape().begin())) {
      throw ShapeError("shape mismatch in concat_last: " + shape_str(first) + " vs " +
                       shape_str(p.shape()));
    }
    widths.push_back(p.shape().back());
    total += p.shape().back();
  }
  const std::size_t rows = numel_of(lead);
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto pv = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(r * widths[k]), widths[k],
                  out.begin() + static_cast<std::ptrdiff_t>(r * total + offset));
    offset += widths[k];
  }
  Shape shape = lead;
  shape.push_back(total);
  return record_op(std::move(shape), std::move(out), parts,
                   [widths, rows, total](std::span<const double> g, std::span<double* const> gin) {
                     std::size_t offset = 0;
                     for (std::size_t k = 0; k < widths.size(); ++k) {
                       if (gin[k]) {
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t c = 0; c < widths[k]; ++c)
                             gin[k][r * widths[k] + c] += g[r * total + offset + c];
                       }
                       offset += widths[k];
                     }
                   });
}

Tensor slice_last(const Tensor& x, std::size_t begin, std::size_t end) {
  const std::size_t d = last_extent(x, "slice_last");
  if (begin > end || end > d) {
    throw ShapeError("slice [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of range for " + shape_str(x.shape()));
  }
  const std::size_t w = end - begin;
  const std::size_t rows = d == 0 ? 0 : x.numel() / d;
  std::vector<double> out(rows * w);
  const auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] = xv[r * d + begin + c];
  Shape shape = x.shape();
  shape.back() = w;
  const std::array<Tensor, 1> inputs{x};
  return record_op(std::move(shape), std::move(out), inputs,
                   [rows, w, d, begin](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t c = 0; c < w; ++c) gin[0][r * d + begin + c] += g[r * w + c];
                   });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> index) {
  if (x.rank() == 0) throw ShapeError("gather_rows needs rank >= 1");
  const std::size_t n = x.dim(0);
  const std::size_t row = n == 0 ? 0 : x.numel() / n;
  std::vector<double> out(index.size() * row);
  const auto xv = x.data();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= n) {
      throw ShapeError("gather index " + std::to_string(index[i]) + " out of range for " +
                       shape_str(x.shape()));
    }
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(index[i] * row), row,
                out.begin() + static_cast<std::ptrdiff_t>(i * row));
  }
  Shape shape = x.shape();
  shape[0] = index.size();
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::array<Tensor, 1> inputs{x};
  return record_op(std::move(shape), std::move(out), inputs,
                   [idx, row](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t i = 0; i < idx.size(); ++i)
                       for (std::size_t c = 0; c < row; ++c) gin[0][idx[i] * row + c] += g[i * row + c];
                   });
}

Tensor segment_sum(const Tensor& values, std::span<const std::size_t> segments,
                   std::size_t num_segments) {
  if (values.rank() == 0 || values.dim(0) != segments.size()) {
    throw ShapeError("shape mismatch in segment_sum: " + shape_str(values.shape()) + " vs [" +
                     std::to_string(segments.size()) + "]");
  }
  const std::size_t n = values.dim(0);
  const std::size_t row = n == 0 ? 0 : values.numel() / n;
  std::vector<double> out(num_segments * row, 0.0);
  const auto vv = values.data();
  for (std::size_t i = 0; i < n; ++i) {
    if (segments[i] >= num_segments) {
      throw ShapeError("segment id " + std::to_string(segments[i]) + " >= " +
                       std::to_string(num_segments));
    }
    for (std::size_t c = 0; c < row; ++c) out[segments[i] * row + c] += vv[i * row + c];
  }
  Shape shape = values.shape();
  shape[0] = num_segments;
  std::vector<std::size_t> seg(segments.begin(), segments.end());
  const std::array<Tensor, 1> inputs{values};
  return record_op(std::move(shape), std::move(out), inputs,
                   [seg, row](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t i = 0; i < seg.size(); ++i)
                       for (std::size_t c = 0; c < row; ++c) gin[0][i * row + c] += g[seg[i] * row + c];
                   });
}

Tensor softmax_rows(const Tensor& z, const std::optional<Tensor>& mask) {
  const std::size_t m = last_extent(z, "softmax_rows");
  if (mask && mask->shape() != z.shape()) {
    throw ShapeError("shape mismatch in softmax_rows mask: " + shape_str(z.shape()) + " vs " +
                     shape_str(mask->shape()));
  }
  const std::size_t rows = m == 0 ? 0 : z.numel() / m;
  std::vector<double> out(z.numel());
  const auto zv = z.data();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* zr = zv.data() + r * m;
    double* orow = out.data() + r * m;
    double mx = kNegInf;
    for (std::size_t j = 0; j < m; ++j) {
      const double s = mask ? zr[j] + (*mask)[r * m + j] : zr[j];
      orow[j] = s;
      mx = std::max(mx, s);
    }
    if (mx == kNegInf) throw Error("empty attention row");
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      orow[j] = orow[j] == kNegInf ? 0.0 : std::exp(orow[j] - mx);
      total += orow[j];
    }
    for (std::size_t j = 0; j < m; ++j) orow[j] /= total;
  }
  Tensor probs(z.shape(), out);
  const std::array<Tensor, 1> inputs{z};
  return record_op(z.shape(), std::move(out), inputs,
                   [probs, rows, m](std::span<const double> g, std::span<double* const> gin) {
                     if (!gin[0]) return;
                     for (std::size_t r = 0; r < rows; ++r) {
                       double dot = 0.0;
                       for (std::size_t j = 0; j < m; ++j) dot += g[r * m + j] * probs[r * m + j];
                       for (std::size_t j = 0; j < m; ++j)
                         gin[0][r * m + j] += probs[r * m + j] * (g[r * m + j] - dot);
                     }
                   });
}

Tensor dropout(const Tensor& x, double rate, std::span<const unsigned char> keep) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw Error("dropout rate must be < 1");
  if (keep.size() != x.numel()) throw ShapeError("dropout keep mask size mismatch");
  std::vector<double> factor(x.numel());
  for (std::size_t i = 0; i < factor.size(); ++i) factor[i] = keep[i] ? 1.0 / (1.0 - rate) : 0.0;
  return mul(x, Tensor(x.shape(), std::move(factor)));
}

}  // namespace ppgt::ops
