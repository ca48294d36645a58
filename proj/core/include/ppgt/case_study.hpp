#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ppgt/csv.hpp"
#include "ppgt/layers.hpp"
#include "ppgt/normalization.hpp"
#include "ppgt/rng.hpp"
#include "ppgt/tensor.hpp"

namespace ppgt {

/// y = FC(Norm(FC(x))) on 2-D points.
struct AutoEncoder {
  Linear fc1;
  NormParams norm;
  Linear fc2;

  /// Both linears use the common framework default init (Kaiming-uniform,
  /// a = sqrt(5)). Without `bias` the linears are homogeneous maps and their
  /// bias tensors stay fixed at zero.
  static AutoEncoder init(NormKind norm, std::size_t hidden, bool bias, Rng& rng);

  bool has_bias = false;
};

/// BatchNorm uses batch statistics (and updates its running estimates) when
/// `training` is set; every other norm ignores the flag.
Tensor autoencoder_forward(const Tensor& x, AutoEncoder& model, bool training);

/// n points in the plane with magnitude ~ U[0.5, 1.5] and angle ~ U[0, 2 pi).
Tensor case_study_points(std::size_t n, Rng& rng);

struct CaseStudyOptions {
  NormKind norm = NormKind::adarmsn;
  std::size_t n_points = 64;
  std::size_t epochs = 5000;
  std::uint64_t seed = 0;
  std::size_t hidden = 16;
  double lr = 1e-3;
  double weight_decay = 0.01;
  /// Bias terms in the two linears. Off by default: with a bias, the
  /// direction of FC(x) carries |x| and even a scale-free norm can recover it.
  bool linear_bias = false;
  /// 0 trains full-batch with a constant learning rate for `epochs`.
  /// Otherwise mini-batches of this size (last partial batch dropped) for
  /// `total_steps` updates with 10% linear warmup and cosine annealing.
  std::size_t batch_size = 0;
  std::size_t total_steps = 0;
};

struct CaseStudyReport {
  NormKind norm = NormKind::adarmsn;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  std::size_t steps = 0;
  double mse = 0.0;
  /// Mean of (||y|| - ||x||)^2.
  double radial_mse = 0.0;
};

/// Data and initial weights derive from `seed` only, so norms trained with
/// the same seed see the same points. Throws Error naming the epoch if the
/// loss becomes non-finite.
CaseStudyReport case_study_autoencoder(const CaseStudyOptions& options);

/// One mini-batch run per (norm, batch size), with `base.total_steps` updates
/// each. Rejects BatchNorm with batch size < 2 before running anything.
std::vector<CaseStudyReport> batch_size_sweep(const std::vector<NormKind>& norms,
                                              const std::vector<std::size_t>& batch_sizes,
                                              const CaseStudyOptions& base, std::size_t jobs = 1);

/// Columns: norm, seed, mse, radial_mse.
CsvTable case_study_table(const std::vector<CaseStudyReport>& reports);
/// Columns: norm, batch_size, steps, mse, radial_mse.
CsvTable batch_sweep_table(const std::vector<CaseStudyReport>& reports);

}  // namespace ppgt
