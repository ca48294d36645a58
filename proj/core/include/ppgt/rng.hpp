#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ppgt {

/// Seedable, splittable generator. `split(name)` derives an independent
/// child stream from the seed and the name alone, so the child does not
/// depend on how many values the parent has already produced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng split(std::string_view name) const;
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Normal(0, sigma) conditioned on |value| <= 2 sigma, by rejection.
  double truncated_normal(double sigma);
  std::size_t index(std::size_t n);
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ppgt
