#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ppgt/csv.hpp"
#include "ppgt/tensor.hpp"

namespace ppgt {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Measured quantity (an error or margin) and the bound it is held to.
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Replaceable pieces of the fast suite, so that a deliberately broken
/// implementation can be shown to trip the matching check.
struct CheckHooks {
  std::function<Tensor(const Tensor&, const Tensor&)> sl2_scores;
};

/// Fast invariant suite: sL2 distance identity, softmax shift invariance,
/// magnitude invariance of LN/RMSN, AdaRMSN init/identity contracts, gradient
/// checks on small shapes, exact vs float RRWP and the pair-bank oracle
/// flags. Deterministic for a given seed.
std::vector<CheckResult> run_checks(std::uint64_t seed = 0, const CheckHooks& hooks = {});

/// Columns: check, passed, value, tolerance.
CsvTable check_table(const std::vector<CheckResult>& results);

}  // namespace ppgt
