#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ppgt/csv.hpp"
#include "ppgt/model.hpp"
#include "ppgt/pair_bank.hpp"
#include "ppgt/wl.hpp"

namespace ppgt {

struct OracleVerdict {
  bool wl1 = false;
  bool gdwl = false;
};

/// Fingerprint inequality under 1-WL and under GD-WL with exact RRWP(K).
OracleVerdict oracle_distinguish(const GraphPair& pair, std::size_t walk_steps);

enum class Verdict { model_distinguishes, model_blind, isomorphic_consistent };

std::string_view to_string(Verdict verdict);

inline constexpr double kIsoTolerance = 1e-6;
inline constexpr double kDistinguishThreshold = 1e-3;

struct PairReport {
  std::string name;
  PairCategory category = PairCategory::basic;
  OracleVerdict oracle;
  std::vector<std::uint64_t> seeds;
  std::vector<double> distances;
  /// Mean L2 norm of the pooled embeddings over both graphs and all seeds.
  double scale = 0.0;
  double median_distance = 0.0;
  Verdict verdict = Verdict::model_blind;
  /// Set when the model verdict and the GD-WL oracle disagree, or when the
  /// oracle disagrees with the stored expectation flags.
  bool flagged = false;
};

/// Untrained-model protocol: for seeds config.seed, config.seed + 1, ...,
/// initialize parameters and compare the pooled embeddings of g1 and g2.
/// Isomorphic controls are isomorphic-consistent when every distance is below
/// kIsoTolerance * (1 + scale); otherwise a median distance above
/// kDistinguishThreshold * (1 + scale) means the model distinguishes.
PairReport model_distinguish(const GraphPair& pair, const ModelConfig& config, std::size_t n_seeds,
                             std::size_t jobs = 1);

/// Pooled embedding of one graph under `params`.
Tensor graph_embedding(const Graph& g, const ModelConfig& config, const ModelParams& params);

struct SuiteOptions {
  std::size_t n_seeds = 10;
  /// Walk steps for the GD-WL oracle.
  std::size_t walk_steps = kBankReferenceWalkSteps;
  std::size_t jobs = 1;
};

std::vector<PairReport> run_pair_suite(const std::vector<GraphPair>& pairs, const ModelConfig& config,
                                       const SuiteOptions& options);

/// Columns: pair, category, wl1, gdwl, median_dist, verdict.
CsvTable pair_suite_table(const std::vector<PairReport>& reports);

struct SpeRow {
  std::size_t bases = 0;
  std::size_t channels = 0;
  bool oracle_gdwl = false;
  double median_distance = 0.0;
  double scale = 0.0;
  Verdict verdict = Verdict::model_blind;
};

/// model_distinguish for each S, everything else fixed.
std::vector<SpeRow> spe_sensitivity(const GraphPair& pair, const std::vector<std::size_t>& bases,
                                    const ModelConfig& config, std::size_t n_seeds,
                                    std::size_t jobs = 1);

/// Columns: pair, spe_bases, channels, gdwl, median_dist, verdict.
CsvTable spe_sweep_table(std::string_view pair, const std::vector<SpeRow>& rows);

struct ContrastiveOptions {
  std::size_t steps = 100;
  std::size_t warmup = 10;
  double lr = 1e-3;
  double margin = 1.0;
};

struct ContrastiveResult {
  double initial_distance = 0.0;
  double final_distance = 0.0;
  std::vector<double> losses;
};

/// Trains one model with the margin loss max(0, margin - ||z1 - z2||) using
/// AdamW and a warmup cosine schedule. Not part of the default protocol.
ContrastiveResult contrastive_train(const GraphPair& pair, const ModelConfig& config,
                                    const ContrastiveOptions& options);

}  // namespace ppgt
