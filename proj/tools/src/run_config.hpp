#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppgt/model.hpp"
#include "ppgt/normalization.hpp"

namespace ppgt::cli {

/// Bad configuration: unknown key, wrong type, invalid value. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExpressivityConfig {
  /// Empty means the whole bank.
  std::vector<std::string> pairs;
  std::size_t seeds = 10;
  /// Walk steps of the GD-WL oracle.
  std::size_t walk_steps = 3;
};

struct CaseStudyConfig {
  std::vector<NormKind> norms = {NormKind::bn, NormKind::rmsn, NormKind::adarmsn};
  std::size_t points = 64;
  std::size_t epochs = 5000;
  std::size_t hidden = 16;
  double lr = 1e-3;
  double weight_decay = 0.01;
  bool linear_bias = false;
};

struct SpeSweepConfig {
  std::string pair = "c6-vs-2c3";
  std::vector<std::size_t> bases = {0, 1, 2, 3, 4, 6};
  std::size_t seeds = 10;
};

struct BatchSweepConfig {
  std::vector<NormKind> norms = {NormKind::bn, NormKind::rmsn, NormKind::adarmsn};
  std::vector<std::size_t> batch_sizes = {2, 4, 8, 16, 32, 64};
  std::size_t total_steps = 5000;
};

struct GradcheckConfig {
  /// Edge-list file; the built-in 5-node graph when empty.
  std::string graph;
  double h = 1e-6;
  double tolerance = 1e-4;
};

struct ExportPeConfig {
  /// Edge-list files to encode; with none, every bank graph is written.
  std::vector<std::string> graphs;
};

/// Everything one invocation needs. Every field has a default; TOML sections
/// mirror the struct names ([model], [expressivity], [case_study],
/// [sweep.spe], [sweep.batch_size], [gradcheck], [export_pe]).
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out = "ppgt-out";
  ModelConfig model;
  ExpressivityConfig expressivity;
  CaseStudyConfig case_study;
  SpeSweepConfig spe_sweep;
  BatchSweepConfig batch_sweep;
  GradcheckConfig gradcheck;
  ExportPeConfig export_pe;

  /// Small model used by gradcheck (2 layers, Dm = 8) unless [model] is given.
  bool model_from_file = false;
};

RunConfig parse_run_config(const std::string& toml_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Command-line overrides; unset fields leave the config untouched.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  std::optional<std::string> pairs;
  std::optional<std::size_t> k;
  std::optional<std::string> spe_bases;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Comma-separated list of non-negative integers.
std::vector<std::size_t> parse_size_list(const std::string& text, const char* what);

/// Resolved configuration as JSON text (for run manifests).
std::string run_config_json(const RunConfig& config);

}  // namespace ppgt::cli
