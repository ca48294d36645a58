#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ppgt/tensor.hpp"

int main(int argc, char** argv) {
  using namespace ppgt::cli;

  CLI::App app{"ppgt: plain graph transformer experiments and checks"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "TOML run configuration");
    cmd->add_option("--seed", overrides.seed, "base seed");
    cmd->add_option("--jobs", overrides.jobs, "worker threads");
    cmd->add_option("--out", overrides.out, "output directory");
    cmd->add_option("--pairs", overrides.pairs, "comma-separated pair names");
    cmd->add_option("--k", overrides.k, "RRWP walk steps (model and oracle)");
    cmd->add_option("--spe-bases", overrides.spe_bases, "SPE base count, or a list for sweep spe");
  };

  auto* check = app.add_subcommand("check", "fast invariant suite");
  auto* expressivity = app.add_subcommand("expressivity", "pair-bank oracle and model protocol");
  auto* case_study = app.add_subcommand("case-study", "normalization autoencoder case study");
  auto* sweep = app.add_subcommand("sweep", "sensitivity sweeps (spe, batch-size)");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full model");
  auto* export_pe = app.add_subcommand("export-pe", "write RRWP tensors as binaries");
  std::string sweep_kind;
  sweep->add_option("kind", sweep_kind, "spe or batch-size")->required();
  for (auto* cmd : {check, expressivity, case_study, sweep, gradcheck, export_pe}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    apply_overrides(config, overrides);
    if (check->parsed()) return cmd_check(config, std::cout);
    if (expressivity->parsed()) return cmd_expressivity(config, std::cout);
    if (case_study->parsed()) return cmd_case_study(config, std::cout);
    if (gradcheck->parsed()) return cmd_gradcheck(config, std::cout);
    if (export_pe->parsed()) return cmd_export_pe(config, std::cout);
    if (sweep->parsed()) {
      if (sweep_kind == "spe") return cmd_sweep_spe(config, std::cout);
      if (sweep_kind == "batch-size") return cmd_sweep_batch_size(config, std::cout);
      throw ConfigError("unknown sweep kind '" + sweep_kind + "' (expected spe or batch-size)");
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
