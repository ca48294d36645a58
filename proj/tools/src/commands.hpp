#pragma once

#include <ostream>

#include "run_config.hpp"

namespace ppgt::cli {

enum ExitCode { kSuccess = 0, kFailure = 1, kConfigError = 2 };

/// Each command writes its CSV(s) and a `<command>_manifest.json` into
/// `config.out` and prints a summary to `out`. They return an exit code;
/// configuration problems are thrown as ConfigError.
int cmd_check(const RunConfig& config, std::ostream& out);
int cmd_expressivity(const RunConfig& config, std::ostream& out);
int cmd_case_study(const RunConfig& config, std::ostream& out);
int cmd_sweep_spe(const RunConfig& config, std::ostream& out);
int cmd_sweep_batch_size(const RunConfig& config, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);
int cmd_export_pe(const RunConfig& config, std::ostream& out);

}  // namespace ppgt::cli
