#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ppgt/model.hpp"

namespace ppgt {

std::string config_to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys are an error.
ModelConfig config_from_json(std::string_view text);

/// Writes `<prefix>.bin` (all parameters as little-endian f64, in
/// for_each_param order) and `<prefix>.json` (name -> shape and offset, the
/// config and its seed).
void save_checkpoint(const std::filesystem::path& prefix, const ModelConfig& config,
                     const ModelParams& params);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

Checkpoint load_checkpoint(const std::filesystem::path& prefix);

}  // namespace ppgt
