#pragma once

#include <string>

#include "condshrink/risk_lab.hpp"

namespace condshrink {

/// Parses an experiment config (YAML; JSON is accepted as a subset). A run
/// manifest is accepted too, in which case its embedded `config` is used.
/// Schema violations throw ErrorCode::config with a "line N: field: reason"
/// diagnostic.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Fully resolved config as JSON; parse_config() of this text yields an
/// identical config.
std::string config_to_json(const ExperimentConfig& config);

}  // namespace condshrink
