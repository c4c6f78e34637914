#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "vdvio/estimator.hpp"
#include "vdvio/simulator.hpp"

namespace vdvio {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Top-level YAML document with optional `simulation` and `estimator`
/// sections. Every key is optional; missing keys keep their defaults and
/// unknown keys are rejected.
struct AppConfig {
  SimulationConfig simulation;
  EstimatorConfig estimator;

  AppConfig();
};

AppConfig parse_config(const std::string& yaml, const std::string& source = "<string>");
AppConfig load_config(const std::filesystem::path& path);

/// YAML text that spells out every setting of `config`. parse_config of the
/// output reproduces the same values.
std::string format_config(const AppConfig& config);

}  // namespace vdvio
