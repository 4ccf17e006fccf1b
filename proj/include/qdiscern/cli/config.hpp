// config.hpp
// Experiment configuration: a JSON document describing the model, the
// measurements and the (dt, n, alpha*) grid. Matrices are row-major lists of
// [real, imag] pairs.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdiscern/experiments.hpp"

namespace qdiscern::cli {

// Carries the JSON pointer (or line/column) of the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SegmentSpec {
  std::vector<Complex> entries;
  double duration = 1.0;
};

struct MeasurementSpec {
  // "pi", "sld", "random" or "povm"
  std::string kind;
  std::size_t count = 1;
  std::string label;
  std::vector<std::vector<Complex>> elements;
};

struct ExperimentConfig {
  std::size_t dim = 2;
  std::vector<Complex> state;
  std::vector<SegmentSpec> segments;
  double hbar = 1.0;
  std::string description;

  std::vector<MeasurementSpec> measurements;
  std::vector<double> dt_values;
  std::vector<std::size_t> n_values;
  double alpha = 0.05;
  double threshold = kDefaultConditionThreshold;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
  bool normalize_state = false;

  std::optional<std::vector<double>> p0;
  std::optional<std::vector<double>> p1;
  std::size_t trials = 500;
  std::size_t monte_carlo_samples = 0;
};

// Qubit (|+>, sigma_z, hbar = 1), measurements pi and sld, a small grid.
ExperimentConfig default_config();

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Inverse of parse_config: parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

// Parses "random:5", "pi", "sld".
MeasurementSpec parse_measurement_token(const std::string& token);

// Builds the validated model; violations surface as ConfigError.
Model build_model(const ExperimentConfig& config);
std::vector<MeasurementChoice> build_measurements(const ExperimentConfig& config, const Model& model);

}  // namespace qdiscern::cli
