#pragma once

#include "attackdet/graph.hpp"
#include "attackdet/model.hpp"
#include "attackdet/simulator.hpp"
#include "attackdet/synthesis.hpp"

#include <stdexcept>
#include <string>

namespace attackdet {

/// Input error with the offending field (or parse position) in the message.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputPaths {
  std::string gains = "gains.json";
  std::string csv = "trajectory.csv";
  std::string svg = "residuals.svg";
};

struct Scenario {
  ModelSet models;
  DirectedGraph graph{1, {}};
  SynthesisParams params;
  SimulationConfig simulation;
  OutputPaths outputs;
};

/// Six-state ring example: plant, ring of six two-output sensors, step attack
/// of amplitude 5 on [2, 7) at node 2. `noise_intensity` scales the process
/// and measurement noise.
Scenario paper_scenario(double noise_intensity = 1.0);

/// Parses a JSON scenario document. Throws ConfigError naming the field or
/// the line and column of a syntax error, and when the model fails validation.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Gains file: every recovered matrix, the weights and the performance
/// quantities. Doubles are written in shortest round-trip form.
std::string gains_to_json(const SynthesisSolution& solution);
SynthesisSolution gains_from_json(const std::string& text);
void write_gains(const std::string& path, const SynthesisSolution& solution);
SynthesisSolution read_gains(const std::string& path);

/// Throws ConfigError when the gain matrices do not fit the model.
void check_gains(const SynthesisSolution& solution, const ModelSet& models);

}  // namespace attackdet
