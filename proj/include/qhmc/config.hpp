// Experiment configuration: a flat key = value file with [sections] for human
// input, and a JSON form embedded in every run's metadata so runs can be
// replayed bit-identically.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qhmc/sampler.hpp"

#include "json.hpp"

namespace qhmc {

struct GravitySettings {
  double true_depth = 0.2;
  double x_f = 0.3;
  std::vector<double> sensors = {0.0, 0.25, 0.5, 0.75, 1.0};
  double sigma = 0.1;
  double prior_mean = 0.3;
  double prior_std = 0.05;
  std::uint64_t data_seed = 2025;
};

struct DiffusionSettings {
  std::size_t grid_n = 80;
  std::size_t n_modes = 9;
  double smoothness = 1.0;
  std::size_t n_obs = 70;
  double sigma = 0.02;
  std::uint64_t data_seed = 7;
};

struct ExperimentConfig {
  std::string kind = "sweep";  // sweep | chain | force-table | inverse
  std::string target = "octic";  // potential name, or gravity | diffusion
  std::vector<double> q_values;  // empty: default grid for the target
  double dt = 0.1;
  int steps = 10;
  int n_samples = 10000;
  int burn_in = 0;
  std::uint64_t seed = 1;
  std::vector<double> x0;  // empty: target default
  std::string output_dir = "out";
  std::size_t analyzed_coordinate = 0;
  bool track_jacobian = true;
  int jobs = 1;
  std::optional<AdaptConfig> adapt;
  double force_x = 1.7;  // evaluation point for the force table
  GravitySettings gravity;
  DiffusionSettings diffusion;
};

// Parses either the key = value format (see README for the grammar) or a
// metadata JSON document produced by a previous run.
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

// The sweep grids used when q_values is left empty: 20 evenly spaced points
// from 0 to 1.2 (one position dimension) or 0 to 1.1 (two dimensions), plus
// the classical point q = 1 inserted in order.
std::vector<double> default_q_grid(std::size_t target_dim);

}  // namespace qhmc
