// Configuration-driven experiment runners: q-sweeps, the force table, single
// chains, and the two inverse-problem pipelines. Every run writes CSV data
// series plus a metadata JSON document that can be replayed as a config.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qhmc/config.hpp"
#include "qhmc/diagnostics.hpp"
#include "qhmc/diffusion.hpp"
#include "qhmc/gravity.hpp"

namespace qhmc {

struct SweepRun {
  double q = 0.0;
  std::uint64_t seed = 0;
  ChainOutput chain;
  MixingReport report;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::filesystem::path dir;
};

// One chain per q value, seeded with cfg.seed XOR index so sequential and
// concurrent execution produce identical runs. Writes sweep.csv with columns
// q,time_s,accept_rate,ess,iat,ess_per_time plus per-q trace/ACF/histogram
// series and metadata.json.
SweepResult run_sweep(const ExperimentConfig& cfg);

// Single chain at q_values[0] (default 1.0); writes the same per-run series.
SweepResult run_single_chain(const ExperimentConfig& cfg);

struct ForceTableRow {
  double q = 0.0;
  double reference_point = 0.0;  // q^2 x; reported as N/A at q = 1
  double jackson_derivative = 0.0;
  double force_magnitude = 0.0;
};

std::vector<ForceTableRow> force_table_rows(double x,
                                            std::span<const double> q_values);

// Writes force_table.csv for the octic potential at cfg.force_x.
std::vector<ForceTableRow> run_force_table(const ExperimentConfig& cfg);

struct GravityRun {
  double q = 0.0;
  double accept_rate = 0.0;
  double post_mean = 0.0;
  double post_std = 0.0;
  double post_mode = 0.0;  // histogram peak of the post-burn-in samples
  ChainOutput chain;
};

struct GravityResult {
  GravityModel model;
  double true_depth = 0.0;
  std::vector<GravityRun> runs;
  std::filesystem::path dir;
};

GravityResult run_gravity(const ExperimentConfig& cfg);

struct DiffusionResult {
  double q = 0.0;
  double accept_rate = 0.0;
  double post_adapt_accept_rate = 0.0;
  double final_dt = 0.0;
  double rmse = 0.0;         // posterior-mean coefficient vs truth
  double correlation = 0.0;  // Pearson, posterior mean vs truth
  std::vector<double> alpha_mean;
  std::vector<double> alpha_sd;
  std::vector<double> theta_mean;
  ChainOutput chain;
  SyntheticDiffusion problem;
  std::filesystem::path dir;
};

DiffusionResult run_diffusion(const ExperimentConfig& cfg);

// Dispatches on cfg.target ("gravity" or "diffusion").
void run_inverse(const ExperimentConfig& cfg);

// Executes cfg.kind; the entry point used by the command line tool.
void run_experiment(const ExperimentConfig& cfg);

// Histogram peak location over post-burn-in values (equal-width bins).
double histogram_mode(std::span<const double> values, std::size_t bins);

}  // namespace qhmc
