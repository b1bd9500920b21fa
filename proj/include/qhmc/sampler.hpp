// The q-HMC transition kernel and chain driver: Gaussian momentum refresh,
// q-leapfrog proposal, Jacobian-weighted Metropolis correction, and
// Robbins-Monro step-size adaptation.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qhmc/integrator.hpp"
#include "qhmc/rng.hpp"

namespace qhmc {

struct AdaptConfig {
  double target_accept = 0.5;  // strictly inside (0, 1)
  int adapt_steps = 0;
  double learning_rate = 0.05;
};

struct SamplerConfig {
  IntegratorConfig integrator;
  int n_samples = 1000;
  int burn_in = 0;  // must stay below n_samples
  std::uint64_t seed = 0;
  std::optional<AdaptConfig> adapt;

  void validate() const;
};

struct ChainOutput {
  std::size_t dim = 0;
  std::vector<double> samples;  // n_samples x dim, row-major
  std::vector<std::uint8_t> accepted;
  std::vector<double> h_init_trace;
  std::vector<double> h_final_trace;
  std::vector<double> log_jacobian_trace;
  double wall_time_s = 0.0;
  double final_dt = 0.0;

  std::size_t size() const { return dim == 0 ? 0 : samples.size() / dim; }
  double sample(std::size_t row, std::size_t col) const {
    return samples[row * dim + col];
  }
  std::vector<double> coordinate(std::size_t col) const;
  double accept_rate() const;
};

// Draw p with independent components p_i ~ Normal(0, m_i); requires the
// quadratic kinetic form.
std::vector<double> sample_momentum(std::span<const double> x,
                                    const HamiltonianSpec& H, RngStream& rng);

// min(1, exp(log_jacobian + h_init - h_final)); 0 whenever h_final is
// non-finite (divergent proposals are always rejected).
double accept_probability(double h_init, double h_final, double log_jacobian);

struct HmcStepResult {
  std::vector<double> x_next;
  bool accepted = false;
  double h_init = 0.0;
  double h_final = 0.0;
  double log_jacobian = 0.0;
};

// One momentum refresh + trajectory + Metropolis decision. The stream is
// consumed in a fixed order: d momentum normals, then one acceptance uniform.
HmcStepResult hmc_step(std::span<const double> x_curr, const HamiltonianSpec& H,
                       const SamplerConfig& cfg, RngStream& rng);

// Executes cfg.n_samples transitions from x0. With cfg.adapt present, log dt
// moves by learning_rate / it^0.6 * (accept_indicator - target_accept) after
// each of the first adapt_steps iterations and is frozen afterwards.
// Wall time covers the sampling loop only.
ChainOutput run_chain(std::span<const double> x0, const HamiltonianSpec& H,
                      const SamplerConfig& cfg);

// Same chain driver for gradient-based targets (classical force scaled by the
// closed-form Jackson factors); used by the PDE posterior pipeline.
ChainOutput run_chain(std::span<const double> x0, const GradientTarget& target,
                      const SamplerConfig& cfg);

}  // namespace qhmc
