// Point-mass gravity depth estimation: forward kernel, Gaussian-noise data
// generation, and the posterior potential sampled by the chain.
#pragma once

#include <cstdint>
#include <vector>

#include "qhmc/qcalc.hpp"

namespace qhmc {

struct GravityModel {
  double x_f = 0.3;                  // fixed horizontal source location
  std::vector<double> sensors;       // sensor coordinates x_s
  double sigma = 0.1;                // observation noise std
  std::vector<double> data;          // observed anomalies, one per sensor
  double prior_mean = 0.3;
  double prior_std = 0.05;
};

// Anomaly h / ((x_s - x_f)^2 + h^2)^{3/2} at sensor x_s for source depth h.
double gravity_forward(double h, double x_s, double x_f);

// Negative log posterior up to a constant:
//   sum_j (g(h, x_s_j) - d_j)^2 / (2 sigma^2) + (h - prior_mean)^2 / (2 prior_std^2).
// Returns +inf for h <= 0 so the sampler rejects out-of-domain proposals.
double gravity_potential(double h, const GravityModel& model);

// Synthetic observations d_j = g(true_depth, x_s_j) + Normal(0, sigma^2) from
// a dedicated seeded stream.
GravityModel make_synthetic_gravity(double true_depth, double x_f,
                                    std::vector<double> sensors, double sigma,
                                    double prior_mean, double prior_std,
                                    std::uint64_t noise_seed);

// The model potential as a 1-d scalar field usable as a sampling target.
ScalarField gravity_potential_field(const GravityModel& model);

}  // namespace qhmc
