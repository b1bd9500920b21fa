// 1-d diffusion-coefficient reconstruction: conservative finite-difference
// forward/adjoint solves on [0, 1] with homogeneous Dirichlet conditions, a
// sine Karhunen-Loeve prior on the log coefficient, and the adjoint-assembled
// posterior gradient.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qhmc/integrator.hpp"

namespace qhmc {

// Uniform grid over [0, 1] with n interior nodes; nodes include the two
// boundary points, so grid fields have n + 2 entries.
struct Grid1D {
  std::size_t n = 0;
  double h = 0.0;
  std::vector<double> nodes;
};

Grid1D make_grid(std::size_t n_interior);

// Truncated eigensystem of the (-Laplace)^{-s} covariance: eigenvalues
// lambda_k = (k pi)^{-2s} with modes phi_k(x) = sqrt(2) sin(k pi x).
struct KLBasis {
  std::size_t n_modes = 0;
  double smoothness = 1.0;
  std::vector<double> eigenvalues;
};

KLBasis make_kl_basis(std::size_t n_modes, double smoothness);

struct DiffusionModel {
  Grid1D grid;
  std::vector<double> source;         // f at every grid node
  std::vector<double> obs_x;          // observation coordinates in (0, 1)
  std::vector<std::size_t> obs_nodes; // nearest grid node per observation
  double sigma = 0.02;
  std::vector<double> data;
  KLBasis kl;
};

// Forward/adjoint/coefficient fields bundled for one posterior evaluation.
struct FieldState {
  std::vector<double> u;
  std::vector<double> lambda;
  std::vector<double> alpha;
};

// Solves -(alpha u')' = f with u(0) = u(1) = 0 using the conservative
// three-point scheme with arithmetic half-node averages of alpha and a
// tridiagonal direct solve. alpha must be positive on the grid.
std::vector<double> diffusion_solve(std::span<const double> alpha,
                                    const DiffusionModel& model);

// Same operator with delta loads: observation j contributes
// (u(x_j) - d_j) / (sigma^2 h) at its nearest grid node.
std::vector<double> adjoint_solve(std::span<const double> alpha,
                                  std::span<const double> u,
                                  const DiffusionModel& model);

// Nodal field -(grad u)(grad lambda): slope products per grid interval,
// averaged over the two intervals touching each node, one-sided at the
// boundary nodes. In the convention used here it equals the derivative of
// J/sigma^2 with respect to the nodal coefficient value divided by the grid
// weight h (density, not mass: the nodal-perturbation quotient below carries
// an extra factor sigma^2 h).
std::vector<double> functional_gradient_field(std::span<const double> u,
                                              std::span<const double> lambda,
                                              const Grid1D& grid);

// Half the sum of squared observation residuals of u.
double diffusion_misfit(std::span<const double> u, const DiffusionModel& model);

// Brute-force Jackson quotient: rescale the single nodal value alpha(node) by
// q^2, re-solve, and return (J' - J) / ((q^2 - 1) alpha(node)). This is the
// oracle for the adjoint field: quotient ~= sigma^2 h * gradient_field(node).
double direct_jackson_perturbation(std::span<const double> alpha,
                                   std::size_t node, double q,
                                   const DiffusionModel& model);

// alpha = exp(sum_k theta_k sqrt(lambda_k) sqrt(2) sin(k pi x)) nodewise;
// theta carries whitened (standard normal) coefficients.
std::vector<double> kl_expand(std::span<const double> theta, const KLBasis& kl,
                              const Grid1D& grid);

// Forward + adjoint solve for the coefficient field alpha(theta).
FieldState compute_field_state(std::span<const double> alpha,
                               const DiffusionModel& model);

struct PotentialGradient {
  double value = 0.0;
  std::vector<double> grad;
};

// U(theta) = J(alpha(theta)) / sigma^2 + |theta|^2 / 2 and its gradient
// assembled from one forward and one adjoint solve:
//   grad_k = sum_i h g(x_i) alpha(x_i) sqrt(lambda_k) sqrt(2) sin(k pi x_i) + theta_k
// with g the nodal gradient field (whose adjoint load already carries 1/sigma^2).
PotentialGradient diffusion_posterior_potential(std::span<const double> theta,
                                                const DiffusionModel& model);

// U(theta) alone (single forward solve).
double diffusion_potential_value(std::span<const double> theta,
                                 const DiffusionModel& model);

// The posterior as a gradient-based sampling target with unit masses.
GradientTarget diffusion_target(const DiffusionModel& model);

struct DiffusionTruth {
  std::vector<double> kappa;  // true log coefficient on the grid
  std::vector<double> alpha;  // exp(kappa)
  std::vector<double> u;      // noise-free forward solution
};

struct SyntheticDiffusion {
  DiffusionModel model;
  DiffusionTruth truth;
};

// Builds the grid, KL basis, equispaced observation layout, and noisy data
// for a given true log coefficient.
SyntheticDiffusion make_synthetic_diffusion(
    std::size_t grid_n, std::size_t n_modes, double smoothness,
    std::size_t n_obs, double sigma, std::uint64_t noise_seed,
    const std::function<double(double)>& source,
    const std::function<double(double)>& true_kappa);

}  // namespace qhmc
