#include "qhmc/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "qhmc/rng.hpp"

namespace qhmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Thomas algorithm for a diagonally dominant tridiagonal system
// a_i y_{i-1} + b_i y_i + c_i y_{i+1} = r_i (a_0 and c_{n-1} unused).
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                      std::vector<double> c, std::vector<double> r) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    r[i] -= w * r[i - 1];
  }
  std::vector<double> y(n);
  y[n - 1] = r[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) y[i] = (r[i] - c[i] * y[i + 1]) / b[i];
  return y;
}

void check_alpha(std::span<const double> alpha, const Grid1D& grid) {
  if (alpha.size() != grid.nodes.size())
    throw std::invalid_argument("coefficient field size does not match grid");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument("coefficient field must be positive on the grid");
}

// Interior solve of the conservative scheme for an arbitrary interior load.
std::vector<double> solve_operator(std::span<const double> alpha, const Grid1D& grid,
                                   std::span<const double> interior_rhs) {
  const std::size_t n = grid.n;
  const double h2 = grid.h * grid.h;
  std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double am = 0.5 * (alpha[i] + alpha[i + 1]);      // between nodes i and i+1
    const double ap = 0.5 * (alpha[i + 1] + alpha[i + 2]);  // between nodes i+1 and i+2
    sub[i] = -am;
    diag[i] = am + ap;
    sup[i] = -ap;
    rhs[i] = h2 * interior_rhs[i];
  }
  std::vector<double> y = solve_tridiagonal(std::move(sub), std::move(diag),
                                            std::move(sup), std::move(rhs));
  std::vector<double> full(grid.nodes.size(), 0.0);
  std::copy(y.begin(), y.end(), full.begin() + 1);
  return full;
}

}  // namespace

Grid1D make_grid(std::size_t n_interior) {
  if (n_interior == 0) throw std::invalid_argument("grid needs at least one interior node");
  Grid1D grid;
  grid.n = n_interior;
  grid.h = 1.0 / static_cast<double>(n_interior + 1);
  grid.nodes.resize(n_interior + 2);
  for (std::size_t i = 0; i < grid.nodes.size(); ++i)
    grid.nodes[i] = static_cast<double>(i) * grid.h;
  return grid;
}

KLBasis make_kl_basis(std::size_t n_modes, double smoothness) {
  if (n_modes == 0) throw std::invalid_argument("need at least one mode");
  if (!(smoothness > 0.0)) throw std::invalid_argument("smoothness must be positive");
  KLBasis kl{.n_modes = n_modes, .smoothness = smoothness, .eigenvalues = {}};
  kl.eigenvalues.reserve(n_modes);
  for (std::size_t k = 1; k <= n_modes; ++k)
    kl.eigenvalues.push_back(std::pow(static_cast<double>(k) * kPi, -2.0 * smoothness));
  return kl;
}

std::vector<double> diffusion_solve(std::span<const double> alpha,
                                    const DiffusionModel& model) {
  check_alpha(alpha, model.grid);
  std::vector<double> rhs(model.grid.n);
  for (std::size_t i = 0; i < model.grid.n; ++i) rhs[i] = model.source[i + 1];
  return solve_operator(alpha, model.grid, rhs);
}

std::vector<double> adjoint_solve(std::span<const double> alpha,
                                  std::span<const double> u,
                                  const DiffusionModel& model) {
  check_alpha(alpha, model.grid);
  std::vector<double> rhs(model.grid.n, 0.0);
  const double scale = 1.0 / (model.sigma * model.sigma * model.grid.h);
  for (std::size_t j = 0; j < model.obs_nodes.size(); ++j) {
    const std::size_t node = model.obs_nodes[j];
    rhs[node - 1] += (u[node] - model.data[j]) * scale;
  }
  return solve_operator(alpha, model.grid, rhs);
}

std::vector<double> functional_gradient_field(std::span<const double> u,
                                              std::span<const double> lambda,
                                              const Grid1D& grid) {
  const std::size_t m = grid.nodes.size();
  if (u.size() != m || lambda.size() != m)
    throw std::invalid_argument("field size does not match grid");
  std::vector<double> g(m);
  const double h2 = grid.h * grid.h;
  // Interval-wise slope products, averaged over the two intervals touching
  // each node (one-sided at the boundary nodes). The adjoint carries a slope
  // kink at every observation node, so pairing slopes per interval keeps the
  // field consistent with the discrete functional; for smooth fields it is a
  // second-order discretization of -(grad u)(grad lambda), same as the
  // central product.
  auto interval = [&](std::size_t i) {  // product over interval [i, i+1]
    return (u[i + 1] - u[i]) * (lambda[i + 1] - lambda[i]) / h2;
  };
  g[0] = -interval(0);
  for (std::size_t i = 1; i + 1 < m; ++i)
    g[i] = -0.5 * (interval(i - 1) + interval(i));
  g[m - 1] = -interval(m - 2);
  return g;
}

double diffusion_misfit(std::span<const double> u, const DiffusionModel& model) {
  double j = 0.0;
  for (std::size_t i = 0; i < model.obs_nodes.size(); ++i) {
    const double r = u[model.obs_nodes[i]] - model.data[i];
    j += r * r;
  }
  return 0.5 * j;
}

double direct_jackson_perturbation(std::span<const double> alpha,
                                   std::size_t node, double q,
                                   const DiffusionModel& model) {
  if (q == 1.0) throw std::invalid_argument("the Jackson quotient needs q != 1");
  check_alpha(alpha, model.grid);
  if (node >= alpha.size()) throw std::invalid_argument("node index out of range");

  const std::vector<double> u = diffusion_solve(alpha, model);
  const double j0 = diffusion_misfit(u, model);

  std::vector<double> perturbed(alpha.begin(), alpha.end());
  perturbed[node] *= q * q;
  const std::vector<double> up = diffusion_solve(perturbed, model);
  const double j1 = diffusion_misfit(up, model);

  return (j1 - j0) / ((q * q - 1.0) * alpha[node]);
}

std::vector<double> kl_expand(std::span<const double> theta, const KLBasis& kl,
                              const Grid1D& grid) {
  if (theta.size() != kl.n_modes)
    throw std::invalid_argument("coefficient count does not match mode count");
  std::vector<double> alpha(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    double kappa = 0.0;
    for (std::size_t k = 0; k < kl.n_modes; ++k)
      kappa += theta[k] * std::sqrt(kl.eigenvalues[k]) * std::numbers::sqrt2 *
               std::sin(static_cast<double>(k + 1) * kPi * grid.nodes[i]);
    alpha[i] = std::exp(kappa);
  }
  return alpha;
}

FieldState compute_field_state(std::span<const double> alpha,
                               const DiffusionModel& model) {
  FieldState state;
  state.alpha.assign(alpha.begin(), alpha.end());
  state.u = diffusion_solve(alpha, model);
  state.lambda = adjoint_solve(alpha, state.u, model);
  return state;
}

PotentialGradient diffusion_posterior_potential(std::span<const double> theta,
                                                const DiffusionModel& model) {
  const std::vector<double> alpha = kl_expand(theta, model.kl, model.grid);
  const FieldState state = compute_field_state(alpha, model);

  PotentialGradient out;
  double theta_sq = 0.0;
  for (double t : theta) theta_sq += t * t;
  out.value = diffusion_misfit(state.u, model) / (model.sigma * model.sigma) +
              0.5 * theta_sq;

  const std::vector<double> g =
      functional_gradient_field(state.u, state.lambda, model.grid);
  out.grad.resize(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= model.grid.n; ++i)
      acc += model.grid.h * g[i] * alpha[i] * std::sqrt(model.kl.eigenvalues[k]) *
             std::numbers::sqrt2 *
             std::sin(static_cast<double>(k + 1) * kPi * model.grid.nodes[i]);
    out.grad[k] = acc + theta[k];
  }
  return out;
}

double diffusion_potential_value(std::span<const double> theta,
                                 const DiffusionModel& model) {
  const std::vector<double> alpha = kl_expand(theta, model.kl, model.grid);
  const std::vector<double> u = diffusion_solve(alpha, model);
  double theta_sq = 0.0;
  for (double t : theta) theta_sq += t * t;
  return diffusion_misfit(u, model) / (model.sigma * model.sigma) + 0.5 * theta_sq;
}

GradientTarget diffusion_target(const DiffusionModel& model) {
  const auto shared = std::make_shared<const DiffusionModel>(model);
  return GradientTarget{
      .value = [shared](std::span<const double> theta) {
        return diffusion_potential_value(theta, *shared);
      },
      .value_and_grad =
          [shared](std::span<const double> theta) {
            PotentialGradient pg = diffusion_posterior_potential(theta, *shared);
            return std::make_pair(pg.value, std::move(pg.grad));
          },
      .mass = std::vector<double>(model.kl.n_modes, 1.0)};
}

SyntheticDiffusion make_synthetic_diffusion(
    std::size_t grid_n, std::size_t n_modes, double smoothness,
    std::size_t n_obs, double sigma, std::uint64_t noise_seed,
    const std::function<double(double)>& source,
    const std::function<double(double)>& true_kappa) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (n_obs == 0) throw std::invalid_argument("need at least one observation");

  SyntheticDiffusion out;
  DiffusionModel& model = out.model;
  model.grid = make_grid(grid_n);
  model.kl = make_kl_basis(n_modes, smoothness);
  model.sigma = sigma;

  model.source.resize(model.grid.nodes.size());
  for (std::size_t i = 0; i < model.source.size(); ++i)
    model.source[i] = source(model.grid.nodes[i]);

  // Observation points equispaced over the open interval, pinned to the
  // nearest grid node.
  model.obs_x.resize(n_obs);
  model.obs_nodes.resize(n_obs);
  for (std::size_t j = 0; j < n_obs; ++j) {
    const double x = static_cast<double>(j + 1) / static_cast<double>(n_obs + 1);
    model.obs_x[j] = x;
    const auto node = static_cast<std::size_t>(std::lround(x / model.grid.h));
    model.obs_nodes[j] = std::clamp<std::size_t>(node, 1, model.grid.n);
  }

  out.truth.kappa.resize(model.grid.nodes.size());
  out.truth.alpha.resize(model.grid.nodes.size());
  for (std::size_t i = 0; i < model.grid.nodes.size(); ++i) {
    out.truth.kappa[i] = true_kappa(model.grid.nodes[i]);
    out.truth.alpha[i] = std::exp(out.truth.kappa[i]);
  }
  out.truth.u = diffusion_solve(out.truth.alpha, model);

  RngStream rng(noise_seed);
  model.data.resize(n_obs);
  for (std::size_t j = 0; j < n_obs; ++j)
    model.data[j] = out.truth.u[model.obs_nodes[j]] + sigma * rng.normal();
  return out;
}

}  // namespace qhmc
