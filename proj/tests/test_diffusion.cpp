#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qhmc/diffusion.hpp"
#include "qhmc/rng.hpp"
#include "test_util.hpp"

using namespace qhmc;
using test_util::close_abs;
using test_util::close_rel;

namespace {

constexpr double kPi = std::numbers::pi;

DiffusionModel bare_model(std::size_t n, std::function<double(double)> f) {
  DiffusionModel model;
  model.grid = make_grid(n);
  model.kl = make_kl_basis(9, 1.0);
  model.sigma = 0.02;
  model.source.resize(model.grid.nodes.size());
  for (std::size_t i = 0; i < model.source.size(); ++i)
    model.source[i] = f(model.grid.nodes[i]);
  return model;
}

SyntheticDiffusion reference_problem(std::uint64_t seed) {
  return make_synthetic_diffusion(
      80, 9, 1.0, 70, 0.02, seed, [](double) { return 1.0; },
      [](double x) {
        return 0.15 * std::sin(2.0 * kPi * x) + 0.05 * std::sin(4.0 * kPi * x);
      });
}

// Dense assembly of the interior operator, for oracle solves.
std::vector<std::vector<double>> dense_operator(std::span<const double> alpha,
                                                 const Grid1D& grid) {
  const std::size_t n = grid.n;
  const double h2 = grid.h * grid.h;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double am = 0.5 * (alpha[i] + alpha[i + 1]);
    const double ap = 0.5 * (alpha[i + 1] + alpha[i + 2]);
    if (i > 0) a[i][i - 1] = -am / h2;
    a[i][i] = (am + ap) / h2;
    if (i + 1 < n) a[i][i + 1] = -ap / h2;
  }
  return a;
}

double max_error_vs(const std::vector<double>& u, const Grid1D& grid,
                    double (*exact)(double)) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    worst = std::max(worst, std::abs(u[i] - exact(grid.nodes[i])));
  return worst;
}

}  // namespace

TEST_CASE("forward solve on a manufactured problem") {
  auto model = bare_model(80, [](double x) { return kPi * kPi * std::sin(kPi * x); });
  const std::vector<double> alpha(model.grid.nodes.size(), 1.0);
  const auto u = diffusion_solve(alpha, model);

  CHECK(u.front() == 0.0);
  CHECK(u.back() == 0.0);
  const double err =
      max_error_vs(u, model.grid, [](double x) { return std::sin(kPi * x); });
  CHECK(err <= 2.0 * model.grid.h * model.grid.h);
}

TEST_CASE("forward solve converges at second order") {
  auto error_at = [](std::size_t n) {
    auto model = bare_model(n, [](double x) { return kPi * kPi * std::sin(kPi * x); });
    const std::vector<double> alpha(model.grid.nodes.size(), 1.0);
    const auto u = diffusion_solve(alpha, model);
    return max_error_vs(u, model.grid, [](double x) { return std::sin(kPi * x); });
  };
  const double ratio = error_at(80) / error_at(160);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("forward solve on a variable coefficient") {
  // alpha = 1 + x, u = sin(pi x): f = -(alpha u')' = -cos' terms assembled below.
  auto model = bare_model(120, [](double x) {
    return -kPi * std::cos(kPi * x) + (1.0 + x) * kPi * kPi * std::sin(kPi * x);
  });
  std::vector<double> alpha(model.grid.nodes.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = 1.0 + model.grid.nodes[i];
  const auto u = diffusion_solve(alpha, model);
  const double err =
      max_error_vs(u, model.grid, [](double x) { return std::sin(kPi * x); });
  CHECK(err < 5e-4);
}

TEST_CASE("forward solve degenerate cases") {
  auto model = bare_model(40, [](double) { return 0.0; });
  const std::vector<double> ones(model.grid.nodes.size(), 1.0);

  SUBCASE("zero source gives the zero solution") {
    for (double v : diffusion_solve(ones, model)) CHECK(v == 0.0);
  }
  SUBCASE("doubling the coefficient halves the solution") {
    auto loaded = bare_model(40, [](double x) { return std::exp(x); });
    const auto u1 = diffusion_solve(ones, loaded);
    const std::vector<double> twos(loaded.grid.nodes.size(), 2.0);
    const auto u2 = diffusion_solve(twos, loaded);
    for (std::size_t i = 0; i < u1.size(); ++i)
      CHECK(close_abs(u2[i], 0.5 * u1[i], 1e-14));
  }
  SUBCASE("non-positive coefficient is rejected") {
    std::vector<double> bad = ones;
    bad[7] = 0.0;
    CHECK_THROWS_AS(diffusion_solve(bad, model), std::invalid_argument);
    bad[7] = -1.0;
    CHECK_THROWS_AS(diffusion_solve(bad, model), std::invalid_argument);
  }
}

TEST_CASE("adjoint solve") {
  auto problem = reference_problem(3);
  DiffusionModel& model = problem.model;
  const std::vector<double> ones(model.grid.nodes.size(), 1.0);

  SUBCASE("zero residual gives a vanishing adjoint") {
    // Observations equal to the solution itself.
    const auto u = diffusion_solve(ones, model);
    for (std::size_t j = 0; j < model.obs_nodes.size(); ++j)
      model.data[j] = u[model.obs_nodes[j]];
    const auto lambda = adjoint_solve(ones, u, model);
    for (double v : lambda) CHECK(close_abs(v, 0.0, 1e-14));
  }

  SUBCASE("single unit-residual load matches a dense solve of the same operator") {
    DiffusionModel single = model;
    single.obs_x = {0.5};
    single.obs_nodes = {static_cast<std::size_t>(std::lround(0.5 / model.grid.h))};
    single.data = {0.0};
    std::vector<double> u(model.grid.nodes.size(), 0.0);
    u[single.obs_nodes[0]] = 1.0;  // residual of exactly one

    const auto lambda = adjoint_solve(ones, u, single);
    CHECK(lambda.front() == 0.0);
    CHECK(lambda.back() == 0.0);

    auto a = dense_operator(ones, model.grid);
    std::vector<double> rhs(model.grid.n, 0.0);
    rhs[single.obs_nodes[0] - 1] =
        1.0 / (single.sigma * single.sigma * model.grid.h);
    const auto oracle = test_util::dense_solve(std::move(a), std::move(rhs));
    for (std::size_t i = 0; i < model.grid.n; ++i)
      CHECK(close_rel(lambda[i + 1], oracle[i], 1e-10));
  }

  SUBCASE("the discrete operator is exactly self-adjoint") {
    RngStream rng(17);
    std::vector<double> alpha(model.grid.nodes.size());
    for (auto& a : alpha) a = std::exp(0.3 * rng.normal());
    const auto op = dense_operator(alpha, model.grid);
    std::vector<double> v(model.grid.n), w(model.grid.n);
    for (auto& x : v) x = rng.normal();
    for (auto& x : w) x = rng.normal();
    auto apply = [&](const std::vector<double>& y) {
      std::vector<double> out(model.grid.n, 0.0);
      for (std::size_t i = 0; i < model.grid.n; ++i)
        for (std::size_t j = 0; j < model.grid.n; ++j) out[i] += op[i][j] * y[j];
      return out;
    };
    const auto av = apply(v);
    const auto aw = apply(w);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < model.grid.n; ++i) {
      lhs += w[i] * av[i];
      rhs += aw[i] * v[i];
    }
    CHECK(close_rel(lhs, rhs, 1e-10));
  }
}

TEST_CASE("nodal gradient field") {
  auto problem = reference_problem(5);
  const Grid1D& grid = problem.model.grid;

  SUBCASE("zero adjoint gives a zero field") {
    std::vector<double> u(grid.nodes.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] = std::sin(kPi * grid.nodes[i]);
    const std::vector<double> lambda(grid.nodes.size(), 0.0);
    for (double g : functional_gradient_field(u, lambda, grid)) CHECK(g == 0.0);
  }

  SUBCASE("manufactured fields match the analytic product") {
    std::vector<double> u(grid.nodes.size()), lambda(grid.nodes.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = grid.nodes[i];
      u[i] = std::sin(kPi * x);
      lambda[i] = x * (1.0 - x);
    }
    const auto g = functional_gradient_field(u, lambda, grid);
    for (std::size_t i = 1; i <= grid.n; ++i) {
      const double x = grid.nodes[i];
      const double exact = -kPi * std::cos(kPi * x) * (1.0 - 2.0 * x);
      CHECK_MESSAGE(close_abs(g[i], exact, 20.0 * grid.h * grid.h), "node ", i);
    }
  }
}

TEST_CASE("nodal perturbation quotient") {
  auto problem = reference_problem(7);
  const DiffusionModel& model = problem.model;
  RngStream rng(23);
  std::vector<double> theta(model.kl.n_modes);
  for (auto& t : theta) t = 0.5 * rng.normal();
  const auto alpha = kl_expand(theta, model.kl, model.grid);

  SUBCASE("q = 1 is rejected") {
    CHECK_THROWS_AS(direct_jackson_perturbation(alpha, 20, 1.0, model),
                    std::invalid_argument);
  }

  SUBCASE("zero residual leaves only the second-order term") {
    DiffusionModel clean = model;
    const auto u = diffusion_solve(alpha, clean);
    for (std::size_t j = 0; j < clean.obs_nodes.size(); ++j)
      clean.data[j] = u[clean.obs_nodes[j]];
    const double q = 1.01;
    const double quot = direct_jackson_perturbation(alpha, 30, q, clean);
    CHECK(std::abs(quot) <= 10.0 * std::abs(q * q - 1.0));
  }

  SUBCASE("first order dominates: doubling q^2 - 1 leaves the quotient stable") {
    const double q1 = 1.0 + 1e-4;
    const double q2 = std::sqrt(2.0 * q1 * q1 - 1.0);  // (q2^2 - 1) = 2 (q1^2 - 1)
    const double a = direct_jackson_perturbation(alpha, 35, q1, model);
    const double b = direct_jackson_perturbation(alpha, 35, q2, model);
    CHECK(close_rel(a, b, 0.05));
  }

  SUBCASE("agrees with the adjoint field in the shared convention") {
    const double q = 0.9999;
    const auto state = compute_field_state(alpha, model);
    const auto g = functional_gradient_field(state.u, state.lambda, model.grid);
    const double tol = std::max(0.05, 10.0 * std::abs(q * q - 1.0));
    const double weight = model.sigma * model.sigma * model.grid.h;
    std::size_t checked = 0;
    for (std::size_t node = 1; node <= model.grid.n; ++node) {
      if (std::abs(g[node]) < 1e-8) continue;
      const double quot = direct_jackson_perturbation(alpha, node, q, model);
      CHECK_MESSAGE(close_rel(quot / weight, g[node], tol), "node ", node,
                    " quotient/weight=", quot / weight, " field=", g[node]);
      ++checked;
    }
    CHECK(checked > model.grid.n / 2);

    // Sign agreement at a spread of nodes.
    for (std::size_t node : {5ul, 13ul, 27ul, 41ul, 55ul, 63ul, 71ul}) {
      if (std::abs(g[node]) < 1e-8) continue;
      const double quot = direct_jackson_perturbation(alpha, node, q, model);
      CHECK(quot * g[node] > 0.0);
    }
  }
}

TEST_CASE("KL expansion") {
  const auto grid = make_grid(80);
  const auto kl = make_kl_basis(9, 1.0);

  SUBCASE("zero coefficients give the unit field") {
    const std::vector<double> theta(9, 0.0);
    for (double a : kl_expand(theta, kl, grid)) CHECK(a == 1.0);
  }
  SUBCASE("eigenvalues follow the inverse-Laplacian power law") {
    CHECK(close_rel(std::sqrt(kl.eigenvalues[0]), 1.0 / kPi, 1e-12));
    CHECK(close_rel(kl.eigenvalues[1], std::pow(2.0 * kPi, -2.0), 1e-12));
    for (std::size_t k = 1; k < kl.eigenvalues.size(); ++k)
      CHECK(kl.eigenvalues[k] < kl.eigenvalues[k - 1]);
  }
  SUBCASE("single-mode value at the midpoint") {
    std::vector<double> theta(9, 0.0);
    theta[0] = 1.0;
    const auto grid_mid = make_grid(1);  // nodes 0, 0.5, 1
    const auto alpha = kl_expand(theta, kl, grid_mid);
    const double kappa_mid = (1.0 / kPi) * std::numbers::sqrt2 * std::sin(kPi * 0.5);
    CHECK(close_abs(std::log(alpha[1]), 0.450158, 1e-5));
    CHECK(close_rel(std::log(alpha[1]), kappa_mid, 1e-12));
  }
  SUBCASE("coefficient count must match the basis") {
    const std::vector<double> theta(4, 0.0);
    CHECK_THROWS_AS(kl_expand(theta, kl, grid), std::invalid_argument);
  }
}

TEST_CASE("posterior potential and gradient") {
  auto problem = reference_problem(11);
  const DiffusionModel& model = problem.model;

  SUBCASE("zero coefficients on zero-residual data") {
    DiffusionModel clean = model;
    const std::vector<double> theta(model.kl.n_modes, 0.0);
    const auto alpha = kl_expand(theta, clean.kl, clean.grid);
    const auto u = diffusion_solve(alpha, clean);
    for (std::size_t j = 0; j < clean.obs_nodes.size(); ++j)
      clean.data[j] = u[clean.obs_nodes[j]];
    const auto pg = diffusion_posterior_potential(theta, clean);
    CHECK(pg.value == 0.0);
    for (double g : pg.grad) CHECK(close_abs(g, 0.0, 1e-10));
  }

  SUBCASE("adjoint gradient matches finite differences of the potential") {
    RngStream rng(31);
    std::vector<double> theta(model.kl.n_modes);
    for (auto& t : theta) t = 0.4 * rng.normal();
    const auto pg = diffusion_posterior_potential(theta, model);

    const double h = 1e-5;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      auto tp = theta;
      tp[k] += h;
      auto tm = theta;
      tm[k] -= h;
      const double fd = (diffusion_potential_value(tp, model) -
                         diffusion_potential_value(tm, model)) /
                        (2.0 * h);
      CHECK_MESSAGE(close_rel(pg.grad[k], fd, 1e-3), "mode ", k, " adjoint=",
                    pg.grad[k], " fd=", fd);
    }
  }

  SUBCASE("value path equals the gradient path's value") {
    RngStream rng(37);
    std::vector<double> theta(model.kl.n_modes);
    for (auto& t : theta) t = 0.3 * rng.normal();
    CHECK(diffusion_potential_value(theta, model) ==
          diffusion_posterior_potential(theta, model).value);
  }
}

TEST_CASE("synthetic problem generation") {
  const auto a = reference_problem(4242);
  const auto b = reference_problem(4242);
  CHECK(a.model.data == b.model.data);
  CHECK(a.truth.alpha == b.truth.alpha);

  const auto c = reference_problem(4243);
  CHECK(c.model.data != a.model.data);

  REQUIRE(a.model.obs_nodes.size() == 70);
  for (std::size_t node : a.model.obs_nodes) {
    CHECK(node >= 1);
    CHECK(node <= a.model.grid.n);
  }
  // The truth lives inside the retained mode span (modes 2 and 4).
  CHECK(a.truth.kappa[0] == 0.0);
  const double mid = a.truth.kappa[40];  // x ~ 0.494
  CHECK(std::abs(mid) < 0.25);
}
