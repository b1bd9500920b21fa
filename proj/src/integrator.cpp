#include "qhmc/integrator.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace qhmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// log(det M) via LU with partial pivoting; nullopt when det <= 0 or non-finite.
std::optional<double> log_det_positive(std::vector<std::vector<double>> m) {
  const std::size_t n = m.size();
  double sign = 1.0;
  double log_abs = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(m[r][k]) > std::abs(m[piv][k])) piv = r;
    if (piv != k) {
      std::swap(m[piv], m[k]);
      sign = -sign;
    }
    const double d = m[k][k];
    if (d == 0.0 || !std::isfinite(d)) return std::nullopt;
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::abs(d));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double factor = m[r][k] / d;
      for (std::size_t c = k; c < n; ++c) m[r][c] -= factor * m[k][c];
    }
  }
  if (sign < 0.0) return std::nullopt;
  return log_abs;
}

// log det(I + coeff * J) where J[i][j] is the Jackson partial of component i
// of `component_fn` with respect to coordinate j of `at`.
template <typename ComponentFn>
std::optional<double> submap_log_det(std::size_t d, double coeff,
                                     ComponentFn component_fn,
                                     std::span<const double> at,
                                     const DeformationParameter& dp) {
  std::vector<std::vector<double>> m(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    const ScalarField fi{
        .eval = [&](std::span<const double> w) { return component_fn(i, w); },
        .dim = d};
    for (std::size_t j = 0; j < d; ++j)
      m[i][j] = (i == j ? 1.0 : 0.0) + coeff * jackson_dx(fi, at, j, dp);
  }
  return log_det_positive(std::move(m));
}

std::optional<double> kick_log_det(const HamiltonianSpec& H,
                                   std::span<const double> x,
                                   std::span<const double> p, double half_dt,
                                   const DeformationParameter& dp) {
  // Momentum update p -> p - (dt/2) F(x, p); q-Jacobian block I - (dt/2) Dp F.
  return submap_log_det(
      H.dim(), -half_dt,
      [&](std::size_t i, std::span<const double> pv) {
        return force_component(H, x, pv, i, dp);
      },
      p, dp);
}

std::optional<double> drift_log_det(const HamiltonianSpec& H,
                                    std::span<const double> x,
                                    std::span<const double> p, double dt,
                                    const DeformationParameter& dp) {
  // Position update x -> x + dt v(x, p); q-Jacobian block I + dt Dx v.
  return submap_log_det(
      H.dim(), dt,
      [&](std::size_t i, std::span<const double> xv) {
        return velocity_component(H, xv, p, i, dp);
      },
      x, dp);
}

double safe_energy(const HamiltonianSpec& H, const PhasePoint& z) {
  const double u = H.potential_at(z.x);
  if (!std::isfinite(u)) return u;
  return u + H.kinetic_at(z.x, z.p);
}

}  // namespace

double GradientTarget::energy(std::span<const double> x,
                              std::span<const double> p) const {
  double k = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) k += p[i] * p[i] / (2.0 * mass[i]);
  return value(x) + k;
}

PhasePoint flip_momentum(const PhasePoint& z) {
  PhasePoint out = z;
  for (double& pi : out.p) pi = -pi;
  return out;
}

StepResult leapfrog_step(const PhasePoint& z, const HamiltonianSpec& H,
                         const IntegratorConfig& cfg) {
  H.validate();
  cfg.dp.validate();
  const std::size_t d = H.dim();
  if (z.x.size() != d || z.p.size() != d)
    throw std::invalid_argument("phase point dimension does not match Hamiltonian");

  StepResult out{z, 0.0, false};
  const double half = 0.5 * cfg.dt;
  try {
    double logj = 0.0;
    if (cfg.track_jacobian) {
      const auto det = kick_log_det(H, z.x, z.p, half, cfg.dp);
      if (!det) return {z, 0.0, true};
      logj += *det;
    }
    PhasePoint cur = z;
    const auto f0 = force_field(H, cur.x, cur.p, cfg.dp);
    for (std::size_t i = 0; i < d; ++i) cur.p[i] -= half * f0[i];
    if (!all_finite(cur.p)) return {cur, logj, true};

    if (cfg.track_jacobian) {
      const auto det = drift_log_det(H, cur.x, cur.p, cfg.dt, cfg.dp);
      if (!det) return {cur, logj, true};
      logj += *det;
    }
    const auto v = velocity_field(H, cur.x, cur.p, cfg.dp);
    for (std::size_t i = 0; i < d; ++i) cur.x[i] += cfg.dt * v[i];
    if (!all_finite(cur.x)) return {cur, logj, true};

    if (cfg.track_jacobian) {
      const auto det = kick_log_det(H, cur.x, cur.p, half, cfg.dp);
      if (!det) return {cur, logj, true};
      logj += *det;
    }
    const auto f1 = force_field(H, cur.x, cur.p, cfg.dp);
    for (std::size_t i = 0; i < d; ++i) cur.p[i] -= half * f1[i];
    if (!all_finite(cur.p)) return {cur, logj, true};

    out = {std::move(cur), logj, false};
  } catch (const non_finite_error&) {
    out.diverged = true;
  }
  return out;
}

TrajectoryResult integrate(const PhasePoint& z0, const HamiltonianSpec& H,
                           const IntegratorConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  TrajectoryResult res;
  res.h_trace.reserve(static_cast<std::size_t>(cfg.steps) + 1);

  PhasePoint cur = z0;
  const double h0 = safe_energy(H, cur);
  res.h_trace.push_back(h0);
  if (!all_finite(cur.x) || !all_finite(cur.p) || !std::isfinite(h0)) {
    res.end = std::move(cur);
    res.diverged = true;
    return res;
  }

  for (int step = 0; step < cfg.steps; ++step) {
    StepResult s = leapfrog_step(cur, H, cfg);
    if (s.diverged) {
      res.end = std::move(s.z);
      res.diverged = true;
      return res;
    }
    cur = std::move(s.z);
    res.log_jacobian += s.log_jacobian_increment;
    const double h = safe_energy(H, cur);
    res.h_trace.push_back(h);
    if (!std::isfinite(h)) {
      res.end = std::move(cur);
      res.diverged = true;
      return res;
    }
  }
  res.end = std::move(cur);
  return res;
}

TrajectoryResult integrate_gradient(const PhasePoint& z0,
                                    const GradientTarget& target,
                                    const IntegratorConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  cfg.dp.validate();
  const std::size_t d = target.dim();
  if (z0.x.size() != d || z0.p.size() != d)
    throw std::invalid_argument("phase point dimension does not match target");

  const double q = cfg.dp.q;
  const double force_scale = std::sqrt(q);
  const double vel_scale = (q * q + 1.0) / (2.0 * std::sqrt(q));
  const double half = 0.5 * cfg.dt;

  TrajectoryResult res;
  res.h_trace.reserve(static_cast<std::size_t>(cfg.steps) + 1);

  PhasePoint cur = z0;
  const double h0 = target.energy(cur.x, cur.p);
  res.h_trace.push_back(h0);
  if (!all_finite(cur.x) || !all_finite(cur.p) || !std::isfinite(h0)) {
    res.end = std::move(cur);
    res.diverged = true;
    return res;
  }

  auto diverge = [&res](PhasePoint z) {
    res.end = std::move(z);
    res.diverged = true;
    return res;
  };

  for (int step = 0; step < cfg.steps; ++step) {
    auto [u0, g0] = target.value_and_grad(cur.x);
    if (!std::isfinite(u0) || !all_finite(g0)) return diverge(std::move(cur));
    for (std::size_t i = 0; i < d; ++i) cur.p[i] -= half * force_scale * g0[i];

    for (std::size_t i = 0; i < d; ++i)
      cur.x[i] += cfg.dt * vel_scale * cur.p[i] / target.mass[i];
    if (!all_finite(cur.x)) return diverge(std::move(cur));

    auto [u1, g1] = target.value_and_grad(cur.x);
    if (!std::isfinite(u1) || !all_finite(g1)) return diverge(std::move(cur));
    for (std::size_t i = 0; i < d; ++i) cur.p[i] -= half * force_scale * g1[i];
    if (!all_finite(cur.p)) return diverge(std::move(cur));

    double k = 0.0;
    for (std::size_t i = 0; i < d; ++i) k += cur.p[i] * cur.p[i] / (2.0 * target.mass[i]);
    const double h = u1 + k;
    res.h_trace.push_back(h);
    if (!std::isfinite(h)) return diverge(std::move(cur));
  }
  res.end = std::move(cur);
  return res;
}

}  // namespace qhmc
