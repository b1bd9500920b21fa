#include "qhmc/sampler.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qhmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SamplerConfig::validate() const {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (burn_in < 0 || burn_in >= n_samples)
    throw std::invalid_argument("burn_in must be non-negative and below n_samples");
  if (!(integrator.dt > 0.0) || !std::isfinite(integrator.dt))
    throw std::invalid_argument("step size must be positive and finite");
  if (integrator.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (adapt) {
    if (!(adapt->target_accept > 0.0) || !(adapt->target_accept < 1.0))
      throw std::invalid_argument("target acceptance must lie strictly inside (0, 1)");
    if (adapt->adapt_steps < 1) throw std::invalid_argument("adapt_steps must be >= 1");
    if (!(adapt->learning_rate > 0.0))
      throw std::invalid_argument("learning rate must be positive");
  }
}

std::vector<double> ChainOutput::coordinate(std::size_t col) const {
  if (col >= dim) throw std::invalid_argument("coordinate index out of range");
  const std::size_t n = size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = samples[i * dim + col];
  return out;
}

double ChainOutput::accept_rate() const {
  if (accepted.empty()) return 0.0;
  std::size_t acc = 0;
  for (auto a : accepted) acc += a;
  return static_cast<double>(acc) / static_cast<double>(accepted.size());
}

std::vector<double> sample_momentum(std::span<const double> x,
                                    const HamiltonianSpec& H, RngStream& rng) {
  if (!H.separable)
    throw std::invalid_argument("momentum refresh requires the quadratic kinetic form");
  if (x.size() != H.dim())
    throw std::invalid_argument("position dimension does not match Hamiltonian");
  std::vector<double> p(H.dim());
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = std::sqrt(H.mass[i]) * rng.normal();
  return p;
}

double accept_probability(double h_init, double h_final, double log_jacobian) {
  if (!std::isfinite(h_final) || !std::isfinite(log_jacobian)) return 0.0;
  const double log_ratio = log_jacobian + h_init - h_final;
  if (std::isnan(log_ratio)) return 0.0;
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(log_ratio);
}

namespace {

// Shared transition logic; `momentum` draws p, `trajectory` runs the proposal.
template <typename MomentumFn, typename TrajectoryFn>
HmcStepResult step_impl(std::span<const double> x_curr, MomentumFn momentum,
                        TrajectoryFn trajectory, RngStream& rng) {
  HmcStepResult out;
  const std::vector<double> p = momentum(x_curr, rng);
  PhasePoint z0{std::vector<double>(x_curr.begin(), x_curr.end()), p};

  TrajectoryResult traj = trajectory(z0);
  out.h_init = traj.h_trace.front();
  out.h_final = traj.diverged ? kInf : traj.h_trace.back();
  out.log_jacobian = traj.diverged ? 0.0 : traj.log_jacobian;

  const double alpha =
      traj.diverged ? 0.0 : accept_probability(out.h_init, out.h_final, out.log_jacobian);
  const double u = rng.uniform01();
  out.accepted = u < alpha;
  out.x_next = out.accepted ? std::move(traj.end.x)
                            : std::vector<double>(x_curr.begin(), x_curr.end());
  return out;
}

template <typename StepFn>
ChainOutput chain_impl(std::span<const double> x0, std::size_t dim,
                       const SamplerConfig& cfg, StepFn step) {
  cfg.validate();
  if (x0.size() != dim)
    throw std::invalid_argument("initial position dimension mismatch");

  ChainOutput out;
  out.dim = dim;
  const std::size_t n = static_cast<std::size_t>(cfg.n_samples);
  out.samples.reserve(n * dim);
  out.accepted.reserve(n);
  out.h_init_trace.reserve(n);
  out.h_final_trace.reserve(n);
  out.log_jacobian_trace.reserve(n);

  RngStream rng(cfg.seed);
  IntegratorConfig live = cfg.integrator;
  double log_dt = std::log(live.dt);
  std::vector<double> x(x0.begin(), x0.end());

  const auto t0 = std::chrono::steady_clock::now();
  for (int it = 1; it <= cfg.n_samples; ++it) {
    HmcStepResult res = step(x, live, rng);
    x = res.x_next;
    out.samples.insert(out.samples.end(), x.begin(), x.end());
    out.accepted.push_back(res.accepted ? 1 : 0);
    out.h_init_trace.push_back(res.h_init);
    out.h_final_trace.push_back(res.h_final);
    out.log_jacobian_trace.push_back(res.log_jacobian);

    if (cfg.adapt && it <= cfg.adapt->adapt_steps) {
      const double indicator = res.accepted ? 1.0 : 0.0;
      log_dt += cfg.adapt->learning_rate / std::pow(static_cast<double>(it), 0.6) *
                (indicator - cfg.adapt->target_accept);
      live.dt = std::exp(log_dt);
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  out.final_dt = live.dt;
  return out;
}

}  // namespace

HmcStepResult hmc_step(std::span<const double> x_curr, const HamiltonianSpec& H,
                       const SamplerConfig& cfg, RngStream& rng) {
  H.validate();
  return step_impl(
      x_curr,
      [&H](std::span<const double> x, RngStream& r) { return sample_momentum(x, H, r); },
      [&H, &cfg](const PhasePoint& z0) { return integrate(z0, H, cfg.integrator); },
      rng);
}

ChainOutput run_chain(std::span<const double> x0, const HamiltonianSpec& H,
                      const SamplerConfig& cfg) {
  H.validate();
  return chain_impl(x0, H.dim(), cfg,
                    [&H](std::span<const double> x, const IntegratorConfig& icfg,
                         RngStream& rng) {
                      return step_impl(
                          x,
                          [&H](std::span<const double> xv, RngStream& r) {
                            return sample_momentum(xv, H, r);
                          },
                          [&H, &icfg](const PhasePoint& z0) {
                            return integrate(z0, H, icfg);
                          },
                          rng);
                    });
}

ChainOutput run_chain(std::span<const double> x0, const GradientTarget& target,
                      const SamplerConfig& cfg) {
  return chain_impl(
      x0, target.dim(), cfg,
      [&target](std::span<const double> x, const IntegratorConfig& icfg,
                RngStream& rng) {
        return step_impl(
            x,
            [&target](std::span<const double>, RngStream& r) {
              std::vector<double> p(target.mass.size());
              for (std::size_t i = 0; i < p.size(); ++i)
                p[i] = std::sqrt(target.mass[i]) * r.normal();
              return p;
            },
            [&target, &icfg](const PhasePoint& z0) {
              return integrate_gradient(z0, target, icfg);
            },
            rng);
      });
}

}  // namespace qhmc
