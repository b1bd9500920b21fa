// q-leapfrog integration with accumulation of the q-Jacobian determinant,
// plus the momentum-flip time-reversal map.
#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qhmc/qcalc.hpp"

namespace qhmc {

struct PhasePoint {
  std::vector<double> x;
  std::vector<double> p;

  std::size_t dim() const { return x.size(); }
};

struct IntegratorConfig {
  double dt = 0.1;
  int steps = 10;
  DeformationParameter dp;
  bool track_jacobian = true;
};

struct StepResult {
  PhasePoint z;
  double log_jacobian_increment = 0.0;
  bool diverged = false;
};

struct TrajectoryResult {
  PhasePoint end;
  double log_jacobian = 0.0;
  std::vector<double> h_trace;  // H at every step boundary, h_trace[0] = H(z0)
  bool diverged = false;
};

// Target described by its potential value and gradient rather than by Jackson
// differences. The dynamics use the closed-form Jackson factors of the
// quadratic kinetic energy, so the force is q^{1/2} grad U and the velocity is
// q^{-1/2} (q^2 + 1) / 2 * M^{-1} p; at q = 1 this is classical leapfrog.
struct GradientTarget {
  std::function<double(std::span<const double>)> value;
  std::function<std::pair<double, std::vector<double>>(std::span<const double>)>
      value_and_grad;
  std::vector<double> mass;

  std::size_t dim() const { return mass.size(); }
  double energy(std::span<const double> x, std::span<const double> p) const;
};

PhasePoint flip_momentum(const PhasePoint& z);

// One half-kick / drift / half-kick composition. When cfg.track_jacobian is
// set, the increment is the log of the product of the three sub-map
// determinants: det(I - (dt/2) Dp F) at the initial state, det(I + dt Dx v)
// after the first kick, det(I - (dt/2) Dp F) after the drift, with the
// Jackson partials taken entrywise. Each determinant is exactly 1 for
// separable Hamiltonians. Non-finite intermediates or a non-positive
// determinant factor flag the step divergent instead of throwing.
StepResult leapfrog_step(const PhasePoint& z, const HamiltonianSpec& H,
                         const IntegratorConfig& cfg);

// cfg.steps leapfrog steps with accumulated log-Jacobian and a Hamiltonian
// value recorded at every boundary; stops early on the first non-finite value.
TrajectoryResult integrate(const PhasePoint& z0, const HamiltonianSpec& H,
                           const IntegratorConfig& cfg);

// Same trajectory contract for a GradientTarget. The dynamics are separable
// with quadratic kinetic energy, so the log-Jacobian is identically zero.
TrajectoryResult integrate_gradient(const PhasePoint& z0,
                                    const GradientTarget& target,
                                    const IntegratorConfig& cfg);

}  // namespace qhmc
