// Numerical q-calculus primitives: Jackson derivatives, the dilatation map,
// and the q-deformed velocity/force fields that drive the leapfrog scheme.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhmc {

// Thrown when a field evaluation produces inf or nan; carries the input point.
class non_finite_error : public std::runtime_error {
 public:
  non_finite_error(const std::string& what, std::vector<double> point)
      : std::runtime_error(what), point_(std::move(point)) {}

  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

// Deformation parameter q >= 0 plus the tolerances controlling the
// finite-difference fallbacks. The Jackson quotient has removable
// singularities at q = 1 and z_i = 0; inside the tolerance bands both are
// replaced by a central difference with step fd_step, which is the analytic
// limit of the quotient for differentiable fields. q = 0 is admitted as the
// degenerate secant-to-origin case; q < 0 is rejected.
struct DeformationParameter {
  double q = 1.0;
  double classical_tol = 1e-12;  // |q - 1| below this: classical fallback
  double zero_tol = 1e-8;        // |z_i| below this: small-argument fallback
  double fd_step = 1e-6;         // step of the central-difference fallbacks

  void validate() const;
};

// A deterministic evaluator over a fixed-dimension real vector.
struct ScalarField {
  std::function<double(std::span<const double>)> eval;
  std::size_t dim = 0;

  double operator()(std::span<const double> z) const { return eval(z); }
};

// H(x, p) = U(x) + K(x, p). With separable = true the kinetic term is the
// quadratic form sum_i p_i^2 / (2 m_i); otherwise `kinetic` supplies K over
// the stacked phase vector (x, p).
struct HamiltonianSpec {
  ScalarField potential;      // over x, dimension d
  std::vector<double> mass;   // diagonal mass matrix, d positive entries
  bool separable = true;
  std::optional<ScalarField> kinetic;  // over (x, p), dimension 2d; required
                                       // when separable is false

  std::size_t dim() const { return mass.size(); }
  double potential_at(std::span<const double> x) const;
  double kinetic_at(std::span<const double> x, std::span<const double> p) const;
  double energy(std::span<const double> x, std::span<const double> p) const;
  void validate() const;
};

// View of H as a single scalar field over the stacked vector (x, p).
ScalarField hamiltonian_field(const HamiltonianSpec& H);

// Jackson derivative of f in coordinate i at z:
//   (f(..., q^2 z_i, ...) - f(z)) / ((q^2 - 1) z_i),
// with a central-difference fallback of step fd_step * max(1, |z_i|) inside
// the tolerance bands. Non-finite evaluator output raises non_finite_error
// with the offending input attached.
double jackson_dx(const ScalarField& f, std::span<const double> z,
                  std::size_t i, const DeformationParameter& dp);

// Componentwise dilatation z -> q z. Callers apply it to the position block.
std::vector<double> dilate(std::span<const double> z, double q);

// v_i = q^{-1/2} D_{p_i}[H(q x, p)].
std::vector<double> velocity_field(const HamiltonianSpec& H,
                                   std::span<const double> x,
                                   std::span<const double> p,
                                   const DeformationParameter& dp);

// F_i = q^{1/2} D_{x_i}[H(x, p)]; the momentum update applies -F.
std::vector<double> force_field(const HamiltonianSpec& H,
                                std::span<const double> x,
                                std::span<const double> p,
                                const DeformationParameter& dp);

// Single components, used where assembling the full vector would be wasteful.
double velocity_component(const HamiltonianSpec& H, std::span<const double> x,
                          std::span<const double> p, std::size_t i,
                          const DeformationParameter& dp);
double force_component(const HamiltonianSpec& H, std::span<const double> x,
                       std::span<const double> p, std::size_t i,
                       const DeformationParameter& dp);

// q-Poisson bracket for one position dimension (phase dimension 2):
//   {f, g}_q = q^{-1/2} D_p[g(q x, p)] D_x f - q^{1/2} D_x g D_p f.
// Satisfies {x, H}_q = velocity and {p, H}_q = -force at the same point.
double poisson_bracket_q(const ScalarField& f, const ScalarField& g,
                         std::span<const double> z,
                         const DeformationParameter& dp);

}  // namespace qhmc
