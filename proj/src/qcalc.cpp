#include "qhmc/qcalc.hpp"

#include <cmath>

namespace qhmc {

void DeformationParameter::validate() const {
  if (!std::isfinite(q) || q < 0.0)
    throw std::invalid_argument("deformation parameter q must be finite and >= 0");
  if (!(classical_tol > 0.0) || !(zero_tol > 0.0) || !(fd_step > 0.0))
    throw std::invalid_argument("fallback tolerances must be positive");
}

double HamiltonianSpec::potential_at(std::span<const double> x) const {
  return potential.eval(x);
}

double HamiltonianSpec::kinetic_at(std::span<const double> x,
                                   std::span<const double> p) const {
  if (separable) {
    double k = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) k += p[i] * p[i] / (2.0 * mass[i]);
    return k;
  }
  std::vector<double> z(x.begin(), x.end());
  z.insert(z.end(), p.begin(), p.end());
  return kinetic->eval(z);
}

double HamiltonianSpec::energy(std::span<const double> x,
                               std::span<const double> p) const {
  return potential_at(x) + kinetic_at(x, p);
}

void HamiltonianSpec::validate() const {
  if (mass.empty()) throw std::invalid_argument("mass vector must be non-empty");
  for (double m : mass)
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::invalid_argument("mass entries must be positive and finite");
  if (potential.dim != mass.size())
    throw std::invalid_argument("potential dimension does not match mass vector");
  if (!potential.eval) throw std::invalid_argument("potential evaluator is empty");
  if (!separable) {
    if (!kinetic || !kinetic->eval)
      throw std::invalid_argument("non-separable Hamiltonian needs a kinetic field");
    if (kinetic->dim != 2 * mass.size())
      throw std::invalid_argument("kinetic field must live on the full phase space");
  }
}

ScalarField hamiltonian_field(const HamiltonianSpec& H) {
  const std::size_t d = H.dim();
  return ScalarField{
      .eval =
          [&H, d](std::span<const double> z) {
            return H.energy(z.subspan(0, d), z.subspan(d, d));
          },
      .dim = 2 * d};
}

namespace {

double eval_checked(const ScalarField& f, std::span<const double> z) {
  const double v = f.eval(z);
  if (!std::isfinite(v))
    throw non_finite_error("field evaluation returned a non-finite value",
                           std::vector<double>(z.begin(), z.end()));
  return v;
}

}  // namespace

double jackson_dx(const ScalarField& f, std::span<const double> z,
                  std::size_t i, const DeformationParameter& dp) {
  dp.validate();
  if (z.size() != f.dim) throw std::invalid_argument("point dimension does not match field");
  if (i >= f.dim) throw std::invalid_argument("coordinate index out of range");

  std::vector<double> zp(z.begin(), z.end());
  if (std::abs(dp.q - 1.0) < dp.classical_tol || std::abs(z[i]) < dp.zero_tol) {
    // The step scales with the coordinate so the difference stays above the
    // rounding granularity of f at large |z_i|; below |z_i| = 1 it is fd_step.
    const double h = dp.fd_step * std::max(1.0, std::abs(z[i]));
    zp[i] = z[i] + h;
    const double fp = eval_checked(f, zp);
    zp[i] = z[i] - h;
    const double fm = eval_checked(f, zp);
    return (fp - fm) / (2.0 * h);
  }

  const double q2 = dp.q * dp.q;
  zp[i] = q2 * z[i];
  const double fq = eval_checked(f, zp);
  zp[i] = z[i];
  const double f0 = eval_checked(f, zp);
  return (fq - f0) / ((q2 - 1.0) * z[i]);
}

std::vector<double> dilate(std::span<const double> z, double q) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = q * z[i];
  return out;
}

double velocity_component(const HamiltonianSpec& H, std::span<const double> x,
                          std::span<const double> p, std::size_t i,
                          const DeformationParameter& dp) {
  const std::vector<double> qx = dilate(x, dp.q);
  const ScalarField over_p{
      .eval = [&H, &qx](std::span<const double> pv) { return H.energy(qx, pv); },
      .dim = H.dim()};
  return jackson_dx(over_p, p, i, dp) / std::sqrt(dp.q);
}

double force_component(const HamiltonianSpec& H, std::span<const double> x,
                       std::span<const double> p, std::size_t i,
                       const DeformationParameter& dp) {
  const ScalarField over_x{
      .eval = [&H, &p](std::span<const double> xv) { return H.energy(xv, p); },
      .dim = H.dim()};
  return std::sqrt(dp.q) * jackson_dx(over_x, x, i, dp);
}

std::vector<double> velocity_field(const HamiltonianSpec& H,
                                   std::span<const double> x,
                                   std::span<const double> p,
                                   const DeformationParameter& dp) {
  H.validate();
  if (x.size() != H.dim() || p.size() != H.dim())
    throw std::invalid_argument("phase point dimension does not match Hamiltonian");
  std::vector<double> v(H.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = velocity_component(H, x, p, i, dp);
  return v;
}

std::vector<double> force_field(const HamiltonianSpec& H,
                                std::span<const double> x,
                                std::span<const double> p,
                                const DeformationParameter& dp) {
  H.validate();
  if (x.size() != H.dim() || p.size() != H.dim())
    throw std::invalid_argument("phase point dimension does not match Hamiltonian");
  std::vector<double> f(H.dim());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = force_component(H, x, p, i, dp);
  return f;
}

double poisson_bracket_q(const ScalarField& f, const ScalarField& g,
                         std::span<const double> z,
                         const DeformationParameter& dp) {
  dp.validate();
  if (f.dim != 2 || g.dim != 2 || z.size() != 2)
    throw std::invalid_argument("q-Poisson bracket is provided for one position dimension only");

  const double q = dp.q;
  // g composed with the x-dilatation, as it enters the first bracket term.
  const ScalarField g_dilated{
      .eval =
          [&g, q](std::span<const double> w) {
            const double wd[2] = {q * w[0], w[1]};
            return g.eval(wd);
          },
      .dim = 2};

  const double dp_gd = jackson_dx(g_dilated, z, 1, dp);
  const double dx_f = jackson_dx(f, z, 0, dp);
  const double dx_g = jackson_dx(g, z, 0, dp);
  const double dp_f = jackson_dx(f, z, 1, dp);
  return dp_gd * dx_f / std::sqrt(q) - std::sqrt(q) * dx_g * dp_f;
}

}  // namespace qhmc
