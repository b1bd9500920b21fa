#include "qhmc/potentials.hpp"

#include <cmath>
#include <sstream>

namespace qhmc {

namespace {

double pow8(double x) {
  const double x2 = x * x;
  const double x4 = x2 * x2;
  return x4 * x4;
}

double pow7(double x) {
  const double x2 = x * x;
  const double x4 = x2 * x2;
  return x4 * x2 * x;
}

}  // namespace

NamedPotential double_well() {
  return NamedPotential{
      .name = "double_well",
      .dim = 1,
      .field = {.eval =
                    [](std::span<const double> x) {
                      const double s = x[0] * x[0] - 1.0;
                      return s * s;
                    },
                .dim = 1},
      .analytic_gradient =
          [](std::span<const double> x) {
            return std::vector<double>{4.0 * x[0] * (x[0] * x[0] - 1.0)};
          },
      .default_x0 = {4.0}};
}

NamedPotential super_flat() {
  return NamedPotential{
      .name = "super_flat",
      .dim = 1,
      .field = {.eval = [](std::span<const double> x) { return std::sqrt(std::abs(x[0])); },
                .dim = 1},
      .analytic_gradient = std::nullopt,  // cusp at the origin
      .default_x0 = {4.0}};
}

NamedPotential discontinuous() {
  return NamedPotential{
      .name = "discontinuous",
      .dim = 1,
      .field = {.eval =
                    [](std::span<const double> x) {
                      const double base = 0.5 * x[0] * x[0];
                      return x[0] >= 0.0 ? base + 3.0 : base;
                    },
                .dim = 1},
      .analytic_gradient = std::nullopt,  // jump at the origin
      .default_x0 = {4.0}};
}

NamedPotential octic() {
  return NamedPotential{
      .name = "octic",
      .dim = 1,
      .field = {.eval = [](std::span<const double> x) { return pow8(x[0]); }, .dim = 1},
      .analytic_gradient =
          [](std::span<const double> x) {
            return std::vector<double>{8.0 * pow7(x[0])};
          },
      .default_x0 = {1.7}};
}

NamedPotential stiff_2d() {
  return NamedPotential{
      .name = "stiff_2d",
      .dim = 2,
      .field = {.eval =
                    [](std::span<const double> x) {
                      const double r2 = x[0] * x[0] + x[1] * x[1];
                      const double r4 = r2 * r2;
                      return 0.125 * r4 * r4;
                    },
                .dim = 2},
      .analytic_gradient =
          [](std::span<const double> x) {
            const double r2 = x[0] * x[0] + x[1] * x[1];
            const double r6 = r2 * r2 * r2;
            return std::vector<double>{x[0] * r6, x[1] * r6};
          },
      .default_x0 = {1.6, 1.6}};
}

NamedPotential gaussian(double variance) {
  if (!(variance > 0.0))
    throw std::invalid_argument("gaussian potential needs a positive variance");
  return NamedPotential{
      .name = "gaussian",
      .dim = 1,
      .field = {.eval =
                    [variance](std::span<const double> x) {
                      return x[0] * x[0] / (2.0 * variance);
                    },
                .dim = 1},
      .analytic_gradient =
          [variance](std::span<const double> x) {
            return std::vector<double>{x[0] / variance};
          },
      .default_x0 = {0.0}};
}

const std::vector<std::string>& potential_names() {
  static const std::vector<std::string> names = {
      "double_well", "super_flat", "discontinuous", "octic", "stiff_2d", "gaussian"};
  return names;
}

NamedPotential make_potential(const std::string& name) {
  if (name == "double_well") return double_well();
  if (name == "super_flat") return super_flat();
  if (name == "discontinuous") return discontinuous();
  if (name == "octic") return octic();
  if (name == "stiff_2d") return stiff_2d();
  if (name == "gaussian") return gaussian(1.0);
  std::ostringstream msg;
  msg << "unknown target '" << name << "'; known targets:";
  for (const auto& n : potential_names()) msg << ' ' << n;
  throw std::invalid_argument(msg.str());
}

HamiltonianSpec hamiltonian_for(const NamedPotential& pot) {
  return HamiltonianSpec{.potential = pot.field,
                         .mass = std::vector<double>(pot.dim, 1.0),
                         .separable = true,
                         .kinetic = std::nullopt};
}

}  // namespace qhmc
