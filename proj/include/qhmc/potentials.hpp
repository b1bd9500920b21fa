// Benchmark potential functions, addressable by name for the experiment
// configs. Analytic gradients are attached where the potential is smooth and
// serve as oracles in the tests.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qhmc/qcalc.hpp"

namespace qhmc {

struct NamedPotential {
  std::string name;
  std::size_t dim = 1;
  ScalarField field;
  std::optional<std::function<std::vector<double>(std::span<const double>)>>
      analytic_gradient;
  std::vector<double> default_x0;  // customary chain start for this target
};

NamedPotential double_well();                 // (x^2 - 1)^2
NamedPotential super_flat();                  // |x|^(1/2), cusp at 0
NamedPotential discontinuous();               // x^2/2 (+3 for x >= 0)
NamedPotential octic();                       // x^8
NamedPotential stiff_2d();                    // (x1^2 + x2^2)^4 / 8
NamedPotential gaussian(double variance);     // x^2 / (2 variance)

const std::vector<std::string>& potential_names();

// Lookup by name; "gaussian" uses unit variance. Unknown names raise
// std::invalid_argument listing the known targets.
NamedPotential make_potential(const std::string& name);

// Convenience wrapper: unit masses, separable quadratic kinetic energy.
HamiltonianSpec hamiltonian_for(const NamedPotential& pot);

}  // namespace qhmc
