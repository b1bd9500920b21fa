#include "qhmc/gravity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qhmc/rng.hpp"

namespace qhmc {

double gravity_forward(double h, double x_s, double x_f) {
  if (!(h > 0.0)) throw std::invalid_argument("source depth must be positive");
  const double dx = x_s - x_f;
  const double r2 = dx * dx + h * h;
  return h / (r2 * std::sqrt(r2));
}

double gravity_potential(double h, const GravityModel& model) {
  if (!(h > 0.0)) return std::numeric_limits<double>::infinity();
  double misfit = 0.0;
  for (std::size_t j = 0; j < model.sensors.size(); ++j) {
    const double r = gravity_forward(h, model.sensors[j], model.x_f) - model.data[j];
    misfit += r * r;
  }
  misfit /= 2.0 * model.sigma * model.sigma;
  const double dh = h - model.prior_mean;
  return misfit + dh * dh / (2.0 * model.prior_std * model.prior_std);
}

GravityModel make_synthetic_gravity(double true_depth, double x_f,
                                    std::vector<double> sensors, double sigma,
                                    double prior_mean, double prior_std,
                                    std::uint64_t noise_seed) {
  if (sensors.empty()) throw std::invalid_argument("sensor list must be non-empty");
  if (!(sigma > 0.0) || !(prior_std > 0.0))
    throw std::invalid_argument("sigma and prior_std must be positive");
  GravityModel model{.x_f = x_f,
                     .sensors = std::move(sensors),
                     .sigma = sigma,
                     .data = {},
                     .prior_mean = prior_mean,
                     .prior_std = prior_std};
  RngStream rng(noise_seed);
  model.data.reserve(model.sensors.size());
  for (double xs : model.sensors)
    model.data.push_back(gravity_forward(true_depth, xs, x_f) + sigma * rng.normal());
  return model;
}

ScalarField gravity_potential_field(const GravityModel& model) {
  return ScalarField{
      .eval = [model](std::span<const double> x) { return gravity_potential(x[0], model); },
      .dim = 1};
}

}  // namespace qhmc
