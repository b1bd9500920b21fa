#include "qhmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qhmc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxLag = 500;
constexpr double kVarianceFloor = 1e-12;

bool series_usable(std::span<const double> y) {
  if (y.size() < 2) return false;
  double mean = 0.0;
  for (double v : y) {
    if (!std::isfinite(v)) return false;
    mean += v;
  }
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  return var >= kVarianceFloor;
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> series,
                                    std::size_t k_max) {
  if (series.size() <= k_max)
    throw std::invalid_argument("series must be longer than k_max");

  if (!series_usable(series)) return std::vector<double>(k_max + 1, kNan);

  const std::size_t n = series.size();
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  double denom = 0.0;
  for (double v : series) denom += (v - mean) * (v - mean);

  std::vector<double> rho(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t)
      num += (series[t] - mean) * (series[t + k] - mean);
    rho[k] = num / denom;
  }
  return rho;
}

double iat(std::span<const double> acf) {
  if (acf.empty() || !std::isfinite(acf[0])) return kNan;
  const std::size_t k_max = std::min(kMaxLag, acf.size() - 1);
  double tau = 1.0;
  for (std::size_t k = 1; k <= k_max; ++k) tau += 2.0 * acf[k];
  return tau;
}

MixingReport summarize_series(std::span<const double> series, double wall_time_s,
                              double accept_rate) {
  MixingReport rep;
  rep.accept_rate = accept_rate;
  if (!series_usable(series)) {
    rep.iat = kNan;
    rep.ess = kNan;
    rep.ess_per_second = kNan;
    rep.valid = false;
    return rep;
  }
  const std::size_t n = series.size();
  const std::size_t k_max = std::min(kMaxLag, n - 1);
  rep.acf = autocorrelation(series, k_max);
  // Clamp at 1: a truncated sum can dip below one effective step per sample,
  // and ESS is capped at N in the reports.
  rep.iat = std::max(1.0, iat(rep.acf));
  rep.ess = static_cast<double>(n) / rep.iat;
  rep.ess_per_second = wall_time_s > 0.0 ? rep.ess / wall_time_s : kNan;
  rep.valid = true;
  return rep;
}

MixingReport summarize(const ChainOutput& chain, std::size_t burn_in,
                       double wall_time_s, std::size_t coordinate) {
  if (coordinate >= chain.dim)
    throw std::invalid_argument("analyzed coordinate out of range");
  if (chain.size() <= burn_in)
    throw std::invalid_argument("chain has no samples beyond burn-in");

  const std::vector<double> full = chain.coordinate(coordinate);
  const std::span<const double> post(full.data() + burn_in, full.size() - burn_in);
  return summarize_series(post, wall_time_s, chain.accept_rate());
}

}  // namespace qhmc
