// Chain mixing diagnostics: autocorrelation, integrated autocorrelation time,
// and effective sample size summaries.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qhmc/sampler.hpp"

namespace qhmc {

struct MixingReport {
  std::vector<double> acf;    // rho_0 .. rho_k_max
  double iat = 0.0;           // reported tau, clamped to >= 1
  double ess = 0.0;           // N / tau
  double ess_per_second = 0.0;
  double accept_rate = 0.0;   // over the full chain, burn-in included
  bool valid = false;         // false: iat/ess/ess_per_second carry nan
};

// Normalized autocorrelation rho_k for k = 0..k_max, using the full-series
// mean and the lag-0 sum as denominator. A constant or non-finite series
// yields an all-nan vector (the undefined marker).
std::vector<double> autocorrelation(std::span<const double> series,
                                    std::size_t k_max);

// 1 + 2 sum_{k=1}^{k_max} rho_k with k_max = min(500, len - 1). This is the
// raw truncated sum; reports clamp it from below at 1.
double iat(std::span<const double> acf);

// Drops burn_in rows, extracts one coordinate, and assembles the mixing
// report. A constant or non-finite post-burn-in series gives valid = false
// with nan markers, matching the "nan" convention of the sweep tables.
MixingReport summarize(const ChainOutput& chain, std::size_t burn_in,
                       double wall_time_s, std::size_t coordinate);

// Same report for a raw series with a fixed acceptance rate (used for series
// that did not come out of a chain).
MixingReport summarize_series(std::span<const double> series, double wall_time_s,
                              double accept_rate);

}  // namespace qhmc
