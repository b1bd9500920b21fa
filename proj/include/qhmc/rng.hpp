#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qhmc {

// Seeded random stream with a pinned draw sequence. Uniforms come from the
// top 53 bits of mt19937_64 and normals from one Box-Muller pair per call
// (the spare is discarded), so the stream consumes a fixed, documented number
// of engine outputs per draw: one per uniform, two per normal. This keeps
// chains bit-reproducible across standard library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qhmc
