#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ccpower {

using Engine = std::mt19937_64;

// Purposes get disjoint substreams so that, for one user seed, scenario
// generation, solver-side draws and validation draws never overlap.
enum class Stream : std::uint64_t {
  InterferenceScenario = 0x11,
  BroadcastScenario = 0x12,
  Realization = 0x21,
  Validation = 0x31,
  Histogram = 0x32,
  Test = 0x7f,
};

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t seed, Stream purpose, std::uint64_t index = 0);

inline Engine make_engine(std::uint64_t seed, Stream purpose, std::uint64_t index = 0) {
  return Engine(derive_seed(seed, purpose, index));
}

/// Circularly symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(Engine& engine, double variance) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const double s = std::sqrt(variance / 2.0);
  const double re = n01(engine);
  const double im = n01(engine);
  return {s * re, s * im};
}

}  // namespace ccpower
