#pragma once

#include <cstdint>
#include <random>

#include "tripsep/iq_series.hpp"

namespace tripsep {

/// splitmix64 finalizer; used for seed derivation and counter-based draws.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent sub-stream seed for a named stream of a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Standard normal value that is a pure function of (seed, index). Lets two
/// consumers index into the same realization at different offsets.
double gaussian_at(std::uint64_t seed, std::int64_t index);

/// Sequential circular complex Gaussian source, E|z|^2 = 1.
class ComplexGaussian {
 public:
  explicit ComplexGaussian(std::uint64_t seed) : engine_(seed) {}
  cplx operator()() {
    constexpr double kHalf = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {kHalf * re, kHalf * im};
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace tripsep
