#include "tripsep/rng.hpp"

#include <cmath>

namespace tripsep {

double gaussian_at(std::uint64_t seed, std::int64_t index) {
  const auto i = static_cast<std::uint64_t>(index);
  const std::uint64_t a = mix64(seed ^ mix64(2 * i));
  const std::uint64_t b = mix64(seed ^ mix64(2 * i + 1));
  // (0, 1] and [0, 1) uniforms from the top 53 bits.
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace tripsep
