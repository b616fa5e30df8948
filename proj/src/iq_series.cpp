#include "tripsep/iq_series.hpp"

#include <stdexcept>
#include <string>

namespace tripsep {

double energy(std::span<const cplx> x) {
  double e = 0.0;
  for (const auto& v : x) e += std::norm(v);
  return e;
}

double mean_power(std::span<const cplx> x) {
  if (x.empty()) return 0.0;
  return energy(x) / static_cast<double>(x.size());
}

bool all_finite(std::span<const cplx> x) {
  for (const auto& v : x) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

IQSeries scaled(const IQSeries& s, cplx gain) {
  IQSeries out = s;
  for (auto& v : out) v *= gain;
  return out;
}

IQSeries add(const IQSeries& a, const IQSeries& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("IQSeries length mismatch: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
  IQSeries out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

double wrap_symmetric(double value, double half_period) {
  const double period = 2.0 * half_period;
  double r = std::fmod(value + half_period, period);
  if (r < 0.0) r += period;
  return r - half_period;
}

}  // namespace tripsep
