#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tripsep {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Complex sample sequence plus its sampling interval. Slow-time series are
/// sampled once per PRT, fast-time series once per IF/baseband sample.
struct IQSeries {
  std::vector<cplx> samples;
  double dt = 0.0;  // seconds per sample

  IQSeries() = default;
  IQSeries(std::vector<cplx> s, double step) : samples(std::move(s)), dt(step) {}
  IQSeries(std::size_t n, double step) : samples(n), dt(step) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  cplx& operator[](std::size_t i) { return samples[i]; }
  const cplx& operator[](std::size_t i) const { return samples[i]; }
  auto begin() { return samples.begin(); }
  auto end() { return samples.end(); }
  auto begin() const { return samples.begin(); }
  auto end() const { return samples.end(); }
  std::span<const cplx> view() const { return samples; }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Mean |x|^2, unit reference 1.0.
double mean_power(std::span<const cplx> x);
inline double mean_power(const IQSeries& s) { return mean_power(s.view()); }

double energy(std::span<const cplx> x);

bool all_finite(std::span<const cplx> x);

IQSeries scaled(const IQSeries& s, cplx gain);

/// Element-wise sum; throws std::invalid_argument on length mismatch.
IQSeries add(const IQSeries& a, const IQSeries& b);

/// Wraps an angle-like quantity into [-half_period, half_period).
double wrap_symmetric(double value, double half_period);

}  // namespace tripsep
