#include "tripsep/waveform_dsp.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tripsep/fft.hpp"

namespace tripsep {

int ChirpSpec::num_samples() const {
  return static_cast<int>(std::lround(pulse_width * sample_rate));
}

void ChirpSpec::validate() const {
  if (!(sample_rate > 0.0) || !(pulse_width > 0.0) || bandwidth < 0.0) {
    throw std::invalid_argument("chirp: sample_rate and pulse_width must be > 0, bandwidth >= 0");
  }
  if (bandwidth > sample_rate / 2.0 - std::abs(center_freq)) {
    throw std::invalid_argument("chirp: bandwidth exceeds sample_rate/2 - |center_freq|");
  }
  if (edge_taper < 0.0 || edge_taper > 1.0) {
    throw std::invalid_argument("chirp: edge_taper must lie in [0, 1]");
  }
  if (num_samples() < 8) {
    throw std::invalid_argument("chirp: pulse_width * sample_rate must be >= 8 samples");
  }
}

namespace {

double tukey(int i, int n, double alpha) {
  if (alpha <= 0.0 || n < 2) return 1.0;
  const double x = static_cast<double>(i) / (n - 1);
  const double edge = alpha / 2.0;
  if (x < edge) return 0.5 * (1.0 - std::cos(kPi * x / edge));
  if (x > 1.0 - edge) return 0.5 * (1.0 - std::cos(kPi * (1.0 - x) / edge));
  return 1.0;
}

}  // namespace

IQSeries gen_chirp(const ChirpSpec& spec) {
  spec.validate();
  const int n = spec.num_samples();
  const double dt = 1.0 / spec.sample_rate;
  const double rate = spec.bandwidth / spec.pulse_width;  // Hz/s
  const double f_start = spec.center_freq - spec.bandwidth / 2.0;
  IQSeries out(static_cast<std::size_t>(n), dt);
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    const double phase = 2.0 * kPi * (f_start * t + 0.5 * rate * t * t);
    out[static_cast<std::size_t>(i)] = std::polar(tukey(i, n, spec.edge_taper), phase);
  }
  return out;
}

std::vector<double> window_taps(Window w, std::size_t n) {
  std::vector<double> taps(n, 1.0);
  if (w == Window::hann) {
    for (std::size_t i = 0; i < n; ++i) {
      taps[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    }
    const double mean = std::accumulate(taps.begin(), taps.end(), 0.0) / static_cast<double>(n);
    for (auto& t : taps) t /= mean;
  }
  return taps;
}

double enbw_bins(std::span<const double> taps) {
  double s1 = 0.0;
  double s2 = 0.0;
  for (double t : taps) {
    s1 += t;
    s2 += t * t;
  }
  return static_cast<double>(taps.size()) * s2 / (s1 * s1);
}

IQSeries pulse_compress(const IQSeries& rx, const IQSeries& ref, Window window) {
  if (rx.empty() || ref.empty()) throw std::invalid_argument("pulse_compress: empty input");
  if (ref.size() > rx.size()) {
    throw std::invalid_argument("pulse_compress: reference longer than received series");
  }
  const std::size_t len = rx.size() + ref.size() - 1;
  const auto taps = window_taps(window, ref.size());
  std::vector<cplx> a(len), b(len);
  std::copy(rx.begin(), rx.end(), a.begin());
  for (std::size_t k = 0; k < ref.size(); ++k) b[k] = taps[k] * ref[k];
  auto fa = fft::forward(a);
  const auto fb = fft::forward(b);
  for (std::size_t k = 0; k < len; ++k) fa[k] *= std::conj(fb[k]);
  auto corr = fft::inverse(fa);
  corr.resize(rx.size());
  return IQSeries(std::move(corr), rx.dt);
}

std::vector<cplx> spectrum(const IQSeries& series, Window window) {
  if (series.size() < 2) throw std::invalid_argument("spectrum: need at least 2 samples");
  const auto taps = window_taps(window, series.size());
  std::vector<cplx> x(series.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = taps[i] * series[i];
  return fft::forward(x);
}

std::vector<bool> notch_band(const NotchSpec& notch, std::size_t m) {
  if (!(notch.normalized_width > 0.0 && notch.normalized_width < 1.0)) {
    throw std::invalid_argument("notch: normalized_width must lie in (0, 1)");
  }
  const auto mm = static_cast<long>(m);
  const long nbins =
      std::clamp(std::lround(notch.normalized_width * static_cast<double>(m)), 0L, mm);
  const double centre = notch.center_cycles * static_cast<double>(m);
  const long start = static_cast<long>(std::floor(centre - (nbins - 1) / 2.0 + 0.5));
  std::vector<bool> band(m, false);
  for (long i = 0; i < nbins; ++i) {
    long k = (start + i) % mm;
    if (k < 0) k += mm;
    band[static_cast<std::size_t>(k)] = true;
  }
  return band;
}

namespace {

bool passes(bool in_band, NotchMode mode) {
  return mode == NotchMode::remove_center ? !in_band : in_band;
}

}  // namespace

IQSeries notch_filter(const IQSeries& series, const NotchSpec& notch, NotchMode mode) {
  const auto band = notch_band(notch, series.size());
  auto x = fft::forward(series.view());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!passes(band[k], mode)) x[k] = 0.0;
  }
  return IQSeries(fft::inverse(x), series.dt);
}

double notch_pass_fraction(const NotchSpec& notch, NotchMode mode, std::size_t m) {
  const auto band = notch_band(notch, m);
  std::size_t kept = 0;
  for (std::size_t k = 0; k < m; ++k) kept += passes(band[k], mode) ? 1 : 0;
  return static_cast<double>(kept) / static_cast<double>(m);
}

cplx notch_noise_lag1(const NotchSpec& notch, NotchMode mode, std::size_t m) {
  const auto band = notch_band(notch, m);
  cplx acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (passes(band[k], mode)) {
      acc += std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / static_cast<double>(m));
    }
  }
  return acc / static_cast<double>(m);
}

}  // namespace tripsep
