#pragma once

#include <vector>

#include "tripsep/iq_series.hpp"

namespace tripsep {

enum class Window { rect, hann };

struct ChirpSpec {
  double bandwidth = 1.0e6;     // Hz
  double pulse_width = 20e-6;   // s
  double center_freq = 0.0;     // Hz
  double sample_rate = 20.0e6;  // complex samples/s
  double edge_taper = 0.0;      // Tukey fraction of the pulse in cosine edges

  int num_samples() const;
  void validate() const;
};

/// Notch band in normalized Doppler (cycles/sample, any real value; wrapped)
/// and the fraction of the Nyquist interval it spans.
struct NotchSpec {
  double center_cycles = 0.0;
  double normalized_width = 0.5;
};

enum class NotchMode { remove_center, keep_center };

/// LFM pulse sweeping center-B/2 .. center+B/2; unit amplitude apart from
/// the optional Tukey edges.
IQSeries gen_chirp(const ChirpSpec& spec);

/// Window taps normalized to unit coherent gain (mean of taps == 1). Hann is
/// the periodic (DFT-even) form.
std::vector<double> window_taps(Window w, std::size_t n);

/// Equivalent noise bandwidth in bins: N * sum(w^2) / (sum w)^2.
double enbw_bins(std::span<const double> taps);

/// Matched-filter output y[n] = sum_k rx[n+k] conj(w[k] ref[k]), n = 0..len(rx)-1
/// (rx zero-extended). Index n is the delay of rx relative to ref.
IQSeries pulse_compress(const IQSeries& rx, const IQSeries& ref, Window window = Window::rect);

/// Windowed DFT with the window at unit coherent gain; length preserved.
std::vector<cplx> spectrum(const IQSeries& series, Window window = Window::rect);

/// DFT bins covered by a notch band: the round(width*M) contiguous bins
/// (circular) centred on the notch centre.
std::vector<bool> notch_band(const NotchSpec& notch, std::size_t m);

/// Hard spectral mask: zero the band (remove_center) or its complement
/// (keep_center) in the rect DFT, then inverse DFT.
IQSeries notch_filter(const IQSeries& series, const NotchSpec& notch, NotchMode mode);

/// Fraction of the DFT bins passed by notch_filter with these arguments.
double notch_pass_fraction(const NotchSpec& notch, NotchMode mode, std::size_t m);

/// Lag-1 autocorrelation of unit white noise passed through the notch mask:
/// (1/M) sum_{passed k} e^{-j 2 pi k / M}, matching R1 = <x[n] x*[n+1]>.
cplx notch_noise_lag1(const NotchSpec& notch, NotchMode mode, std::size_t m);

}  // namespace tripsep
