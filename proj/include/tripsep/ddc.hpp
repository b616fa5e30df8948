#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tripsep/iq_series.hpp"
#include "tripsep/sim_core.hpp"

namespace tripsep {

// ---------------------------------------------------------------------------
// Filter mask and decimation chain
// ---------------------------------------------------------------------------

struct FilterMask {
  double passband_edge = 0.6e6;    // Hz
  double stopband_edge = 2.0e6;    // Hz
  double passband_ripple_db = 0.2; // peak-to-peak
  double stopband_atten_db = 80.0;

  void validate() const;
};

struct FilterStage {
  std::vector<double> taps;
  int decimation = 1;
};

struct DecimationChain {
  std::vector<FilterStage> stages;

  int total_decimation() const;
  void validate() const;
};

class DesignFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DesignOptions {
  double output_rate = 0.0;  // Hz; 0 keeps the input rate
  int max_taps = 2001;
  int grid_points = 4096;
};

/// Equiripple lowpass whose composite response meets the mask on a dense
/// grid. The order starts at Kaiser's estimate and grows until the verified
/// response complies; exceeding max_taps throws DesignFailure.
DecimationChain design_lowpass(const FilterMask& mask, double sample_rate,
                               const DesignOptions& options = {});

/// Frequency response of one stage at f cycles/sample (of that stage's input).
cplx stage_response(const FilterStage& stage, double cycles);

/// Composite response at an input frequency: product of stage responses, each
/// evaluated at its own (decimated) input rate.
cplx chain_response(const DecimationChain& chain, double freq_hz, double sample_rate);

struct MaskReport {
  double ripple_db = 0.0;     // max/min |H| over [0, passband_edge]
  double min_atten_db = 0.0;  // over [stopband_edge, fs/2], re passband peak
  int grid_points = 0;
  int num_taps = 0;
  bool passband_ok = false;
  bool stopband_ok = false;
  bool pass() const { return passband_ok && stopband_ok; }
};

MaskReport verify_mask(const DecimationChain& chain, const FilterMask& mask, double sample_rate,
                       int grid_points = 4096);

/// Plain-text coefficient file: "# stage k, decim d" header per stage (k from
/// 1), then one coefficient per line.
void write_chain(std::ostream& os, const DecimationChain& chain);
DecimationChain read_chain(std::istream& is);

// ---------------------------------------------------------------------------
// Mixing and down-conversion
// ---------------------------------------------------------------------------

/// x[n] * exp(-j(2 pi f n dt + phase0)). f is taken modulo the sample rate.
IQSeries mix(const IQSeries& series, double nco_freq, double phase0 = 0.0);

/// Convolve-and-decimate through every stage: y[m] = sum_i h[i] x[mD - i].
IQSeries apply_chain(const DecimationChain& chain, const IQSeries& series);

enum class NcoRole { first_trip, second_trip, interleaved };

struct NCOPlan {
  std::vector<double> frame;
  NcoRole role = NcoRole::first_trip;

  double freq_for_pulse(long pulse_index) const;
  void validate(const RadarConfig& cfg) const;

  static NCOPlan first_trip(const RadarConfig& cfg);
  static NCOPlan second_trip(const RadarConfig& cfg);
  static NCOPlan interleaved(const RadarConfig& cfg);
};

/// Mix with the plan's frequency for this pulse, then run the chain.
IQSeries downconvert(const IQSeries& series, long pulse_index, const NCOPlan& plan,
                     const DecimationChain& chain);

}  // namespace tripsep
