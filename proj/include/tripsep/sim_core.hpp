#pragma once

#include <cstdint>
#include <limits>

#include "tripsep/iq_series.hpp"

namespace tripsep {

// ---------------------------------------------------------------------------
// Radar and echo descriptions
// ---------------------------------------------------------------------------

struct RadarConfig {
  double wavelength = 0.10;            // m
  double prt = 1.0 / 1200.0;           // s
  int num_pulses = 64;                 // M, even
  double if_freq1 = 6.0e6;             // omega1, Hz (complex-IF equivalent)
  double if_freq2 = 16.0e6;            // omega2, Hz
  double if_sample_rate = 20.0e6;      // complex samples/s
  double chirp_bandwidth = 1.0e6;      // Hz
  double pulse_width = 20.0e-6;        // s
  double pulse_taper = 0.2;            // Tukey edge fraction of the transmit pulse
  double noise_power_db = -30.0;       // relative to unit power
  // Receive chain response at omega2 relative to omega1. A nonzero value
  // produces the pi-offset sideband seen with alternating IF frequencies.
  double if2_gain_db = 1.0;
  double if2_phase_deg = 30.0;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  double unambiguous_velocity() const { return wavelength / (4.0 * prt); }
  double unambiguous_range() const { return kSpeedOfLight * prt / 2.0; }
  /// Normalized Doppler, cycles per pulse, for a radial velocity.
  double velocity_to_cycles(double velocity) const {
    return velocity / (2.0 * unambiguous_velocity());
  }
  double cycles_to_velocity(double cycles) const {
    return cycles * 2.0 * unambiguous_velocity();
  }
  /// Complex gain the receive chain applies at the given IF.
  cplx if_gain(double if_freq) const;

  /// S-band, PRF 1.2 kHz: the trip-overlay scenario used for both schemes.
  static RadarConfig s_band_scenario();
  /// Ku-band dual-frequency radar timing, 500 us PRI.
  static RadarConfig ku_band();
};

struct TripSpec {
  double power_db = 0.0;
  double velocity = 0.0;  // m/s, positive = increasing Doppler phase
  double width = 1.0;     // m/s
  int trip_index = 1;
};

struct DualPolTripSpec {
  TripSpec base;
  double rho_hv = 0.995;
  double zdr_db = 0.0;

  void validate(const RadarConfig& cfg) const;
};

enum class PhaseNoiseModel { independent_per_pulse };

struct PhaseNoiseSpec {
  double rms_jitter_deg = 0.0;
  PhaseNoiseModel model = PhaseNoiseModel::independent_per_pulse;
};

struct DualPolSeries {
  IQSeries h;
  IQSeries v;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// RMS phase jitter in radians from an integrated SSB phase-noise area (dB).
double jitter_from_area(double area_db);

/// Spectral-method slow-time series for one range gate: Gaussian PSD sampled
/// on the M DFT bins (wrapped over the Nyquist interval), complex-Gaussian
/// coefficients scaled by its square root, inverse DFT. V shares rho_hv of
/// H's spectral draws and is scaled by -zdr dB.
DualPolSeries simulate_trip(const RadarConfig& cfg, const DualPolTripSpec& spec,
                            std::uint64_t seed);

/// Multiplies sample k by exp(j*phi[k + pulse_offset]); phi is one i.i.d.
/// Gaussian realization per seed, so trips sharing a seed share the oscillator.
IQSeries apply_phase_noise(const IQSeries& series, const PhaseNoiseSpec& pn,
                           int pulse_offset, std::uint64_t seed);

/// The per-pulse phase (radians) apply_phase_noise uses at absolute index k.
double phase_noise_sample(const PhaseNoiseSpec& pn, std::uint64_t seed, std::int64_t k);

inline constexpr double kSingleTrip = std::numeric_limits<double>::infinity();

/// trip1 + g*trip2 with g chosen so mean_power(trip1)/mean_power(g*trip2)
/// equals p1_over_p2_db. Pass kSingleTrip to get trip1 alone.
IQSeries overlay_trips(const IQSeries& trip1, const IQSeries& trip2, double p1_over_p2_db);

/// Gain to apply to `strong` so that P(strong)/P(weak) = ratio_db.
double ratio_gain(const IQSeries& strong, const IQSeries& weak, double ratio_db);

/// Adds circular white Gaussian noise of the given mean power (dB re 1).
IQSeries add_white_noise(const IQSeries& series, double noise_power_db, std::uint64_t seed);

}  // namespace tripsep
