#pragma once

#include <vector>

#include "tripsep/iq_series.hpp"
#include "tripsep/polarimetric.hpp"
#include "tripsep/sim_core.hpp"
#include "tripsep/waveform_dsp.hpp"

namespace tripsep {

struct SZCode {
  int n = 8;
  int m = 64;
  std::vector<double> switching_phase;   // psi_k, radians
  std::vector<double> modulation_phase;  // psi_k - psi_{k-1}, circular

  /// psi at any integer pulse index (periodic in M).
  double switching(long k) const;
  /// exp(j * modulation_phase[k]).
  std::vector<cplx> modulation_code() const;
};

/// SZ(n/M): psi_k = (pi/n) sum_{m<=k} m^2. The modulation code then spreads
/// an uncohered trip into n equal spectral replicas spaced M/n bins apart.
/// Throws std::invalid_argument when n does not divide M or when the
/// replica structure does not hold for the pair.
SZCode gen_sz(int n, int m);

/// trip1 * exp(j psi_k) + g * trip2 * exp(j psi_{k-1}), g setting
/// P1/P2 = p1_over_p2_db (kSingleTrip drops trip 2).
IQSeries encode(const IQSeries& trip1, const IQSeries& trip2, const SZCode& code,
                double p1_over_p2_db = 0.0);

/// Removes the transmit code of the given trip (1 or 2).
IQSeries cohere(const IQSeries& received, const SZCode& code, int trip);

struct SZRetrievalOptions {
  double notch_width = 0.75;
  Window window = Window::hann;
  double noise_power_db = -std::numeric_limits<double>::infinity();
  double min_snr_db = 0.0;  // post-notch signal over expected post-notch noise
  int strong_trip = 1;      // trip the input is cohered to
};

/// Strong-trip velocity by pulse-pair on the cohered series.
double estimate_strong_velocity(const IQSeries& cohered, const RadarConfig& cfg);

/// Weak-trip moments from a series cohered to the strong trip: window,
/// notch the strong trip, re-cohere to the weak trip, pulse-pair.
MomentSet retrieve_weak_trip(const IQSeries& cohered, const SZCode& code, double strong_velocity,
                             const RadarConfig& cfg, const SZRetrievalOptions& options = {});

}  // namespace tripsep
