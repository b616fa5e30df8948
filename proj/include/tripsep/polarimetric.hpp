#pragma once

#include <cstdint>
#include <limits>
#include <span>

#include "tripsep/iq_series.hpp"
#include "tripsep/sim_core.hpp"

namespace tripsep {

enum class MomentFlag : std::uint32_t {
  low_snr = 1u << 0,
  sideband_branch_unverified = 1u << 1,
  replica_broadened = 1u << 2,
  no_retrieval = 1u << 3,
};

struct MomentSet {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  double power_db = kUnset;
  double velocity = kUnset;  // m/s
  double width = kUnset;     // m/s
  double rho_hv = kUnset;    // clamped to [0, 1]
  double rho_hv_raw = kUnset;
  double zdr_db = kUnset;
  std::uint32_t flags = 0;

  bool has(MomentFlag f) const { return (flags & static_cast<std::uint32_t>(f)) != 0; }
  void set(MomentFlag f) { flags |= static_cast<std::uint32_t>(f); }
  void clear(MomentFlag f) { flags &= ~static_cast<std::uint32_t>(f); }
  bool retrieved() const { return !has(MomentFlag::no_retrieval); }
};

/// Lag-0 and lag-1 sample autocorrelations; r1 = <x[k] conj(x[k+1])>.
struct Autocorr {
  double r0 = 0.0;
  cplx r1 = 0.0;
};

Autocorr autocorrelation(std::span<const cplx> x);

struct PulsePairMoments {
  double power = 0.0;     // linear, noise removed
  double velocity = 0.0;  // m/s
  double width = 0.0;     // m/s; NaN when undefined (no signal or zero lag-1)
};

/// v = -(lambda / (4 pi prt)) arg(r1);
/// w = (lambda / (2 pi prt sqrt 2)) sqrt(max(0, ln(S / |r1|))).
PulsePairMoments moments_from_autocorr(double signal_power, cplx r1, const RadarConfig& cfg);

/// Pulse-pair estimates with white-noise removal from the lag-0 power.
PulsePairMoments pulse_pair(const IQSeries& series, const RadarConfig& cfg,
                            double noise_power_db);

/// |<v h*>| / sqrt(<|h|^2> <|v|^2>). Throws on length mismatch or zero power.
double rho_hv(const IQSeries& h, const IQSeries& v);

/// 10 log10(Ph / Pv). Throws on length mismatch or zero V power.
double zdr(const IQSeries& h, const IQSeries& v);

/// Scalar per-trip leak factors of the receive filters at the gate.
struct LeakageModel {
  cplx filter_gain_h = 0.0;
  cplx filter_gain_v = 0.0;

  void validate() const;
  static LeakageModel equal(cplx gain) { return {gain, gain}; }
  static LeakageModel from_db(double leak_db);
};

/// Terms of R_vh(0) for the contaminated pair of the target trip:
/// (1/N) sum (V_t + Fv V_o)(H_t + Fh H_o)^*.
struct RvhTerms {
  cplx clean;    // (1/N) Tr{V_t H_t^H}
  cplx other;    // Fv conj(Fh) (1/N) Tr{V_o H_o^H}
  cplx cross_a;  // conj(Fh) (1/N) Tr{V_t H_o^H}
  cplx cross_b;  // Fv (1/N) Tr{V_o H_t^H}

  cplx two_term() const { return clean + other; }
  cplx total() const { return clean + other + cross_a + cross_b; }
};

struct ContaminationResult {
  MomentSet clean;
  MomentSet contaminated;
  double rho_bias = 0.0;   // contaminated - clean
  double zdr_bias_db = 0.0;
  cplx rvh_measured = 0.0;
  RvhTerms terms;
};

RvhTerms rvh_decomposition(const DualPolSeries& trip1, const DualPolSeries& trip2,
                           const LeakageModel& leak, int target_trip);

/// Forms H^t = H_t + Fh H_other, V^t = V_t + Fv V_other and measures the
/// rho_hv / Zdr bias against the uncontaminated target trip.
ContaminationResult contaminated_moments(const DualPolSeries& trip1, const DualPolSeries& trip2,
                                         const LeakageModel& leak, int target_trip);

}  // namespace tripsep
