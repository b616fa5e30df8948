#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tripsep/ddc.hpp"
#include "tripsep/iq_series.hpp"
#include "tripsep/polarimetric.hpp"
#include "tripsep/sim_core.hpp"

namespace tripsep {

class RetrievalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// IF-rate transmit/receive and trip separation
// ---------------------------------------------------------------------------

/// Received fast-time IF records, one per pulse.
struct PulseSet {
  std::vector<IQSeries> pulses;
  NCOPlan plan_tx;
  IQSeries tx_chirp;  // baseband transmit pulse at the IF sample rate
  double prt = 0.0;
};

/// Baseband LFM pulse of the radar at the given sample rate.
IQSeries radar_chirp(const RadarConfig& cfg, double sample_rate);

/// Pulse k carries chirp * trip1[k] at plan_tx(k) plus chirp * trip2[k] at
/// plan_tx(k-1), each scaled by the receive gain at its IF and by the
/// oscillator phase of the pulse it was transmitted on.
PulseSet fd_transmit_receive(const RadarConfig& cfg, const IQSeries& trip1, const IQSeries& trip2,
                             const NCOPlan& plan_tx, const PhaseNoiseSpec& jitter,
                             std::uint64_t seed);

/// Trip (1 or 2) that plan_rx recovers at each pulse of one period of the
/// combined frame. Throws std::invalid_argument when a pulse is ambiguous or
/// the pattern contradicts the plan's role.
std::vector<int> selected_trips(const NCOPlan& plan_tx, const NCOPlan& plan_rx);

/// Down-convert with plan_rx, pulse-compress with ref_chirp (at the chain
/// output rate) and sample the gate. Gate index and complex normalization
/// come from a noiseless calibration pulse through the same chain, so the
/// selected trip passes with unit gain.
IQSeries fd_separate(const PulseSet& pulse_set, const NCOPlan& plan_rx,
                     const DecimationChain& chain, const IQSeries& ref_chirp);

/// Gate-level transfer: y[k] = trip1_gain[k % P] * trip1[k] + trip2_gain[k % P] * trip2[k],
/// measured by running unit trips through the full IF path.
struct GateTransfer {
  std::vector<cplx> trip1_gain;
  std::vector<cplx> trip2_gain;

  std::size_t period() const { return trip1_gain.size(); }
  /// Largest |gain| on the unselected trip relative to the selected one, dB.
  double suppression_db(const std::vector<int>& selected) const;
};

GateTransfer measure_gate_transfer(const RadarConfig& cfg, const NCOPlan& plan_tx,
                                   const NCOPlan& plan_rx, const DecimationChain& chain,
                                   const IQSeries& ref_chirp);

/// Slow-time shortcut equivalent to fd_transmit_receive + fd_separate.
IQSeries fd_gate_level(const IQSeries& trip1, const IQSeries& trip2, const GateTransfer& transfer,
                       const PhaseNoiseSpec& jitter, std::uint64_t seed);

/// Multiplies pulse k by the receive gain of the plan frequency at k: the
/// alternating-gain slow-time series a separated trip exhibits.
IQSeries apply_if_alternation(const IQSeries& series, const RadarConfig& cfg, const NCOPlan& plan);

// ---------------------------------------------------------------------------
// Sideband-removal moment retrieval
// ---------------------------------------------------------------------------

inline constexpr double kFdSnrGateDb = 10.0;
inline constexpr double kFdNotchWidth = 0.5;
inline constexpr double kHalfSpectrumBlanked = 0.5;  // bins [M/2, M) zeroed

/// Crude velocity from the positive-velocity half spectrum.
double half_spectrum_velocity(const IQSeries& series, const RadarConfig& cfg);

/// Keep a 0.5-wide band around the crude velocity (the half-spectrum estimate
/// when crude_v is absent), then pulse-pair with the noise removed from both
/// lags. Noise power comes from cfg.noise_power_db.
MomentSet fd_retrieve_moments(const IQSeries& series, const RadarConfig& cfg,
                              double snr_gate_db = kFdSnrGateDb,
                              std::optional<double> crude_v = std::nullopt);

/// Chooses between v and v +/- v_unb (wrapped) using an external reference
/// velocity and clears the unverified-branch flag.
MomentSet resolve_branch(const MomentSet& moments, double reference_velocity,
                         const RadarConfig& cfg);

// ---------------------------------------------------------------------------
// Field propagation
// ---------------------------------------------------------------------------

struct GateField {
  int gates = 0;
  int rays = 0;
  std::vector<IQSeries> cells;  // ray-major: cells[ray * gates + gate]

  GateField() = default;
  GateField(int g, int r) : gates(g), rays(r), cells(static_cast<std::size_t>(g) * r) {}
  IQSeries& at(int gate, int ray) { return cells[index(gate, ray)]; }
  const IQSeries& at(int gate, int ray) const { return cells[index(gate, ray)]; }
  std::size_t index(int gate, int ray) const {
    return static_cast<std::size_t>(ray) * static_cast<std::size_t>(gates) +
           static_cast<std::size_t>(gate);
  }
};

struct MomentField {
  int gates = 0;
  int rays = 0;
  std::vector<MomentSet> cells;
  bool branch_unverified = false;

  MomentSet& at(int gate, int ray) {
    return cells[static_cast<std::size_t>(ray) * gates + gate];
  }
  const MomentSet& at(int gate, int ray) const {
    return cells[static_cast<std::size_t>(ray) * gates + gate];
  }
};

struct PropagationOptions {
  double snr_gate_db = kFdSnrGateDb;
  std::optional<double> start_crude;  // external crude velocity for the start cell
};

/// Breadth-first retrieval from the start cell; each neighbour (gate +/- 1,
/// ray +/- 1) uses the velocity of the cell that reached it as crude_v.
/// Cells below the SNR gate are retrieved with low_snr set but do not seed
/// further cells; unreached cells keep no_retrieval.
MomentField fd_propagate(const GateField& field, const RadarConfig& cfg, int start_gate,
                         int start_ray, const PropagationOptions& options = {});

/// Shifts every retrieved velocity by v_unb (wrapped): the other branch.
void flip_branch(MomentField& field, const RadarConfig& cfg);

}  // namespace tripsep
