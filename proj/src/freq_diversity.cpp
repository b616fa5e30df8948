#include "tripsep/freq_diversity.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>

#include "tripsep/fft.hpp"
#include "tripsep/waveform_dsp.hpp"

namespace tripsep {

namespace {

std::size_t combined_period(const NCOPlan& a, const NCOPlan& b) {
  return std::lcm(a.frame.size(), b.frame.size());
}

double noise_linear(const RadarConfig& cfg) {
  return std::isfinite(cfg.noise_power_db) ? db_to_linear(cfg.noise_power_db) : 0.0;
}

}  // namespace

IQSeries radar_chirp(const RadarConfig& cfg, double sample_rate) {
  ChirpSpec spec;
  spec.bandwidth = cfg.chirp_bandwidth;
  spec.pulse_width = cfg.pulse_width;
  spec.center_freq = 0.0;
  spec.sample_rate = sample_rate;
  spec.edge_taper = cfg.pulse_taper;
  return gen_chirp(spec);
}

PulseSet fd_transmit_receive(const RadarConfig& cfg, const IQSeries& trip1, const IQSeries& trip2,
                             const NCOPlan& plan_tx, const PhaseNoiseSpec& jitter,
                             std::uint64_t seed) {
  if (trip1.size() != trip2.size()) throw std::invalid_argument("fd_transmit_receive: trip length mismatch");
  if (trip1.empty()) throw std::invalid_argument("fd_transmit_receive: empty trips");
  cfg.validate();
  plan_tx.validate(cfg);

  PulseSet set;
  set.plan_tx = plan_tx;
  set.prt = cfg.prt;
  set.tx_chirp = radar_chirp(cfg, cfg.if_sample_rate);

  const IQSeries t1 = apply_phase_noise(trip1, jitter, 0, seed);
  const IQSeries t2 = apply_phase_noise(trip2, jitter, -1, seed);
  const std::size_t nchirp = set.tx_chirp.size();
  IQSeries padded(2 * nchirp, set.tx_chirp.dt);
  std::copy(set.tx_chirp.begin(), set.tx_chirp.end(), padded.begin());

  set.pulses.reserve(trip1.size());
  for (std::size_t k = 0; k < trip1.size(); ++k) {
    const long kk = static_cast<long>(k);
    const double f1 = plan_tx.freq_for_pulse(kk);
    const double f2 = plan_tx.freq_for_pulse(kk - 1);
    const cplx a = t1[k] * cfg.if_gain(f1);
    const cplx b = t2[k] * cfg.if_gain(f2);
    IQSeries rec = scaled(mix(padded, -f1), a);
    if (b != 0.0) rec = add(rec, scaled(mix(padded, -f2), b));
    set.pulses.push_back(std::move(rec));
  }
  return set;
}

std::vector<int> selected_trips(const NCOPlan& plan_tx, const NCOPlan& plan_rx) {
  if (plan_tx.frame.empty() || plan_rx.frame.empty()) {
    throw std::invalid_argument("plan/pulse-set frame mismatch: empty frame");
  }
  const std::size_t p = combined_period(plan_tx, plan_rx);
  std::vector<int> sel(p);
  for (std::size_t k = 0; k < p; ++k) {
    const long kk = static_cast<long>(k);
    const double rx = plan_rx.freq_for_pulse(kk);
    const bool own = rx == plan_tx.freq_for_pulse(kk);
    const bool late = rx == plan_tx.freq_for_pulse(kk - 1);
    if (own == late) {
      throw std::invalid_argument("plan/pulse-set frame mismatch at pulse " + std::to_string(k));
    }
    sel[k] = own ? 1 : 2;
    if ((plan_rx.role == NcoRole::first_trip && sel[k] != 1) ||
        (plan_rx.role == NcoRole::second_trip && sel[k] != 2)) {
      throw std::invalid_argument("plan/pulse-set frame mismatch: receive plan role disagrees at pulse " +
                                  std::to_string(k));
    }
  }
  return sel;
}

IQSeries fd_separate(const PulseSet& pulse_set, const NCOPlan& plan_rx,
                     const DecimationChain& chain, const IQSeries& ref_chirp) {
  if (pulse_set.pulses.empty()) throw std::invalid_argument("fd_separate: empty pulse set");
  selected_trips(pulse_set.plan_tx, plan_rx);
  chain.validate();

  const std::size_t len = pulse_set.pulses.front().size();
  const double dt = pulse_set.pulses.front().dt;
  for (const auto& p : pulse_set.pulses) {
    if (p.size() != len || p.dt != dt) throw std::invalid_argument("fd_separate: pulse records differ in length or rate");
  }
  const double out_dt = dt * chain.total_decimation();
  if (std::abs(ref_chirp.dt - out_dt) > 1e-9 * out_dt) {
    throw std::invalid_argument("fd_separate: reference chirp rate differs from the chain output rate");
  }

  IQSeries cal(len, dt);
  std::copy(pulse_set.tx_chirp.begin(),
            pulse_set.tx_chirp.begin() + static_cast<long>(std::min(len, pulse_set.tx_chirp.size())),
            cal.begin());
  const IQSeries cal_out = pulse_compress(apply_chain(chain, cal), ref_chirp);
  std::size_t gate = 0;
  for (std::size_t i = 1; i < cal_out.size(); ++i) {
    if (std::abs(cal_out[i]) > std::abs(cal_out[gate])) gate = i;
  }
  const cplx norm = cal_out[gate];
  if (std::abs(norm) == 0.0) throw std::invalid_argument("fd_separate: calibration pulse vanished");

  IQSeries out(pulse_set.pulses.size(), pulse_set.prt);
  for (std::size_t k = 0; k < pulse_set.pulses.size(); ++k) {
    const IQSeries y =
        pulse_compress(downconvert(pulse_set.pulses[k], static_cast<long>(k), plan_rx, chain), ref_chirp);
    out[k] = y[gate] / norm;
  }
  return out;
}

double GateTransfer::suppression_db(const std::vector<int>& selected) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < period(); ++i) {
    const bool first = selected[i % selected.size()] == 1;
    const double own = std::abs(first ? trip1_gain[i] : trip2_gain[i]);
    const double other = std::abs(first ? trip2_gain[i] : trip1_gain[i]);
    worst = std::max(worst, other / own);
  }
  return 20.0 * std::log10(worst);
}

GateTransfer measure_gate_transfer(const RadarConfig& cfg, const NCOPlan& plan_tx,
                                   const NCOPlan& plan_rx, const DecimationChain& chain,
                                   const IQSeries& ref_chirp) {
  const std::size_t p = combined_period(plan_tx, plan_rx);
  const IQSeries ones(std::vector<cplx>(p, cplx(1.0, 0.0)), cfg.prt);
  const IQSeries zeros(p, cfg.prt);
  const PhaseNoiseSpec quiet{};
  GateTransfer t;
  t.trip1_gain = fd_separate(fd_transmit_receive(cfg, ones, zeros, plan_tx, quiet, 0), plan_rx, chain,
                             ref_chirp).samples;
  t.trip2_gain = fd_separate(fd_transmit_receive(cfg, zeros, ones, plan_tx, quiet, 0), plan_rx, chain,
                             ref_chirp).samples;
  return t;
}

IQSeries fd_gate_level(const IQSeries& trip1, const IQSeries& trip2, const GateTransfer& transfer,
                       const PhaseNoiseSpec& jitter, std::uint64_t seed) {
  if (trip1.size() != trip2.size()) throw std::invalid_argument("fd_gate_level: trip length mismatch");
  if (transfer.period() == 0 || transfer.trip2_gain.size() != transfer.period()) {
    throw std::invalid_argument("fd_gate_level: malformed transfer");
  }
  const IQSeries t1 = apply_phase_noise(trip1, jitter, 0, seed);
  const IQSeries t2 = apply_phase_noise(trip2, jitter, -1, seed);
  IQSeries out(trip1.size(), trip1.dt);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::size_t i = k % transfer.period();
    out[k] = transfer.trip1_gain[i] * t1[k] + transfer.trip2_gain[i] * t2[k];
  }
  return out;
}

IQSeries apply_if_alternation(const IQSeries& series, const RadarConfig& cfg, const NCOPlan& plan) {
  IQSeries out = series;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] *= cfg.if_gain(plan.freq_for_pulse(static_cast<long>(k)));
  }
  return out;
}

double half_spectrum_velocity(const IQSeries& series, const RadarConfig& cfg) {
  auto spec = fft::forward(series.view());
  const std::size_t m = spec.size();
  for (std::size_t k = m - static_cast<std::size_t>(kHalfSpectrumBlanked * static_cast<double>(m)); k < m; ++k) {
    spec[k] = 0.0;
  }
  const auto half = fft::inverse(spec);
  return moments_from_autocorr(0.0, autocorrelation(half).r1, cfg).velocity;
}

MomentSet fd_retrieve_moments(const IQSeries& series, const RadarConfig& cfg, double snr_gate_db,
                              std::optional<double> crude_v) {
  const std::size_t m = series.size();
  if (m < 32) throw std::invalid_argument("fd_retrieve_moments: series length must be >= 32");

  const double noise = noise_linear(cfg);
  const double r0 = mean_power(series);
  const double snr_db = noise > 0.0 ? linear_to_db(std::max(r0 - noise, 0.0) / noise)
                                    : std::numeric_limits<double>::infinity();

  MomentSet out;
  const bool low = !(snr_db >= snr_gate_db);
  if (low) {
    out.set(MomentFlag::low_snr);
    if (!crude_v) {
      out.set(MomentFlag::no_retrieval);
      return out;
    }
  }

  double crude = 0.0;
  if (crude_v) {
    crude = *crude_v;
  } else {
    crude = half_spectrum_velocity(series, cfg);
    out.set(MomentFlag::sideband_branch_unverified);
  }

  const NotchSpec band{cfg.velocity_to_cycles(crude), kFdNotchWidth};
  const IQSeries kept = notch_filter(series, band, NotchMode::keep_center);
  const auto ac = autocorrelation(kept.view());
  const double s = ac.r0 - noise * notch_pass_fraction(band, NotchMode::keep_center, m);
  const cplx r1 = ac.r1 - noise * notch_noise_lag1(band, NotchMode::keep_center, m);
  const auto pp = moments_from_autocorr(s, r1, cfg);

  out.power_db = s > 0.0 ? linear_to_db(s) : -std::numeric_limits<double>::infinity();
  out.velocity = pp.velocity;
  out.width = pp.width;
  return out;
}

MomentSet resolve_branch(const MomentSet& moments, double reference_velocity,
                         const RadarConfig& cfg) {
  MomentSet out = moments;
  out.clear(MomentFlag::sideband_branch_unverified);
  if (!moments.retrieved()) return out;
  const double vu = cfg.unambiguous_velocity();
  const double alt = wrap_symmetric(moments.velocity + vu, vu);
  const double d0 = std::abs(wrap_symmetric(moments.velocity - reference_velocity, vu));
  const double d1 = std::abs(wrap_symmetric(alt - reference_velocity, vu));
  if (d1 < d0) out.velocity = alt;
  return out;
}

MomentField fd_propagate(const GateField& field, const RadarConfig& cfg, int start_gate,
                         int start_ray, const PropagationOptions& options) {
  if (field.gates <= 0 || field.rays <= 0 ||
      field.cells.size() != static_cast<std::size_t>(field.gates) * field.rays) {
    throw std::invalid_argument("fd_propagate: malformed field");
  }
  if (start_gate < 0 || start_gate >= field.gates || start_ray < 0 || start_ray >= field.rays) {
    throw std::invalid_argument("fd_propagate: start cell outside the field");
  }

  MomentField out;
  out.gates = field.gates;
  out.rays = field.rays;
  out.cells.resize(field.cells.size());
  for (auto& c : out.cells) c.set(MomentFlag::no_retrieval);
  out.branch_unverified = !options.start_crude.has_value();

  const auto& start_series = field.at(start_gate, start_ray);
  if (start_series.size() < 32) throw RetrievalError("start cell not retrievable: no series");
  MomentSet first = fd_retrieve_moments(start_series, cfg, options.snr_gate_db, options.start_crude);
  if (!first.retrieved() || first.has(MomentFlag::low_snr)) {
    throw RetrievalError("start cell not retrievable: below the SNR gate");
  }

  auto mark = [&](MomentSet m) {
    m.clear(MomentFlag::sideband_branch_unverified);
    if (out.branch_unverified) m.set(MomentFlag::sideband_branch_unverified);
    return m;
  };

  std::vector<bool> visited(field.cells.size(), false);
  std::deque<std::pair<int, int>> queue;
  out.at(start_gate, start_ray) = mark(first);
  visited[field.index(start_gate, start_ray)] = true;
  queue.emplace_back(start_gate, start_ray);

  constexpr int kSteps[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  while (!queue.empty()) {
    const auto [g, r] = queue.front();
    queue.pop_front();
    const double crude = out.at(g, r).velocity;
    for (const auto& step : kSteps) {
      const int ng = g + step[0];
      const int nr = r + step[1];
      if (ng < 0 || ng >= field.gates || nr < 0 || nr >= field.rays) continue;
      const std::size_t idx = field.index(ng, nr);
      if (visited[idx]) continue;
      visited[idx] = true;
      const auto& s = field.cells[idx];
      if (s.size() < 32) continue;
      const MomentSet ms = mark(fd_retrieve_moments(s, cfg, options.snr_gate_db, crude));
      out.cells[idx] = ms;
      if (!ms.has(MomentFlag::low_snr)) queue.emplace_back(ng, nr);
    }
  }
  return out;
}

void flip_branch(MomentField& field, const RadarConfig& cfg) {
  const double vu = cfg.unambiguous_velocity();
  for (auto& c : field.cells) {
    if (c.retrieved()) c.velocity = wrap_symmetric(c.velocity + vu, vu);
  }
}

}  // namespace tripsep
