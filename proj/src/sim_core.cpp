#include "tripsep/sim_core.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tripsep/fft.hpp"
#include "tripsep/rng.hpp"

namespace tripsep {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void RadarConfig::validate() const {
  require(wavelength > 0.0, "radar.wavelength must be > 0");
  require(pulse_width > 0.0, "radar.pulse_width must be > 0");
  require(prt > pulse_width, "radar.prt must exceed radar.pulse_width");
  require(num_pulses >= 2 && num_pulses % 2 == 0, "radar.num_pulses must be even and >= 2");
  require(if_sample_rate > 0.0, "radar.if_sample_rate must be > 0");
  require(pulse_taper >= 0.0 && pulse_taper <= 1.0, "radar.pulse_taper must lie in [0, 1]");
  require(chirp_bandwidth >= 0.0, "radar.chirp_bandwidth must be >= 0");
  require(std::abs(if_freq1 - if_freq2) > chirp_bandwidth,
          "radar.if_freqs must be separated by more than the chirp bandwidth");
  require(std::isfinite(noise_power_db) || noise_power_db < 0.0,
          "radar.noise_power must be finite or -inf");
}

cplx RadarConfig::if_gain(double if_freq) const {
  if (if_freq == if_freq2) {
    return std::polar(std::pow(10.0, if2_gain_db / 20.0), deg_to_rad(if2_phase_deg));
  }
  return {1.0, 0.0};
}

RadarConfig RadarConfig::s_band_scenario() { return RadarConfig{}; }

RadarConfig RadarConfig::ku_band() {
  RadarConfig c;
  c.wavelength = kSpeedOfLight / 13.91e9;
  c.prt = 500.0e-6;
  return c;
}

void DualPolTripSpec::validate(const RadarConfig& cfg) const {
  require(base.width > 0.0, "trip.width must be > 0");
  require(std::abs(base.velocity) <= cfg.unambiguous_velocity(),
          "trip.velocity must lie within +/- v_unb (aliased truth is rejected)");
  require(rho_hv >= 0.0 && rho_hv <= 1.0, "trip.rho_hv must lie in [0, 1]");
  require(base.trip_index == 1 || base.trip_index == 2, "trip.trip_index must be 1 or 2");
}

double jitter_from_area(double area_db) { return std::sqrt(2.0 * std::pow(10.0, area_db / 10.0)); }

DualPolSeries simulate_trip(const RadarConfig& cfg, const DualPolTripSpec& spec,
                            std::uint64_t seed) {
  cfg.validate();
  spec.validate(cfg);

  const int m = cfg.num_pulses;
  const double f0 = cfg.velocity_to_cycles(spec.base.velocity);
  const double sigma = cfg.velocity_to_cycles(spec.base.width);

  std::vector<double> psd(static_cast<std::size_t>(m));
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    const double d = wrap_symmetric(static_cast<double>(k) / m - f0, 0.5);
    double s = 0.0;
    for (int alias = -3; alias <= 3; ++alias) {
      const double x = (d + alias) / sigma;
      s += std::exp(-0.5 * x * x);
    }
    psd[static_cast<std::size_t>(k)] = s;
    total += s;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument(
        "trip.width too small: the discretized Gaussian spectrum underflows to zero");
  }

  const double power = db_to_linear(spec.base.power_db);
  ComplexGaussian draw(seed);
  std::vector<cplx> co(static_cast<std::size_t>(m));
  std::vector<cplx> indep(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    co[static_cast<std::size_t>(k)] =
        std::sqrt(psd[static_cast<std::size_t>(k)] * m * power / total) * draw();
  }
  for (int k = 0; k < m; ++k) {
    indep[static_cast<std::size_t>(k)] =
        std::sqrt(psd[static_cast<std::size_t>(k)] * m * power / total) * draw();
  }

  // x[n] = (1/sqrt(M)) sum_k X[k] e^{+j2pi kn/M}, so mean |x|^2 = (1/M) sum |X|^2.
  const double root_m = std::sqrt(static_cast<double>(m));
  auto h = fft::inverse(co);
  auto w = fft::inverse(indep);
  const double v_gain = std::pow(10.0, -spec.zdr_db / 20.0);
  const double rho = spec.rho_hv;
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  DualPolSeries out{IQSeries(static_cast<std::size_t>(m), cfg.prt),
                    IQSeries(static_cast<std::size_t>(m), cfg.prt)};
  for (std::size_t i = 0; i < h.size(); ++i) {
    out.h[i] = root_m * h[i];
    out.v[i] = v_gain * root_m * (rho * h[i] + rho_c * w[i]);
  }
  return out;
}

double phase_noise_sample(const PhaseNoiseSpec& pn, std::uint64_t seed, std::int64_t k) {
  return deg_to_rad(pn.rms_jitter_deg) * gaussian_at(seed, k);
}

IQSeries apply_phase_noise(const IQSeries& series, const PhaseNoiseSpec& pn, int pulse_offset,
                           std::uint64_t seed) {
  if (pn.rms_jitter_deg < 0.0) throw std::invalid_argument("rms_jitter must be >= 0");
  IQSeries out = series;
  if (pn.rms_jitter_deg == 0.0) return out;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double phi =
        phase_noise_sample(pn, seed, static_cast<std::int64_t>(k) + pulse_offset);
    out[k] *= std::polar(1.0, phi);
  }
  return out;
}

double ratio_gain(const IQSeries& strong, const IQSeries& weak, double ratio_db) {
  const double ps = mean_power(strong);
  const double pw = mean_power(weak);
  if (ps <= 0.0) return 0.0;
  return std::sqrt(pw * db_to_linear(ratio_db) / ps);
}

IQSeries overlay_trips(const IQSeries& trip1, const IQSeries& trip2, double p1_over_p2_db) {
  if (trip1.size() != trip2.size()) {
    throw std::invalid_argument("overlay_trips: trip lengths differ");
  }
  if (std::isinf(p1_over_p2_db) && p1_over_p2_db > 0.0) return trip1;
  const double p1 = mean_power(trip1);
  const double p2 = mean_power(trip2);
  if (p2 <= 0.0) return trip1;
  const double g = std::sqrt(p1 / (p2 * db_to_linear(p1_over_p2_db)));
  IQSeries out = trip1;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += g * trip2[k];
  return out;
}

IQSeries add_white_noise(const IQSeries& series, double noise_power_db, std::uint64_t seed) {
  IQSeries out = series;
  if (std::isinf(noise_power_db) && noise_power_db < 0.0) return out;
  const double amp = std::sqrt(db_to_linear(noise_power_db));
  ComplexGaussian draw(seed);
  for (auto& v : out) v += amp * draw();
  return out;
}

}  // namespace tripsep
