#include "tripsep/sz_coding.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tripsep/fft.hpp"

namespace tripsep {

namespace {

double wrap_phase(double x) { return wrap_symmetric(x, kPi); }

void check_replicas(const SZCode& code) {
  const auto spec = fft::forward(code.modulation_code());
  std::vector<double> mags;
  double peak = 0.0;
  for (const auto& s : spec) peak = std::max(peak, std::abs(s));
  for (const auto& s : spec) {
    if (std::abs(s) > 1e-6 * peak) mags.push_back(std::abs(s));
  }
  const auto [lo, hi] = std::minmax_element(mags.begin(), mags.end());
  if (static_cast<int>(mags.size()) != code.n || (*hi - *lo) > 1e-9 * *hi) {
    throw std::invalid_argument("invalid SZ(" + std::to_string(code.n) + "/" +
                                std::to_string(code.m) + "): replica structure does not hold");
  }
}

}  // namespace

double SZCode::switching(long k) const {
  const long mm = static_cast<long>(switching_phase.size());
  return switching_phase[static_cast<std::size_t>(((k % mm) + mm) % mm)];
}

std::vector<cplx> SZCode::modulation_code() const {
  std::vector<cplx> c(modulation_phase.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::polar(1.0, modulation_phase[k]);
  return c;
}

SZCode gen_sz(int n, int m) {
  if (m < 2 || n < 1 || m % n != 0) {
    throw std::invalid_argument("invalid SZ(" + std::to_string(n) + "/" + std::to_string(m) +
                                "): n must divide M and M >= 2");
  }
  SZCode code;
  code.n = n;
  code.m = m;
  code.switching_phase.resize(static_cast<std::size_t>(m));
  code.modulation_phase.resize(static_cast<std::size_t>(m));
  // Integer accumulation modulo 2n keeps the phases exact for any M.
  long long acc = 0;
  const long long period = 2LL * n;
  for (int k = 0; k < m; ++k) {
    acc = (acc + (static_cast<long long>(k) * k) % period) % period;
    code.switching_phase[static_cast<std::size_t>(k)] = wrap_phase(kPi * static_cast<double>(acc) / n);
  }
  for (int k = 0; k < m; ++k) {
    code.modulation_phase[static_cast<std::size_t>(k)] =
        wrap_phase(code.switching(k) - code.switching(k - 1));
  }
  check_replicas(code);
  return code;
}

IQSeries encode(const IQSeries& trip1, const IQSeries& trip2, const SZCode& code,
                double p1_over_p2_db) {
  const auto m = static_cast<std::size_t>(code.m);
  if (trip1.size() != m || trip2.size() != m) {
    throw std::invalid_argument("encode: series lengths must equal the code length");
  }
  IQSeries t1 = trip1;
  IQSeries t2 = trip2;
  for (std::size_t k = 0; k < m; ++k) {
    const long kk = static_cast<long>(k);
    t1[k] *= std::polar(1.0, code.switching(kk));
    t2[k] *= std::polar(1.0, code.switching(kk - 1));
  }
  return overlay_trips(t1, t2, p1_over_p2_db);
}

IQSeries cohere(const IQSeries& received, const SZCode& code, int trip) {
  if (trip != 1 && trip != 2) throw std::invalid_argument("cohere: trip must be 1 or 2");
  if (received.size() != static_cast<std::size_t>(code.m)) {
    throw std::invalid_argument("cohere: series length must equal the code length");
  }
  IQSeries out = received;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] *= std::polar(1.0, -code.switching(static_cast<long>(k) - (trip - 1)));
  }
  return out;
}

double estimate_strong_velocity(const IQSeries& cohered, const RadarConfig& cfg) {
  return pulse_pair(cohered, cfg, -std::numeric_limits<double>::infinity()).velocity;
}

MomentSet retrieve_weak_trip(const IQSeries& cohered, const SZCode& code, double strong_velocity,
                             const RadarConfig& cfg, const SZRetrievalOptions& options) {
  const std::size_t m = static_cast<std::size_t>(code.m);
  if (cohered.size() != m) throw std::invalid_argument("retrieve_weak_trip: length mismatch");
  if (options.strong_trip != 1 && options.strong_trip != 2) {
    throw std::invalid_argument("retrieve_weak_trip: strong_trip must be 1 or 2");
  }
  if (!(options.notch_width > 0.0) || options.notch_width > 1.0 - 2.0 / code.n + 1e-12) {
    throw std::invalid_argument("retrieve_weak_trip: notch too wide, fewer than 2 replicas retained");
  }

  const auto taps = window_taps(options.window, m);
  IQSeries windowed = cohered;
  double tap_power = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    windowed[k] *= taps[k];
    tap_power += taps[k] * taps[k];
  }
  tap_power /= static_cast<double>(m);

  const NotchSpec notch{cfg.velocity_to_cycles(strong_velocity), options.notch_width};
  const IQSeries notched = notch_filter(windowed, notch, NotchMode::remove_center);

  const bool has_noise = std::isfinite(options.noise_power_db);
  const double noise = has_noise ? db_to_linear(options.noise_power_db) : 0.0;
  const double pass = notch_pass_fraction(notch, NotchMode::remove_center, m);
  const double noise_post = noise * tap_power * pass;
  const double p_post = mean_power(notched);

  MomentSet out;
  const double signal = p_post - noise_post;
  const bool weak_absent = has_noise
                               ? !(signal > noise_post * db_to_linear(options.min_snr_db))
                               : !(p_post > 1e-12 * mean_power(windowed));
  if (weak_absent) {
    out.set(MomentFlag::low_snr);
    out.set(MomentFlag::no_retrieval);
    return out;
  }

  // Strong trip 1 -> weak trip 2: exp(-j(psi_{k-1} - psi_k)); the reverse
  // for a series cohered to trip 2.
  IQSeries recohered = notched;
  const double sign = options.strong_trip == 1 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < m; ++k) {
    const long kk = static_cast<long>(k);
    recohered[k] *= std::polar(1.0, -sign * (code.switching(kk - 1) - code.switching(kk)));
  }

  const auto ac = autocorrelation(recohered.view());
  const auto pp = moments_from_autocorr(ac.r0 - noise_post, ac.r1, cfg);
  out.power_db = signal > 0.0 ? linear_to_db(signal) : -std::numeric_limits<double>::infinity();
  out.velocity = pp.velocity;
  out.width = pp.width;
  out.set(MomentFlag::replica_broadened);
  return out;
}

}  // namespace tripsep
