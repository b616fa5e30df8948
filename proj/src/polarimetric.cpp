#include "tripsep/polarimetric.hpp"

#include <algorithm>
#include <stdexcept>

namespace tripsep {

namespace {

void require_pair(const IQSeries& h, const IQSeries& v) {
  if (h.size() != v.size()) throw std::invalid_argument("H and V series lengths differ");
  if (h.empty()) throw std::invalid_argument("empty H/V series");
}

cplx cross(const IQSeries& a, const IQSeries& b) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc / static_cast<double>(a.size());
}

}  // namespace

Autocorr autocorrelation(std::span<const cplx> x) {
  Autocorr a;
  if (x.empty()) return a;
  a.r0 = mean_power(x);
  if (x.size() < 2) return a;
  cplx acc = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) acc += x[k] * std::conj(x[k + 1]);
  a.r1 = acc / static_cast<double>(x.size() - 1);
  return a;
}

PulsePairMoments moments_from_autocorr(double signal_power, cplx r1, const RadarConfig& cfg) {
  PulsePairMoments m;
  m.power = signal_power;
  m.velocity = -cfg.wavelength / (4.0 * kPi * cfg.prt) * std::arg(r1);
  const double mag = std::abs(r1);
  if (signal_power > 0.0 && mag > 0.0) {
    const double scale = cfg.wavelength / (2.0 * kPi * cfg.prt * std::sqrt(2.0));
    m.width = scale * std::sqrt(std::max(0.0, std::log(signal_power / mag)));
  } else {
    m.width = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

PulsePairMoments pulse_pair(const IQSeries& series, const RadarConfig& cfg,
                            double noise_power_db) {
  if (series.size() < 2) throw std::invalid_argument("pulse_pair: need at least 2 samples");
  const auto ac = autocorrelation(series.view());
  const double noise = std::isinf(noise_power_db) && noise_power_db < 0.0
                           ? 0.0
                           : db_to_linear(noise_power_db);
  return moments_from_autocorr(ac.r0 - noise, ac.r1, cfg);
}

double rho_hv(const IQSeries& h, const IQSeries& v) {
  require_pair(h, v);
  const double ph = mean_power(h);
  const double pv = mean_power(v);
  if (!(ph > 0.0) || !(pv > 0.0)) throw std::invalid_argument("rho_hv: zero-power channel");
  return std::abs(cross(v, h)) / std::sqrt(ph * pv);
}

double zdr(const IQSeries& h, const IQSeries& v) {
  require_pair(h, v);
  const double pv = mean_power(v);
  if (!(pv > 0.0)) throw std::invalid_argument("zdr: zero V power");
  return linear_to_db(mean_power(h) / pv);
}

void LeakageModel::validate() const {
  if (std::abs(filter_gain_h) > 1.0 || std::abs(filter_gain_v) > 1.0) {
    throw std::invalid_argument("leakage gains must satisfy |gain| <= 1");
  }
}

LeakageModel LeakageModel::from_db(double leak_db) {
  return equal(cplx(std::pow(10.0, leak_db / 20.0), 0.0));
}

RvhTerms rvh_decomposition(const DualPolSeries& trip1, const DualPolSeries& trip2,
                           const LeakageModel& leak, int target_trip) {
  if (target_trip != 1 && target_trip != 2) throw std::invalid_argument("target_trip must be 1 or 2");
  const auto& t = target_trip == 1 ? trip1 : trip2;
  const auto& o = target_trip == 1 ? trip2 : trip1;
  require_pair(t.h, t.v);
  require_pair(o.h, o.v);
  require_pair(t.h, o.h);
  const cplx fh = leak.filter_gain_h;
  const cplx fv = leak.filter_gain_v;
  RvhTerms r;
  r.clean = cross(t.v, t.h);
  r.other = fv * std::conj(fh) * cross(o.v, o.h);
  r.cross_a = std::conj(fh) * cross(t.v, o.h);
  r.cross_b = fv * cross(o.v, t.h);
  return r;
}

ContaminationResult contaminated_moments(const DualPolSeries& trip1, const DualPolSeries& trip2,
                                         const LeakageModel& leak, int target_trip) {
  leak.validate();
  const auto terms = rvh_decomposition(trip1, trip2, leak, target_trip);
  const auto& t = target_trip == 1 ? trip1 : trip2;
  const auto& o = target_trip == 1 ? trip2 : trip1;

  IQSeries h = t.h;
  IQSeries v = t.v;
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] += leak.filter_gain_h * o.h[i];
    v[i] += leak.filter_gain_v * o.v[i];
  }

  auto fill = [](const IQSeries& hh, const IQSeries& vv) {
    MomentSet m;
    m.power_db = linear_to_db(mean_power(hh));
    m.rho_hv_raw = rho_hv(hh, vv);
    m.rho_hv = std::clamp(m.rho_hv_raw, 0.0, 1.0);
    m.zdr_db = zdr(hh, vv);
    return m;
  };

  ContaminationResult res;
  res.clean = fill(t.h, t.v);
  res.contaminated = fill(h, v);
  res.rho_bias = res.contaminated.rho_hv - res.clean.rho_hv;
  res.zdr_bias_db = res.contaminated.zdr_db - res.clean.zdr_db;
  res.rvh_measured = cross(v, h);
  res.terms = terms;
  return res;
}

}  // namespace tripsep
