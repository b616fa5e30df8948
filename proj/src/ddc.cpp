#include "tripsep/ddc.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tripsep/remez.hpp"

namespace tripsep {

void FilterMask::validate() const {
  if (!(passband_edge > 0.0) || !(stopband_edge > passband_edge)) {
    throw std::invalid_argument("filter mask: need stopband_edge > passband_edge > 0");
  }
  if (!(passband_ripple_db > 0.0) || !(stopband_atten_db > 0.0)) {
    throw std::invalid_argument("filter mask: ripple and attenuation must be > 0");
  }
}

int DecimationChain::total_decimation() const {
  int d = 1;
  for (const auto& s : stages) d *= s.decimation;
  return d;
}

void DecimationChain::validate() const {
  if (stages.empty()) throw std::invalid_argument("decimation chain has no stages");
  for (const auto& s : stages) {
    if (s.decimation < 1) throw std::invalid_argument("decimation factor must be >= 1");
    if (s.taps.empty()) throw std::invalid_argument("decimation stage has no taps");
  }
}

cplx stage_response(const FilterStage& stage, double cycles) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < stage.taps.size(); ++i) {
    acc += stage.taps[i] * std::polar(1.0, -2.0 * kPi * cycles * static_cast<double>(i));
  }
  return acc;
}

cplx chain_response(const DecimationChain& chain, double freq_hz, double sample_rate) {
  cplx h = 1.0;
  double rate = sample_rate;
  for (const auto& s : chain.stages) {
    h *= stage_response(s, freq_hz / rate);
    rate /= s.decimation;
  }
  return h;
}

MaskReport verify_mask(const DecimationChain& chain, const FilterMask& mask, double sample_rate,
                       int grid_points) {
  MaskReport rep;
  rep.grid_points = grid_points;
  for (const auto& s : chain.stages) rep.num_taps += static_cast<int>(s.taps.size());
  double pass_max = 0.0;
  double pass_min = HUGE_VAL;
  double stop_max = 0.0;
  const double nyq = sample_rate / 2.0;
  for (int i = 0; i < grid_points; ++i) {
    const double f = nyq * i / (grid_points - 1);
    const double mag = std::abs(chain_response(chain, f, sample_rate));
    if (f <= mask.passband_edge) {
      pass_max = std::max(pass_max, mag);
      pass_min = std::min(pass_min, mag);
    }
    if (f >= mask.stopband_edge) stop_max = std::max(stop_max, mag);
  }
  rep.ripple_db = 20.0 * std::log10(pass_max / pass_min);
  rep.min_atten_db = stop_max > 0.0 ? 20.0 * std::log10(pass_max / stop_max) : HUGE_VAL;
  rep.passband_ok = rep.ripple_db <= mask.passband_ripple_db;
  rep.stopband_ok = rep.min_atten_db >= mask.stopband_atten_db;
  return rep;
}

DecimationChain design_lowpass(const FilterMask& mask, double sample_rate,
                               const DesignOptions& options) {
  mask.validate();
  if (!(sample_rate > 0.0)) throw std::invalid_argument("design_lowpass: sample_rate must be > 0");
  if (mask.stopband_edge > sample_rate / 2.0) {
    throw DesignFailure("design_lowpass: stopband edge above Nyquist");
  }
  int decim = 1;
  if (options.output_rate > 0.0) {
    decim = std::max(1, static_cast<int>(std::floor(sample_rate / options.output_rate + 1e-9)));
    if (sample_rate / decim / 2.0 < mask.passband_edge) {
      throw DesignFailure("design_lowpass: output Nyquist below passband edge");
    }
  }

  const double lin = std::pow(10.0, mask.passband_ripple_db / 20.0);
  const double pass_dev = (lin - 1.0) / (lin + 1.0);
  const double stop_dev = std::pow(10.0, -mask.stopband_atten_db / 20.0);
  const double fp = mask.passband_edge / sample_rate;
  const double fs = mask.stopband_edge / sample_rate;

  for (int taps = estimate_lowpass_taps(pass_dev, stop_dev, fs - fp); taps <= options.max_taps;
       taps += 2) {
    auto h = remez_lowpass(taps, fp, std::min(fs, 0.5), pass_dev / stop_dev);
    const double dc = std::accumulate(h.begin(), h.end(), 0.0);
    if (!(std::abs(dc) > 0.0) || !std::isfinite(dc)) continue;
    for (auto& c : h) c /= dc;
    DecimationChain chain{{FilterStage{std::move(h), decim}}};
    if (verify_mask(chain, mask, sample_rate, options.grid_points).pass()) return chain;
  }
  throw DesignFailure("design_lowpass: mask needs more than " + std::to_string(options.max_taps) +
                      " taps");
}

void write_chain(std::ostream& os, const DecimationChain& chain) {
  char buf[64];
  for (std::size_t k = 0; k < chain.stages.size(); ++k) {
    os << "# stage " << (k + 1) << ", decim " << chain.stages[k].decimation << '\n';
    for (double c : chain.stages[k].taps) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      os << buf << '\n';
    }
  }
}

DecimationChain read_chain(std::istream& is) {
  DecimationChain chain;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      int k = 0;
      int d = 0;
      if (std::sscanf(line.c_str(), "# stage %d, decim %d", &k, &d) != 2) {
        throw std::invalid_argument("chain file line " + std::to_string(lineno) +
                                    ": malformed stage header");
      }
      chain.stages.push_back(FilterStage{{}, d});
      continue;
    }
    if (chain.stages.empty()) {
      throw std::invalid_argument("chain file line " + std::to_string(lineno) +
                                  ": coefficient before first stage header");
    }
    std::istringstream ss(line);
    double c = 0.0;
    if (!(ss >> c)) {
      throw std::invalid_argument("chain file line " + std::to_string(lineno) +
                                  ": not a number");
    }
    chain.stages.back().taps.push_back(c);
  }
  chain.validate();
  return chain;
}

IQSeries mix(const IQSeries& series, double nco_freq, double phase0) {
  IQSeries out = series;
  if (nco_freq == 0.0 && phase0 == 0.0) return out;
  const double fs = 1.0 / series.dt;
  const double f = wrap_symmetric(nco_freq, fs / 2.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double t = static_cast<double>(n) * series.dt;
    out[n] *= std::polar(1.0, -(2.0 * kPi * f * t + phase0));
  }
  return out;
}

IQSeries apply_chain(const DecimationChain& chain, const IQSeries& series) {
  chain.validate();
  IQSeries cur = series;
  for (const auto& st : chain.stages) {
    const auto& h = st.taps;
    const long nx = static_cast<long>(cur.size());
    const long nh = static_cast<long>(h.size());
    const long d = st.decimation;
    const long ny = (nx + nh - 2) / d + 1;
    IQSeries out(static_cast<std::size_t>(ny), cur.dt * static_cast<double>(d));
    for (long m = 0; m < ny; ++m) {
      const long n = m * d;
      cplx acc = 0.0;
      const long i_lo = std::max(0L, n - (nx - 1));
      const long i_hi = std::min(nh - 1, n);
      for (long i = i_lo; i <= i_hi; ++i) acc += h[static_cast<std::size_t>(i)] * cur[static_cast<std::size_t>(n - i)];
      out[static_cast<std::size_t>(m)] = acc;
    }
    cur = std::move(out);
  }
  return cur;
}

double NCOPlan::freq_for_pulse(long pulse_index) const {
  if (frame.empty()) throw std::invalid_argument("NCO plan has an empty frame");
  const long n = static_cast<long>(frame.size());
  long k = pulse_index % n;
  if (k < 0) k += n;
  return frame[static_cast<std::size_t>(k)];
}

void NCOPlan::validate(const RadarConfig& cfg) const {
  if (frame.size() != 2 && frame.size() != 4) {
    throw std::invalid_argument("NCO plan frame length must be 2 or 4");
  }
  for (double f : frame) {
    if (f != cfg.if_freq1 && f != cfg.if_freq2) {
      throw std::invalid_argument("NCO plan frequency not in radar if_freqs");
    }
  }
}

NCOPlan NCOPlan::first_trip(const RadarConfig& cfg) {
  return {{cfg.if_freq1, cfg.if_freq2}, NcoRole::first_trip};
}

NCOPlan NCOPlan::second_trip(const RadarConfig& cfg) {
  return {{cfg.if_freq2, cfg.if_freq1}, NcoRole::second_trip};
}

NCOPlan NCOPlan::interleaved(const RadarConfig& cfg) {
  return {{cfg.if_freq1, cfg.if_freq2, cfg.if_freq2, cfg.if_freq1}, NcoRole::interleaved};
}

IQSeries downconvert(const IQSeries& series, long pulse_index, const NCOPlan& plan,
                     const DecimationChain& chain) {
  if (series.empty() || static_cast<int>(series.size()) < chain.total_decimation()) {
    throw std::invalid_argument("downconvert: series shorter than the chain decimation");
  }
  return apply_chain(chain, mix(series, plan.freq_for_pulse(pulse_index), 0.0));
}

}  // namespace tripsep
