#include "tripsep/remez.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tripsep/iq_series.hpp"

namespace tripsep {

namespace {

struct Grid {
  std::vector<double> freq;     // cycles/sample
  std::vector<double> desired;
  std::vector<double> weight;
  std::vector<int> band;        // 0 = pass, 1 = stop
};

Grid make_grid(int r, double fp, double fs, double stop_weight) {
  constexpr int kDensity = 20;
  const double df = 0.5 / (kDensity * r);
  Grid g;
  auto add_band = [&](double lo, double hi, double d, double w, int id) {
    const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / df)) + 1);
    for (int i = 0; i < n; ++i) {
      g.freq.push_back(lo + (hi - lo) * i / (n - 1));
      g.desired.push_back(d);
      g.weight.push_back(w);
      g.band.push_back(id);
    }
  };
  add_band(0.0, fp, 1.0, 1.0, 0);
  add_band(fs, 0.5, 0.0, stop_weight, 1);
  return g;
}

// Barycentric weights 1/prod_{j!=i}(x_i - x_j), rescaled to avoid overflow.
std::vector<double> bary_weights(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> logmag(n, 0.0);
  std::vector<int> sign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = x[i] - x[j];
      logmag[i] -= std::log(std::abs(d));
      if (d < 0.0) sign[i] = -sign[i];
    }
  }
  const double top = *std::max_element(logmag.begin(), logmag.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = sign[i] * std::exp(logmag[i] - top);
  return w;
}

class Interpolant {
 public:
  Interpolant(std::vector<double> nodes, std::vector<double> values)
      : x_(std::move(nodes)), c_(std::move(values)), b_(bary_weights(x_)) {}

  double operator()(double x) const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double d = x - x_[i];
      if (d == 0.0) return c_[i];
      const double t = b_[i] / d;
      num += t * c_[i];
      den += t;
    }
    return num / den;
  }

 private:
  std::vector<double> x_;
  std::vector<double> c_;
  std::vector<double> b_;
};

}  // namespace

int estimate_lowpass_taps(double pass_dev, double stop_dev, double transition_width) {
  const double n =
      (-20.0 * std::log10(std::sqrt(pass_dev * stop_dev)) - 13.0) / (14.6 * transition_width) + 1.0;
  int taps = std::max(3, static_cast<int>(std::ceil(n)));
  if (taps % 2 == 0) ++taps;
  return taps;
}

std::vector<double> remez_lowpass(int num_taps, double pass_edge, double stop_edge,
                                  double stop_weight, double* deviation) {
  if (num_taps < 3 || num_taps % 2 == 0) {
    throw std::invalid_argument("remez_lowpass: num_taps must be odd and >= 3");
  }
  if (!(pass_edge > 0.0 && pass_edge < stop_edge && stop_edge <= 0.5)) {
    throw std::invalid_argument("remez_lowpass: need 0 < pass_edge < stop_edge <= 0.5");
  }
  const int r = (num_taps + 1) / 2;  // cosine terms
  const Grid g = make_grid(r, pass_edge, stop_edge, stop_weight);
  const int ng = static_cast<int>(g.freq.size());
  if (ng < r + 1) throw std::runtime_error("remez_lowpass: grid too coarse");

  std::vector<int> ext(static_cast<std::size_t>(r + 1));
  for (int i = 0; i <= r; ++i) {
    ext[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(
        static_cast<double>(i) * (ng - 1) / r));
  }

  std::vector<double> err(static_cast<std::size_t>(ng));
  double delta = 0.0;
  std::vector<double> node_x;
  std::vector<double> node_c;

  auto solve = [&]() {
    std::vector<double> x(static_cast<std::size_t>(r + 1));
    for (int i = 0; i <= r; ++i) {
      x[static_cast<std::size_t>(i)] = std::cos(2.0 * kPi * g.freq[static_cast<std::size_t>(ext[static_cast<std::size_t>(i)])]);
    }
    const auto ad = bary_weights(x);
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i <= r; ++i) {
      const auto gi = static_cast<std::size_t>(ext[static_cast<std::size_t>(i)]);
      const double s = (i % 2 == 0) ? 1.0 : -1.0;
      num += ad[static_cast<std::size_t>(i)] * g.desired[gi];
      den += s * ad[static_cast<std::size_t>(i)] / g.weight[gi];
    }
    delta = num / den;
    node_x.assign(x.begin(), x.begin() + r);
    node_c.resize(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
      const auto gi = static_cast<std::size_t>(ext[static_cast<std::size_t>(i)]);
      const double s = (i % 2 == 0) ? 1.0 : -1.0;
      node_c[static_cast<std::size_t>(i)] = g.desired[gi] - s * delta / g.weight[gi];
    }
  };

  constexpr int kMaxIter = 250;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    solve();
    const Interpolant amp(node_x, node_c);
    for (int j = 0; j < ng; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      err[sj] = g.weight[sj] * (g.desired[sj] - amp(std::cos(2.0 * kPi * g.freq[sj])));
    }

    // Local extrema of the weighted error, band by band, at least |delta|.
    std::vector<int> cand;
    const double floor_mag = std::abs(delta) * (1.0 - 1e-6);
    for (int j = 0; j < ng; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      const bool first = (j == 0) || (g.band[sj] != g.band[sj - 1]);
      const bool last = (j == ng - 1) || (g.band[sj] != g.band[sj + 1]);
      const double e = err[sj];
      const double prev = first ? 0.0 : err[sj - 1];
      const double next = last ? 0.0 : err[sj + 1];
      bool is_ext;
      if (e > 0.0) {
        is_ext = (first || e >= prev) && (last || e >= next);
      } else {
        is_ext = (first || e <= prev) && (last || e <= next);
      }
      if (is_ext && std::abs(e) >= floor_mag) cand.push_back(j);
    }

    // Enforce sign alternation by keeping the larger of each same-sign run.
    auto alternate = [&](const std::vector<int>& pts) {
      std::vector<int> alt;
      for (int j : pts) {
        const auto sj = static_cast<std::size_t>(j);
        if (!alt.empty() && (err[static_cast<std::size_t>(alt.back())] > 0.0) == (err[sj] > 0.0)) {
          if (std::abs(err[sj]) > std::abs(err[static_cast<std::size_t>(alt.back())])) alt.back() = j;
        } else {
          alt.push_back(j);
        }
      }
      while (static_cast<int>(alt.size()) > r + 1) {
        if (std::abs(err[static_cast<std::size_t>(alt.front())]) <
            std::abs(err[static_cast<std::size_t>(alt.back())])) {
          alt.erase(alt.begin());
        } else {
          alt.pop_back();
        }
      }
      return alt;
    };
    std::vector<int> alt = alternate(cand);
    if (static_cast<int>(alt.size()) < r + 1) {
      // Roundoff can hide a reference point; fall back on the union.
      std::vector<int> merged = cand;
      merged.insert(merged.end(), ext.begin(), ext.end());
      std::sort(merged.begin(), merged.end());
      merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
      alt = alternate(merged);
    }
    if (static_cast<int>(alt.size()) < r + 1) break;

    double emax = 0.0;
    for (int j : alt) emax = std::max(emax, std::abs(err[static_cast<std::size_t>(j)]));
    const bool same = (alt == ext);
    ext = alt;
    if (same || (emax - std::abs(delta)) <= 1e-10 * emax) break;
  }

  solve();
  const Interpolant amp(node_x, node_c);
  const int n = num_taps;
  std::vector<double> a_samples(static_cast<std::size_t>(r));
  for (int m = 0; m < r; ++m) {
    a_samples[static_cast<std::size_t>(m)] = amp(std::cos(2.0 * kPi * m / n));
  }
  std::vector<double> h(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double acc = a_samples[0];
    for (int m = 1; m < r; ++m) {
      acc += 2.0 * a_samples[static_cast<std::size_t>(m)] *
             std::cos(2.0 * kPi * m * (i - (r - 1)) / n);
    }
    h[static_cast<std::size_t>(i)] = acc / n;
  }
  if (deviation != nullptr) *deviation = std::abs(delta);
  return h;
}

}  // namespace tripsep
