#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tripsep/fft.hpp"
#include "tripsep/freq_diversity.hpp"
#include "tripsep/rng.hpp"
#include "tripsep/waveform_dsp.hpp"

using namespace tripsep;

namespace {

struct Rig {
  RadarConfig cfg = RadarConfig::s_band_scenario();
  DecimationChain chain;
  IQSeries ref;

  Rig() {
    DesignOptions opt;
    opt.output_rate = 2.0e6;
    chain = design_lowpass(FilterMask{}, cfg.if_sample_rate, opt);
    ref = radar_chirp(cfg, cfg.if_sample_rate / chain.total_decimation());
  }
};

const Rig& rig() {
  static const Rig r;
  return r;
}

IQSeries weather(const RadarConfig& cfg, double velocity, double width, std::uint64_t seed,
                 double power_db = 0.0) {
  DualPolTripSpec t;
  t.base.velocity = velocity;
  t.base.width = width;
  t.base.power_db = power_db;
  return simulate_trip(cfg, t, seed).h;
}

IQSeries constant(const RadarConfig& cfg, cplx value) {
  return IQSeries(std::vector<cplx>(static_cast<std::size_t>(cfg.num_pulses), value), cfg.prt);
}

// Brute-force DFT magnitude squared.
std::vector<double> dft_power(const IQSeries& x) {
  const std::size_t n = x.size();
  std::vector<double> p(n);
  for (std::size_t q = 0; q < n; ++q) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += x[k] * std::polar(1.0, -2.0 * kPi * static_cast<double>((q * k) % n) / static_cast<double>(n));
    }
    p[q] = std::norm(acc);
  }
  return p;
}

double max_abs_diff(const IQSeries& a, const IQSeries& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double max_abs(const IQSeries& a) {
  double d = 0.0;
  for (const auto& v : a) d = std::max(d, std::abs(v));
  return d;
}

// Fraction of a record's energy within +/- half_band Hz of freq.
double band_fraction(const IQSeries& rec, double freq, double half_band, double fs) {
  const auto spec = fft::forward(rec.view());
  const std::size_t n = spec.size();
  double in = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - n) * fs / n;
    const double d = std::abs(wrap_symmetric(f - freq, fs / 2.0));
    const double e = std::norm(spec[k]);
    total += e;
    if (d <= half_band) in += e;
  }
  return in / total;
}

}  // namespace

TEST_CASE("single trip occupies only its own IF band on every pulse") {
  const auto& cfg = rig().cfg;
  const auto tx = NCOPlan::first_trip(cfg);
  const IQSeries t1 = weather(cfg, 3.0, 1.0, 11);
  const IQSeries t2(t1.size(), cfg.prt);
  const auto set = fd_transmit_receive(cfg, t1, t2, tx, {}, 0);
  REQUIRE(set.pulses.size() == t1.size());
  for (std::size_t k = 0; k < 8; ++k) {
    const double f = tx.freq_for_pulse(static_cast<long>(k));
    CHECK(band_fraction(set.pulses[k], f, 2.0e6, cfg.if_sample_rate) > 1.0 - 1e-6);
  }
}

TEST_CASE("two equal-power trips at 60 and 70 MHz IF fill two bands") {
  RadarConfig cfg = rig().cfg;
  cfg.if_freq1 = 60.0e6;
  cfg.if_freq2 = 70.0e6;
  cfg.if_sample_rate = 200.0e6;
  cfg.if2_gain_db = 0.0;
  cfg.if2_phase_deg = 0.0;
  const auto tx = NCOPlan::first_trip(cfg);
  const IQSeries t1 = weather(cfg, 4.0, 1.0, 21);
  const IQSeries t2 = weather(cfg, -6.0, 1.0, 22);
  const auto set = fd_transmit_receive(cfg, t1, t2, tx, {0.5}, 23);
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& rec : set.pulses) {
    const double e = energy(rec.view());
    lo += e * band_fraction(rec, 60.0e6, 2.0e6, cfg.if_sample_rate);
    hi += e * band_fraction(rec, 70.0e6, 2.0e6, cfg.if_sample_rate);
  }
  const double both = lo + hi;
  double total = 0.0;
  for (const auto& rec : set.pulses) total += energy(rec.view());
  CHECK(both / total > 1.0 - 1e-6);
  CHECK(lo / both > 0.25);
  CHECK(hi / both > 0.25);
}

TEST_CASE("transmit rejects mismatched trips") {
  const auto& cfg = rig().cfg;
  CHECK_THROWS_AS(fd_transmit_receive(cfg, IQSeries(4, cfg.prt), IQSeries(6, cfg.prt),
                                      NCOPlan::first_trip(cfg), {}, 0),
                  std::invalid_argument);
}

TEST_CASE("receive plans select the expected trip per pulse") {
  const auto& cfg = rig().cfg;
  const auto tx = NCOPlan::first_trip(cfg);
  CHECK(selected_trips(tx, NCOPlan::first_trip(cfg)) == std::vector<int>{1, 1});
  CHECK(selected_trips(tx, NCOPlan::second_trip(cfg)) == std::vector<int>{2, 2});
  CHECK(selected_trips(tx, NCOPlan::interleaved(cfg)) == std::vector<int>{1, 1, 2, 2});

  const NCOPlan wrong_role{{cfg.if_freq1, cfg.if_freq1}, NcoRole::first_trip};
  CHECK_THROWS_WITH_AS(selected_trips(tx, wrong_role), doctest::Contains("frame mismatch"),
                       std::invalid_argument);
  const NCOPlan steady_tx{{cfg.if_freq1, cfg.if_freq1}, NcoRole::first_trip};
  CHECK_THROWS_WITH_AS(selected_trips(steady_tx, NCOPlan::first_trip(cfg)),
                       doctest::Contains("frame mismatch"), std::invalid_argument);
}

TEST_CASE("separation passes the selected trip with its IF gain") {
  const auto& r = rig();
  const auto tx = NCOPlan::first_trip(r.cfg);
  const IQSeries t1 = weather(r.cfg, 3.0, 1.0, 31);
  const IQSeries zero(t1.size(), r.cfg.prt);

  const IQSeries out1 = fd_separate(fd_transmit_receive(r.cfg, t1, zero, tx, {}, 0),
                                    NCOPlan::first_trip(r.cfg), r.chain, r.ref);
  CHECK(max_abs_diff(out1, apply_if_alternation(t1, r.cfg, tx)) < 1e-9 * max_abs(t1));

  const IQSeries out2 = fd_separate(fd_transmit_receive(r.cfg, zero, t1, tx, {}, 0),
                                    NCOPlan::second_trip(r.cfg), r.chain, r.ref);
  CHECK(max_abs_diff(out2, apply_if_alternation(t1, r.cfg, NCOPlan::second_trip(r.cfg))) <
        1e-9 * max_abs(t1));
}

TEST_CASE("unselected trip is suppressed by at least 74 dB") {
  const auto& r = rig();
  const auto tx = NCOPlan::first_trip(r.cfg);
  const IQSeries t1 = weather(r.cfg, 3.0, 1.0, 41);
  const IQSeries zero(t1.size(), r.cfg.prt);
  const IQSeries leak = fd_separate(fd_transmit_receive(r.cfg, t1, zero, tx, {}, 0),
                                    NCOPlan::second_trip(r.cfg), r.chain, r.ref);
  CHECK(linear_to_db(mean_power(leak) / mean_power(t1)) <= -74.0);

  const auto transfer = measure_gate_transfer(r.cfg, tx, NCOPlan::second_trip(r.cfg), r.chain, r.ref);
  CHECK(transfer.suppression_db(selected_trips(tx, NCOPlan::second_trip(r.cfg))) <= -74.0);
}

TEST_CASE("separation is linear in the trips") {
  const auto& r = rig();
  const auto tx = NCOPlan::first_trip(r.cfg);
  const auto rx = NCOPlan::second_trip(r.cfg);
  const IQSeries a = weather(r.cfg, 3.0, 1.0, 51);
  const IQSeries b = weather(r.cfg, -5.0, 1.0, 52);
  const IQSeries zero(a.size(), r.cfg.prt);
  const PhaseNoiseSpec pn{0.5};
  const IQSeries ab = fd_separate(fd_transmit_receive(r.cfg, a, b, tx, pn, 53), rx, r.chain, r.ref);
  const IQSeries a0 = fd_separate(fd_transmit_receive(r.cfg, a, zero, tx, pn, 53), rx, r.chain, r.ref);
  const IQSeries b0 = fd_separate(fd_transmit_receive(r.cfg, zero, b, tx, pn, 53), rx, r.chain, r.ref);
  CHECK(max_abs_diff(ab, add(a0, b0)) < 1e-12 * max_abs(ab));

  // Suppression does not depend on the trip power.
  const IQSeries a10 = fd_separate(fd_transmit_receive(r.cfg, scaled(a, 10.0), zero, tx, pn, 53), rx,
                                   r.chain, r.ref);
  CHECK(max_abs_diff(a10, scaled(a0, 10.0)) < 1e-9 * max_abs(a10));
}

TEST_CASE("separation validates its inputs") {
  const auto& r = rig();
  const auto tx = NCOPlan::first_trip(r.cfg);
  const IQSeries t = weather(r.cfg, 3.0, 1.0, 61);
  const auto set = fd_transmit_receive(r.cfg, t, t, tx, {}, 0);
  const NCOPlan bad{{r.cfg.if_freq1, r.cfg.if_freq1}, NcoRole::first_trip};
  CHECK_THROWS_AS(fd_separate(set, bad, r.chain, r.ref), std::invalid_argument);
  const IQSeries wrong_rate = radar_chirp(r.cfg, r.cfg.if_sample_rate);
  CHECK_THROWS_AS(fd_separate(set, NCOPlan::first_trip(r.cfg), r.chain, wrong_rate),
                  std::invalid_argument);
}

TEST_CASE("gate-level model reproduces the IF path") {
  const auto& r = rig();
  const auto tx = NCOPlan::first_trip(r.cfg);
  for (const auto& rx : {NCOPlan::first_trip(r.cfg), NCOPlan::second_trip(r.cfg), NCOPlan::interleaved(r.cfg)}) {
    const auto transfer = measure_gate_transfer(r.cfg, tx, rx, r.chain, r.ref);
    const IQSeries a = weather(r.cfg, 7.0, 2.0, 71);
    const IQSeries b = weather(r.cfg, -12.0, 1.5, 72, 20.0);
    const PhaseNoiseSpec pn{0.5};
    const IQSeries full = fd_separate(fd_transmit_receive(r.cfg, a, b, tx, pn, 73), rx, r.chain, r.ref);
    const IQSeries gate = fd_gate_level(a, b, transfer, pn, 73);
    CHECK(max_abs_diff(full, gate) < 1e-9 * max_abs(full));
  }
}

TEST_CASE("second trip retrieved through the IF path") {
  const auto& r = rig();
  const auto tx = NCOPlan::first_trip(r.cfg);
  const auto rx = NCOPlan::second_trip(r.cfg);
  const int trials = 100;
  double sum = 0.0;
  int retrieved = 0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = derive_seed(1000, static_cast<std::uint64_t>(t));
    const IQSeries a = weather(r.cfg, 10.0, 1.0, derive_seed(seed, 1));
    const IQSeries b = weather(r.cfg, -5.0, 1.0, derive_seed(seed, 2));
    IQSeries y = fd_separate(fd_transmit_receive(r.cfg, a, b, tx, {0.5}, derive_seed(seed, 3)), rx,
                             r.chain, r.ref);
    y = add_white_noise(y, r.cfg.noise_power_db, derive_seed(seed, 4));
    const MomentSet ms = resolve_branch(fd_retrieve_moments(y, r.cfg), -5.0, r.cfg);
    if (!ms.retrieved()) continue;
    ++retrieved;
    sum += ms.velocity;
  }
  REQUIRE(retrieved == trials);
  CHECK(std::abs(sum / trials + 5.0) < 1.0);
}

TEST_CASE("alternating gain puts the sideband exactly M/2 bins away") {
  const auto& cfg = rig().cfg;
  const std::size_t m = static_cast<std::size_t>(cfg.num_pulses);
  const auto tx = NCOPlan::first_trip(cfg);

  const auto line = dft_power(apply_if_alternation(constant(cfg, 1.0), cfg, tx));
  const double peak = *std::max_element(line.begin(), line.end());
  for (std::size_t q = 0; q < m; ++q) {
    if (q == 0 || q == m / 2) {
      CHECK(line[q] > 1e-3 * peak);
    } else {
      CHECK(line[q] < 1e-20 * peak);
    }
  }

  for (std::uint64_t seed = 81; seed < 86; ++seed) {
    const auto p = dft_power(apply_if_alternation(weather(cfg, 5.0, 0.5, seed), cfg, tx));
    const auto main = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    std::size_t side = 0;
    double best = -1.0;
    for (std::size_t q = 0; q < m; ++q) {
      const std::size_t d = std::min((q + m - main) % m, (main + m - q) % m);
      if (d > m / 4 && p[q] > best) {
        best = p[q];
        side = q;
      }
    }
    CHECK((side + m - main) % m == m / 2);
  }
}

TEST_CASE("stationary alternating target retrieves zero velocity") {
  RadarConfig cfg = rig().cfg;
  cfg.noise_power_db = -std::numeric_limits<double>::infinity();
  const auto x = apply_if_alternation(constant(cfg, {0.3, 0.4}), cfg, NCOPlan::first_trip(cfg));
  const MomentSet ms = fd_retrieve_moments(x, cfg);
  REQUIRE(ms.retrieved());
  CHECK(std::abs(ms.velocity) < 1e-9);
}

TEST_CASE("sideband removal recovers velocity and width") {
  const auto& cfg = rig().cfg;
  const auto tx = NCOPlan::first_trip(cfg);
  const double vu = cfg.unambiguous_velocity();
  const int trials = 100;

  SUBCASE("positive velocity needs no branch correction") {
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
      IQSeries x = apply_if_alternation(weather(cfg, 5.0, 1.0, 2000 + t), cfg, tx);
      x = add_white_noise(x, cfg.noise_power_db, 3000 + t);
      const MomentSet ms = fd_retrieve_moments(x, cfg);
      REQUIRE(ms.retrieved());
      CHECK(ms.has(MomentFlag::sideband_branch_unverified));
      sum += ms.velocity;
    }
    CHECK(std::abs(sum / trials - 5.0) < 0.5);
  }

  SUBCASE("narrow width") {
    const double w = vu / 10.0;
    double vsum = 0.0;
    double wsum = 0.0;
    for (int t = 0; t < trials; ++t) {
      IQSeries x = apply_if_alternation(weather(cfg, 8.0, w, 4000 + t), cfg, tx);
      x = add_white_noise(x, cfg.noise_power_db, 5000 + t);
      const MomentSet ms = fd_retrieve_moments(x, cfg);
      REQUIRE(ms.retrieved());
      vsum += ms.velocity;
      wsum += ms.width;
    }
    CHECK(std::abs(vsum / trials - 8.0) < 0.5);
    CHECK(std::abs(wsum / trials - w) < 0.2 * w);
  }
}

TEST_CASE("explicit crude velocity equal to the half-spectrum estimate changes nothing") {
  const auto& cfg = rig().cfg;
  IQSeries x = apply_if_alternation(weather(cfg, 5.0, 1.0, 91), cfg, NCOPlan::first_trip(cfg));
  x = add_white_noise(x, cfg.noise_power_db, 92);
  const MomentSet a = fd_retrieve_moments(x, cfg);
  const MomentSet b = fd_retrieve_moments(x, cfg, kFdSnrGateDb, half_spectrum_velocity(x, cfg));
  CHECK(std::abs(a.velocity - b.velocity) < 1e-9);
  CHECK(std::abs(a.width - b.width) < 1e-9);
  CHECK(std::abs(a.power_db - b.power_db) < 1e-9);
  CHECK(a.has(MomentFlag::sideband_branch_unverified));
  CHECK_FALSE(b.has(MomentFlag::sideband_branch_unverified));
}

TEST_CASE("noise-only series is not retrieved") {
  const auto& cfg = rig().cfg;
  const IQSeries x = add_white_noise(IQSeries(static_cast<std::size_t>(cfg.num_pulses), cfg.prt),
                                     cfg.noise_power_db, 93);
  const MomentSet ms = fd_retrieve_moments(x, cfg);
  CHECK(ms.has(MomentFlag::low_snr));
  CHECK(ms.has(MomentFlag::no_retrieval));
  CHECK_FALSE(ms.retrieved());
  CHECK(std::isnan(ms.velocity));
  CHECK_THROWS_AS(fd_retrieve_moments(IQSeries(16, cfg.prt), cfg), std::invalid_argument);
}

TEST_CASE("branch resolution picks the candidate nearest the reference") {
  const auto& cfg = rig().cfg;
  const double vu = cfg.unambiguous_velocity();
  MomentSet ms;
  ms.velocity = 25.0;
  ms.width = 1.0;
  ms.power_db = 0.0;
  ms.set(MomentFlag::sideband_branch_unverified);
  const MomentSet a = resolve_branch(ms, -4.0, cfg);
  CHECK(a.velocity == doctest::Approx(25.0 - vu));
  CHECK_FALSE(a.has(MomentFlag::sideband_branch_unverified));
  CHECK(resolve_branch(ms, 20.0, cfg).velocity == doctest::Approx(25.0));
}

namespace {

GateField make_field(const RadarConfig& cfg, int gates, int rays, double v0, double shear, double width,
                     std::uint64_t seed) {
  GateField f(gates, rays);
  const auto tx = NCOPlan::first_trip(cfg);
  for (int r = 0; r < rays; ++r) {
    for (int g = 0; g < gates; ++g) {
      const std::uint64_t s = derive_seed(seed, f.index(g, r));
      IQSeries x = apply_if_alternation(weather(cfg, v0 + shear * g, width, derive_seed(s, 1)), cfg, tx);
      f.at(g, r) = add_white_noise(x, cfg.noise_power_db, derive_seed(s, 2));
    }
  }
  return f;
}

}  // namespace

TEST_CASE("propagation over a uniform field") {
  const auto& cfg = rig().cfg;
  const GateField field = make_field(cfg, 8, 4, 5.0, 0.0, 1.0, 101);
  const MomentField mf = fd_propagate(field, cfg, 0, 0);
  CHECK(mf.branch_unverified);
  for (const auto& c : mf.cells) {
    REQUIRE(c.retrieved());
    CHECK(std::abs(c.velocity - 5.0) < 1.0);
    CHECK(c.has(MomentFlag::sideband_branch_unverified));
  }
}

TEST_CASE("propagation follows a shear from an external seed") {
  const auto& cfg = rig().cfg;
  const GateField field = make_field(cfg, 24, 3, -8.0, 0.2, 0.5, 111);
  PropagationOptions opt;
  opt.start_crude = -8.0;
  const MomentField mf = fd_propagate(field, cfg, 0, 1, opt);
  CHECK_FALSE(mf.branch_unverified);
  for (int r = 0; r < 3; ++r) {
    for (int g = 0; g < 24; ++g) {
      const MomentSet& c = mf.at(g, r);
      REQUIRE(c.retrieved());
      CHECK(std::abs(c.velocity - (-8.0 + 0.2 * g)) < 1.0);
      CHECK_FALSE(c.has(MomentFlag::sideband_branch_unverified));
    }
  }
}

TEST_CASE("a half-spectrum seed on the sideband offsets the field by v_unb") {
  const auto& cfg = rig().cfg;
  const double vu = cfg.unambiguous_velocity();
  const GateField field = make_field(cfg, 10, 3, -8.0, 0.2, 0.5, 121);
  MomentField mf = fd_propagate(field, cfg, 0, 0);
  CHECK(mf.branch_unverified);
  for (int r = 0; r < 3; ++r) {
    for (int g = 0; g < 10; ++g) {
      const double truth = -8.0 + 0.2 * g;
      const MomentSet& c = mf.at(g, r);
      REQUIRE(c.retrieved());
      CHECK(c.has(MomentFlag::sideband_branch_unverified));
      CHECK(std::abs(wrap_symmetric(c.velocity - (truth + vu), vu)) < 1.0);
    }
  }
  flip_branch(mf, cfg);
  for (int g = 0; g < 10; ++g) CHECK(std::abs(mf.at(g, 0).velocity - (-8.0 + 0.2 * g)) < 1.0);
}

TEST_CASE("low-SNR cells are flagged and do not seed neighbours") {
  const auto& cfg = rig().cfg;
  GateField field = make_field(cfg, 3, 1, 5.0, 0.0, 1.0, 131);
  field.at(1, 0) = add_white_noise(IQSeries(static_cast<std::size_t>(cfg.num_pulses), cfg.prt),
                                   cfg.noise_power_db, 132);
  const MomentField mf = fd_propagate(field, cfg, 0, 0);
  CHECK(mf.at(0, 0).retrieved());
  CHECK(mf.at(1, 0).has(MomentFlag::low_snr));
  CHECK(mf.at(2, 0).has(MomentFlag::no_retrieval));
}

TEST_CASE("propagation refuses an unretrievable start cell") {
  const auto& cfg = rig().cfg;
  GateField field = make_field(cfg, 3, 1, 5.0, 0.0, 1.0, 141);
  field.at(0, 0) = add_white_noise(IQSeries(static_cast<std::size_t>(cfg.num_pulses), cfg.prt),
                                   cfg.noise_power_db, 142);
  CHECK_THROWS_AS(fd_propagate(field, cfg, 0, 0), RetrievalError);
  CHECK_THROWS_AS(fd_propagate(field, cfg, 5, 0), std::invalid_argument);
}
