#include "tripsep/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "tripsep/rng.hpp"
#include "tripsep/sz_coding.hpp"

namespace tripsep::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Asymptotic standard error of the sample median relative to the mean for
// Gaussian data: sqrt(pi / 2).
constexpr double kMedianEfficiency = 1.2533141373155003;

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double round6(double v) { return std::isfinite(v) ? std::strtod(fmt6(v).c_str(), nullptr) : v; }

const char* kCsvHeader = "scheme,ratio_db,jitter_deg,trials,bias_mps,std_mps,retrieval_rate,ci95_mps";

}  // namespace

bool SweepPoint::recovered() const {
  return std::isfinite(bias_mps) && std::isfinite(std_mps) && std::abs(bias_mps) < kRecoveryBiasMps &&
         std_mps < kRecoveryStdMps;
}

bool SweepPoint::operator==(const SweepPoint& o) const {
  auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
  return same(ratio_db, o.ratio_db) && same(jitter_deg, o.jitter_deg) && trials == o.trials &&
         same(bias_mps, o.bias_mps) && same(std_mps, o.std_mps) &&
         same(retrieval_rate, o.retrieval_rate) && same(ci95_mps, o.ci95_mps);
}

std::uint64_t trial_seed(std::uint64_t seed0, std::size_t ratio_index, std::size_t jitter_index,
                         std::size_t trial_index) {
  const std::uint64_t h =
      mix64(mix64(mix64(ratio_index) ^ (jitter_index + 0x51ed2701u)) ^ (trial_index + 0x2545f491u));
  return seed0 ^ h;
}

TrialRunner::TrialRunner(const SweepConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.scheme == Scheme::sz) {
    code_ = gen_sz(cfg_.sz.n, cfg_.radar.num_pulses);
  } else {
    const double fs = cfg_.radar.if_sample_rate;
    chain_ = design_lowpass(cfg_.ddc.mask, fs, cfg_.ddc.design);
    ref_chirp_ = radar_chirp(cfg_.radar, fs / chain_.total_decimation());
    transfer_ = measure_gate_transfer(cfg_.radar, NCOPlan::first_trip(cfg_.radar),
                                      NCOPlan::second_trip(cfg_.radar), chain_, ref_chirp_);
  }
}

TrialOutcome TrialRunner::run(double ratio_db, double jitter_deg, std::uint64_t seed) const {
  const RadarConfig& radar = cfg_.radar;
  const IQSeries s1 = simulate_trip(radar, cfg_.trip1, derive_seed(seed, 1)).h;
  const IQSeries s2 = simulate_trip(radar, cfg_.trip2, derive_seed(seed, 2)).h;
  const IQSeries strong = scaled(s1, ratio_gain(s1, s2, ratio_db));
  const PhaseNoiseSpec pn{jitter_deg, PhaseNoiseModel::independent_per_pulse};
  const std::uint64_t pn_seed = derive_seed(seed, 3);
  const std::uint64_t noise_seed = derive_seed(seed, 4);
  const double truth = cfg_.trip2.base.velocity;

  MomentSet ms;
  if (cfg_.scheme == Scheme::sz) {
    const IQSeries a = apply_phase_noise(strong, pn, 0, pn_seed);
    const IQSeries b = apply_phase_noise(s2, pn, -1, pn_seed);
    IQSeries x = encode(a, b, *code_, ratio_db);
    x = add_white_noise(x, radar.noise_power_db, noise_seed);
    const IQSeries c = cohere(x, *code_, 1);
    SZRetrievalOptions opts;
    opts.notch_width = cfg_.sz.notch_width;
    opts.window = cfg_.sz.window;
    opts.noise_power_db = radar.noise_power_db;
    ms = retrieve_weak_trip(c, *code_, estimate_strong_velocity(c, radar), radar, opts);
  } else {
    IQSeries y;
    if (cfg_.fd.path == FdPath::gate_level) {
      y = fd_gate_level(strong, s2, transfer_, pn, pn_seed);
    } else {
      y = fd_separate(fd_transmit_receive(radar, strong, s2, NCOPlan::first_trip(radar), pn, pn_seed),
                      NCOPlan::second_trip(radar), chain_, ref_chirp_);
    }
    y = add_white_noise(y, radar.noise_power_db, noise_seed);
    ms = fd_retrieve_moments(y, radar, cfg_.fd.snr_gate_db);
    if (cfg_.fd.branch_reference == BranchReference::truth) ms = resolve_branch(ms, truth, radar);
  }

  TrialOutcome out;
  out.retrieved = ms.retrieved() && std::isfinite(ms.velocity);
  if (out.retrieved) {
    out.error_mps = wrap_symmetric(ms.velocity - truth, radar.unambiguous_velocity());
  }
  return out;
}

SweepPoint aggregate(double ratio_db, double jitter_deg, const std::vector<TrialOutcome>& outcomes) {
  SweepPoint p;
  p.ratio_db = ratio_db;
  p.jitter_deg = jitter_deg;
  p.trials = static_cast<int>(outcomes.size());
  std::vector<double> err;
  for (const auto& o : outcomes) {
    if (o.retrieved) err.push_back(o.error_mps);
  }
  p.retrieval_rate = outcomes.empty() ? 0.0 : static_cast<double>(err.size()) / outcomes.size();
  if (err.empty()) {
    p.bias_mps = p.std_mps = p.ci95_mps = kNaN;
    return p;
  }
  const std::size_t n = err.size();
  double mean = 0.0;
  for (double e : err) mean += e;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double e : err) ss += (e - mean) * (e - mean);
  p.std_mps = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  std::sort(err.begin(), err.end());
  p.bias_mps = n % 2 ? err[n / 2] : 0.5 * (err[n / 2 - 1] + err[n / 2]);
  p.ci95_mps = 1.96 * kMedianEfficiency * p.std_mps / std::sqrt(static_cast<double>(n));
  return p;
}

SweepResult run_sweep(const SweepConfig& cfg, int parallel) {
  const TrialRunner runner(cfg);
  const std::size_t nr = cfg.ratio_grid.size();
  const std::size_t nj = cfg.jitter_list.size();
  const std::size_t nt = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = nr * nj * nt;

  std::vector<TrialOutcome> outcomes(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t t = job % nt;
      const std::size_t r = (job / nt) % nr;
      const std::size_t j = job / (nt * nr);
      try {
        outcomes[job] = runner.run(cfg.ratio_grid[r], cfg.jitter_list[j], trial_seed(cfg.seed0, r, j, t));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  unsigned threads = parallel > 0 ? static_cast<unsigned>(parallel) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  result.scheme = cfg.scheme;
  for (std::size_t j = 0; j < nj; ++j) {
    for (std::size_t r = 0; r < nr; ++r) {
      const auto first = outcomes.begin() + static_cast<long>((j * nr + r) * nt);
      result.points.push_back(aggregate(cfg.ratio_grid[r], cfg.jitter_list[j],
                                        std::vector<TrialOutcome>(first, first + static_cast<long>(nt))));
    }
  }
  return result;
}

double recovery_boundary(const SweepResult& result, double jitter_deg) {
  std::vector<SweepPoint> pts;
  for (const auto& p : result.points) {
    if (std::abs(p.jitter_deg - jitter_deg) < 1e-12) pts.push_back(p);
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const SweepPoint& a, const SweepPoint& b) { return a.ratio_db < b.ratio_db; });
  double boundary = kNaN;
  for (const auto& p : pts) {
    if (!p.recovered()) break;
    boundary = p.ratio_db;
  }
  return boundary;
}

void write_csv(std::ostream& os, const SweepResult& result) {
  os << kCsvHeader << "\n";
  for (const auto& p : result.points) {
    os << scheme_name(result.scheme) << ',' << fmt6(p.ratio_db) << ',' << fmt6(p.jitter_deg) << ','
       << p.trials << ',' << fmt6(p.bias_mps) << ',' << fmt6(p.std_mps) << ','
       << fmt6(p.retrieval_rate) << ',' << fmt6(p.ci95_mps) << "\n";
  }
}

SweepResult read_csv(std::istream& is) {
  SweepResult r;
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw std::runtime_error("sweep CSV: unexpected header");
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 8) throw std::runtime_error("sweep CSV line " + std::to_string(line_no) + ": expected 8 fields");
    try {
      r.scheme = parse_scheme(f[0]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("sweep CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    SweepPoint p;
    p.ratio_db = std::strtod(f[1].c_str(), nullptr);
    p.jitter_deg = std::strtod(f[2].c_str(), nullptr);
    p.trials = std::atoi(f[3].c_str());
    p.bias_mps = std::strtod(f[4].c_str(), nullptr);
    p.std_mps = std::strtod(f[5].c_str(), nullptr);
    p.retrieval_rate = std::strtod(f[6].c_str(), nullptr);
    p.ci95_mps = std::strtod(f[7].c_str(), nullptr);
    r.points.push_back(p);
  }
  return r;
}

void write_json(std::ostream& os, const SweepResult& result) {
  using nlohmann::ordered_json;
  auto num = [](double v) -> ordered_json { return std::isfinite(v) ? ordered_json(round6(v)) : ordered_json(nullptr); };
  ordered_json j;
  j["scheme"] = scheme_name(result.scheme);
  j["points"] = ordered_json::array();
  for (const auto& p : result.points) {
    ordered_json e;
    e["ratio_db"] = num(p.ratio_db);
    e["jitter_deg"] = num(p.jitter_deg);
    e["trials"] = p.trials;
    e["bias_mps"] = num(p.bias_mps);
    e["std_mps"] = num(p.std_mps);
    e["retrieval_rate"] = num(p.retrieval_rate);
    e["ci95_mps"] = num(p.ci95_mps);
    j["points"].push_back(e);
  }
  os << j.dump(2) << "\n";
}

SweepResult read_json(std::istream& is) {
  const auto j = nlohmann::json::parse(is);
  auto num = [](const nlohmann::json& v) { return v.is_null() ? kNaN : v.get<double>(); };
  SweepResult r;
  r.scheme = parse_scheme(j.at("scheme").get<std::string>());
  for (const auto& e : j.at("points")) {
    SweepPoint p;
    p.ratio_db = num(e.at("ratio_db"));
    p.jitter_deg = num(e.at("jitter_deg"));
    p.trials = e.at("trials").get<int>();
    p.bias_mps = num(e.at("bias_mps"));
    p.std_mps = num(e.at("std_mps"));
    p.retrieval_rate = num(e.at("retrieval_rate"));
    p.ci95_mps = num(e.at("ci95_mps"));
    r.points.push_back(p);
  }
  return r;
}

void emit_results(const SweepResult& result, const std::string& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": " + std::strerror(errno));
  if (format == OutputFormat::csv) {
    write_csv(out, result);
  } else {
    write_json(out, result);
  }
  out.flush();
  if (!out) throw std::runtime_error(path + ": " + std::strerror(errno));
}

}  // namespace tripsep::harness
