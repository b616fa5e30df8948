#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "tripsep/harness/config.hpp"
#include "tripsep/harness/sweep.hpp"

using namespace tripsep;
using namespace tripsep::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "test.cfg");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

SweepConfig small_sweep(Scheme scheme) {
  SweepConfig c;
  c.scheme = scheme;
  c.ratio_grid = {0.0, 20.0, 40.0};
  c.jitter_list = {0.0, 0.5};
  c.trials = 12;
  c.seed0 = 99;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tripsep_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + TRIPSEP_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parses sections, comments and ranges") {
  const auto c = parse(
      "# comment\n"
      "[sweep]\n"
      "scheme = freq_diversity\n"
      "ratios_db = 0:10:30   # inline comment\n"
      "jitter_deg = 0, 0.5\n"
      "trials = 25\n"
      "seed = 12345\n"
      "[radar]\n"
      "num_pulses = 128\n"
      "[trip2]\n"
      "velocity = -7.5\n"
      "[fd]\n"
      "path = full\n"
      "branch_reference = none\n");
  CHECK(c.sweep.scheme == Scheme::freq_diversity);
  CHECK(c.sweep.ratio_grid == std::vector<double>{0, 10, 20, 30});
  CHECK(c.sweep.jitter_list == std::vector<double>{0, 0.5});
  CHECK(c.sweep.trials == 25);
  CHECK(c.sweep.seed0 == 12345u);
  CHECK(c.sweep.radar.num_pulses == 128);
  CHECK(c.sweep.trip2.base.velocity == -7.5);
  CHECK(c.sweep.fd.path == FdPath::full_if);
  CHECK(c.sweep.fd.branch_reference == BranchReference::none);
}

TEST_CASE("config errors name the line and key") {
  CHECK(parse_error("[sweep]\nbogus = 1\n").find("test.cfg:2: sweep.bogus") != std::string::npos);
  CHECK(parse_error("[nowhere]\n").find("test.cfg:1") != std::string::npos);
  CHECK(parse_error("[radar]\nprt = fast\n").find("test.cfg:2: radar.prt") != std::string::npos);
  CHECK(parse_error("[sweep]\ntrials = 3\ntrials = 4\n").find("test.cfg:3: sweep.trials") !=
        std::string::npos);
  CHECK(parse_error("[radar]\nnum_pulses = 63\n").find("test.cfg:2: radar.num_pulses") !=
        std::string::npos);
  CHECK(parse_error("[trip2]\nvelocity = 45\n").find("test.cfg:2: trip2.velocity") != std::string::npos);
  CHECK(parse_error("[sz]\nn = 3\n").find("sz.n") != std::string::npos);
  CHECK(parse_error("velocity = 3\n").find("test.cfg:1") != std::string::npos);
  CHECK(parse_error("[fd]\npath = sideways\n").find("fd.path") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/tripsep.cfg"), ConfigError);
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("0:5:20") == std::vector<double>{0, 5, 10, 15, 20});
  CHECK(parse_number_list("1, 2.5, -3") == std::vector<double>{1, 2.5, -3});
  CHECK(parse_number_list("").empty());
  CHECK(parse_number_list("0:0.1:0.3").size() == 4);
  CHECK_THROWS(parse_number_list("0:0:5"));
  CHECK_THROWS(parse_number_list("5:1:0"));
  CHECK_THROWS(parse_number_list("1, x"));
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"scenario.cfg", "sz_sweep.cfg", "fd_sweep.cfg", "ddc.cfg", "field.cfg"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::string(TRIPSEP_SOURCE_DIR) + "/configs/" + name));
  }
}

TEST_CASE("trial seeds are distinct across grid coordinates") {
  CHECK(trial_seed(1, 0, 0, 0) != trial_seed(1, 1, 0, 0));
  CHECK(trial_seed(1, 0, 0, 0) != trial_seed(1, 0, 1, 0));
  CHECK(trial_seed(1, 0, 0, 0) != trial_seed(1, 0, 0, 1));
  CHECK(trial_seed(1, 1, 0, 0) != trial_seed(1, 0, 1, 0));
  CHECK(trial_seed(1, 2, 3, 4) == trial_seed(1, 2, 3, 4));
}

TEST_CASE("aggregate statistics") {
  std::vector<TrialOutcome> t = {{true, 1.0}, {true, -1.0}, {true, 3.0}, {false, 0.0}};
  const SweepPoint p = aggregate(10.0, 0.5, t);
  CHECK(p.trials == 4);
  CHECK(p.retrieval_rate == doctest::Approx(0.75));
  CHECK(p.bias_mps == doctest::Approx(1.0));
  CHECK(p.std_mps == doctest::Approx(2.0));
  CHECK(p.ci95_mps == doctest::Approx(1.96 * std::sqrt(kPi / 2.0) * 2.0 / std::sqrt(3.0)));
  CHECK(p.recovered());

  const SweepPoint none = aggregate(0.0, 0.0, {{false, 0.0}});
  CHECK(std::isnan(none.bias_mps));
  CHECK_FALSE(none.recovered());
}

TEST_CASE("recovery boundary is the last contiguous recovered ratio") {
  SweepResult r;
  auto pt = [](double ratio, double bias) {
    SweepPoint p;
    p.ratio_db = ratio;
    p.bias_mps = bias;
    p.std_mps = 1.0;
    p.trials = 1;
    return p;
  };
  r.points = {pt(0, 0.1), pt(10, 0.2), pt(20, 5.0), pt(30, 0.1)};
  CHECK(recovery_boundary(r, 0.0) == 10.0);
  r.points.front().bias_mps = 3.0;
  CHECK(std::isnan(recovery_boundary(r, 0.0)));
}

TEST_CASE("sweeps are deterministic and independent of thread count") {
  for (Scheme s : {Scheme::sz, Scheme::freq_diversity}) {
    CAPTURE(scheme_name(s));
    const auto cfg = small_sweep(s);
    const auto a = run_sweep(cfg, 1);
    const auto b = run_sweep(cfg, 1);
    const auto c = run_sweep(cfg, 4);
    CHECK(a == b);
    CHECK(a == c);
    REQUIRE(a.points.size() == 6);
    CHECK(a.points[0].jitter_deg == 0.0);
    CHECK(a.points[3].jitter_deg == 0.5);
    CHECK(a.points[1].ratio_db == 20.0);
  }
}

TEST_CASE("full IF path agrees with the gate-level sweep") {
  auto cfg = small_sweep(Scheme::freq_diversity);
  cfg.trials = 4;
  cfg.jitter_list = {0.5};
  const auto gate = run_sweep(cfg, 2);
  cfg.fd.path = FdPath::full_if;
  const auto full = run_sweep(cfg, 2);
  REQUIRE(gate.points.size() == full.points.size());
  for (std::size_t i = 0; i < gate.points.size(); ++i) {
    CHECK(full.points[i].bias_mps == doctest::Approx(gate.points[i].bias_mps).epsilon(1e-6));
    CHECK(full.points[i].std_mps == doctest::Approx(gate.points[i].std_mps).epsilon(1e-6));
  }
}

TEST_CASE("csv and json round trip") {
  const auto r = run_sweep(small_sweep(Scheme::sz), 2);
  std::ostringstream csv;
  write_csv(csv, r);
  std::istringstream csv_in(csv.str());
  const auto back_csv = read_csv(csv_in);
  std::ostringstream csv2;
  write_csv(csv2, back_csv);
  CHECK(csv.str() == csv2.str());
  CHECK(back_csv.points.size() == r.points.size());

  std::ostringstream js;
  write_json(js, r);
  std::istringstream js_in(js.str());
  const auto back_js = read_json(js_in);
  std::ostringstream js2;
  write_json(js2, back_js);
  CHECK(js.str() == js2.str());
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    CHECK(back_js.points[i].bias_mps == doctest::Approx(r.points[i].bias_mps).epsilon(1e-5));
  }
}

TEST_CASE("empty grid gives header-only output") {
  auto cfg = small_sweep(Scheme::sz);
  cfg.ratio_grid.clear();
  const auto r = run_sweep(cfg, 1);
  CHECK(r.points.empty());
  std::ostringstream os;
  write_csv(os, r);
  CHECK(os.str() == "scheme,ratio_db,jitter_deg,trials,bias_mps,std_mps,retrieval_rate,ci95_mps\n");
  std::ostringstream js;
  write_json(js, r);
  std::istringstream in(js.str());
  CHECK(read_json(in).points.empty());
}

TEST_CASE("unwritable output reports the OS error") {
  SweepResult r;
  CHECK_THROWS_WITH_AS(emit_results(r, "/nonexistent/dir/out.csv", OutputFormat::csv),
                       doctest::Contains("/nonexistent/dir/out.csv"), std::runtime_error);
}

TEST_CASE("golden sweep output") {
  const std::string cfg_path = std::string(TRIPSEP_SOURCE_DIR) + "/tests/golden/golden.cfg";
  const std::string golden = slurp(std::string(TRIPSEP_SOURCE_DIR) + "/tests/golden/sweep.csv");
  REQUIRE_FALSE(golden.empty());
  std::ostringstream os;
  write_csv(os, run_sweep(load_config(cfg_path).sweep, 2));
  CHECK(os.str() == golden);
}

TEST_CASE("cli output is byte-identical across runs") {
  const fs::path a = scratch("cli_a");
  const fs::path b = scratch("cli_b");
  const std::string cfg = std::string(TRIPSEP_SOURCE_DIR) + "/tests/golden/golden.cfg";
  REQUIRE(run_cli("sweep --config \"" + cfg + "\" --out \"" + a.string() + "\" --parallel 1") == 0);
  REQUIRE(run_cli("sweep --config \"" + cfg + "\" --out \"" + b.string() + "\" --parallel 3") == 0);
  const std::string sa = slurp(a / "sweep.csv");
  CHECK_FALSE(sa.empty());
  CHECK(sa == slurp(b / "sweep.csv"));
  CHECK(sa == slurp(std::string(TRIPSEP_SOURCE_DIR) + "/tests/golden/sweep.csv"));
}

TEST_CASE("cli rejects bad usage with exit code 2") {
  const fs::path dir = scratch("cli_bad");
  CHECK(run_cli("sweep --no-such-flag") == 2);
  CHECK(run_cli("sweep --format xml") == 2);
  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "[sweep]\ntrials = zero\n";
  CHECK(run_cli("sweep --config \"" + bad.string() + "\" --out \"" + dir.string() + "\"") == 2);
  CHECK(run_cli("sweep --config \"" + (dir / "missing.cfg").string() + "\"") == 2);
}
