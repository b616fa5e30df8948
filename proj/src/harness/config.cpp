#include "tripsep/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <sstream>

namespace tripsep::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_double(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + trim(text) + "'");
  }
  if (used != t.size() || std::isnan(v)) {
    throw std::invalid_argument("expected a number, got '" + trim(text) + "'");
  }
  return v;
}

long long parse_integer(const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw std::invalid_argument("expected an integer, got '" + t + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw std::invalid_argument("expected an unsigned integer, got '" + t + "'");
  }
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + trim(text) + "'");
}

int parse_int(const std::string& text) {
  const long long v = parse_integer(text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("integer out of range");
  }
  return static_cast<int>(v);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using KeyTable = std::map<std::string, Setter>;

template <typename Get>
Setter number(Get get) {
  return [get](ExperimentConfig& c, const std::string& v) { get(c) = parse_double(v); };
}

template <typename Get>
Setter integer(Get get) {
  return [get](ExperimentConfig& c, const std::string& v) { get(c) = parse_int(v); };
}

void add_trip_keys(KeyTable& t, const std::string& section, DualPolTripSpec SweepConfig::*trip) {
  t[section + ".velocity"] = number([trip](ExperimentConfig& c) -> double& { return (c.sweep.*trip).base.velocity; });
  t[section + ".width"] = number([trip](ExperimentConfig& c) -> double& { return (c.sweep.*trip).base.width; });
  t[section + ".rho_hv"] = number([trip](ExperimentConfig& c) -> double& { return (c.sweep.*trip).rho_hv; });
  t[section + ".zdr_db"] = number([trip](ExperimentConfig& c) -> double& { return (c.sweep.*trip).zdr_db; });
}

const KeyTable& key_table() {
  static const KeyTable table = [] {
    KeyTable t;
    t["sweep.scheme"] = [](ExperimentConfig& c, const std::string& v) { c.sweep.scheme = parse_scheme(trim(v)); };
    t["sweep.ratios_db"] = [](ExperimentConfig& c, const std::string& v) { c.sweep.ratio_grid = parse_number_list(v); };
    t["sweep.jitter_deg"] = [](ExperimentConfig& c, const std::string& v) { c.sweep.jitter_list = parse_number_list(v); };
    t["sweep.trials"] = integer([](ExperimentConfig& c) -> int& { return c.sweep.trials; });
    t["sweep.seed"] = [](ExperimentConfig& c, const std::string& v) { c.sweep.seed0 = parse_u64(v); };

    t["radar.wavelength"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.wavelength; });
    t["radar.prt"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.prt; });
    t["radar.num_pulses"] = integer([](ExperimentConfig& c) -> int& { return c.sweep.radar.num_pulses; });
    t["radar.if_freq1"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.if_freq1; });
    t["radar.if_freq2"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.if_freq2; });
    t["radar.if_sample_rate"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.if_sample_rate; });
    t["radar.chirp_bandwidth"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.chirp_bandwidth; });
    t["radar.pulse_width"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.pulse_width; });
    t["radar.pulse_taper"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.pulse_taper; });
    t["radar.noise_power_db"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.noise_power_db; });
    t["radar.if2_gain_db"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.if2_gain_db; });
    t["radar.if2_phase_deg"] = number([](ExperimentConfig& c) -> double& { return c.sweep.radar.if2_phase_deg; });

    add_trip_keys(t, "trip1", &SweepConfig::trip1);
    add_trip_keys(t, "trip2", &SweepConfig::trip2);

    t["sz.n"] = integer([](ExperimentConfig& c) -> int& { return c.sweep.sz.n; });
    t["sz.notch_width"] = number([](ExperimentConfig& c) -> double& { return c.sweep.sz.notch_width; });
    t["sz.window"] = [](ExperimentConfig& c, const std::string& v) {
      const auto w = lower(trim(v));
      if (w == "hann") c.sweep.sz.window = Window::hann;
      else if (w == "rect") c.sweep.sz.window = Window::rect;
      else throw std::invalid_argument("expected hann or rect, got '" + trim(v) + "'");
    };

    t["fd.snr_gate_db"] = number([](ExperimentConfig& c) -> double& { return c.sweep.fd.snr_gate_db; });
    t["fd.path"] = [](ExperimentConfig& c, const std::string& v) {
      const auto p = lower(trim(v));
      if (p == "gate") c.sweep.fd.path = FdPath::gate_level;
      else if (p == "full") c.sweep.fd.path = FdPath::full_if;
      else throw std::invalid_argument("expected gate or full, got '" + trim(v) + "'");
    };
    t["fd.branch_reference"] = [](ExperimentConfig& c, const std::string& v) {
      const auto p = lower(trim(v));
      if (p == "truth") c.sweep.fd.branch_reference = BranchReference::truth;
      else if (p == "none") c.sweep.fd.branch_reference = BranchReference::none;
      else throw std::invalid_argument("expected truth or none, got '" + trim(v) + "'");
    };

    t["ddc.passband_edge"] = number([](ExperimentConfig& c) -> double& { return c.sweep.ddc.mask.passband_edge; });
    t["ddc.stopband_edge"] = number([](ExperimentConfig& c) -> double& { return c.sweep.ddc.mask.stopband_edge; });
    t["ddc.passband_ripple_db"] = number([](ExperimentConfig& c) -> double& { return c.sweep.ddc.mask.passband_ripple_db; });
    t["ddc.stopband_atten_db"] = number([](ExperimentConfig& c) -> double& { return c.sweep.ddc.mask.stopband_atten_db; });
    t["ddc.output_rate"] = number([](ExperimentConfig& c) -> double& { return c.sweep.ddc.design.output_rate; });
    t["ddc.max_taps"] = integer([](ExperimentConfig& c) -> int& { return c.sweep.ddc.design.max_taps; });
    t["ddc.grid_points"] = integer([](ExperimentConfig& c) -> int& { return c.sweep.ddc.design.grid_points; });

    t["field.gates"] = integer([](ExperimentConfig& c) -> int& { return c.field.gates; });
    t["field.rays"] = integer([](ExperimentConfig& c) -> int& { return c.field.rays; });
    t["field.velocity"] = number([](ExperimentConfig& c) -> double& { return c.field.velocity; });
    t["field.shear"] = number([](ExperimentConfig& c) -> double& { return c.field.shear; });
    t["field.width"] = number([](ExperimentConfig& c) -> double& { return c.field.width; });
    t["field.snr_db"] = number([](ExperimentConfig& c) -> double& { return c.field.snr_db; });
    t["field.start_gate"] = integer([](ExperimentConfig& c) -> int& { return c.field.start_gate; });
    t["field.start_ray"] = integer([](ExperimentConfig& c) -> int& { return c.field.start_ray; });
    t["field.reference_velocity"] = number([](ExperimentConfig& c) -> double& { return c.field.reference_velocity; });
    t["field.use_reference"] = [](ExperimentConfig& c, const std::string& v) { c.field.use_reference = parse_bool(v); };
    return t;
  }();
  return table;
}

bool known_section(const std::string& s) {
  static const char* names[] = {"sweep", "radar", "trip1", "trip2", "sz", "fd", "ddc", "field"};
  return std::any_of(std::begin(names), std::end(names), [&](const char* n) { return s == n; });
}

}  // namespace

const char* scheme_name(Scheme s) { return s == Scheme::sz ? "sz" : "freq_diversity"; }

Scheme parse_scheme(const std::string& text) {
  if (text == "sz") return Scheme::sz;
  if (text == "freq_diversity") return Scheme::freq_diversity;
  throw std::invalid_argument("expected sz or freq_diversity, got '" + text + "'");
}

std::vector<double> parse_number_list(const std::string& text) {
  const std::string t = trim(text);
  std::vector<double> out;
  if (t.empty()) return out;
  if (t.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_double(item));
    if (parts.size() != 3) throw std::invalid_argument("range must be start:step:stop");
    const double start = parts[0], step = parts[1], stop = parts[2];
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("range needs step > 0 and stop >= start");
    const long n = std::lround(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  return out;
}

SweepConfig::SweepConfig() {
  ratio_grid = parse_number_list("0:5:70");
  jitter_list = {0.0};
  trip1.base = {0.0, 10.0, 1.0, 1};
  trip2.base = {0.0, -5.0, 1.0, 2};
}

void SweepConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (trials < 1) fail("sweep.trials must be >= 1");
  if (!std::is_sorted(ratio_grid.begin(), ratio_grid.end())) fail("sweep.ratios_db must be ascending");
  for (double j : jitter_list) {
    if (j < 0.0) fail("sweep.jitter_deg entries must be >= 0");
  }
  radar.validate();
  auto trip_check = [this](const DualPolTripSpec& t, const std::string& name) {
    try {
      t.validate(radar);
    } catch (const std::invalid_argument& e) {
      std::string m = e.what();
      if (m.rfind("trip.", 0) == 0) m = name + m.substr(4);
      throw std::invalid_argument(m);
    }
  };
  trip_check(trip1, "trip1");
  trip_check(trip2, "trip2");
  if (sz.n < 1 || radar.num_pulses % sz.n != 0) fail("sz.n must divide radar.num_pulses");
  if (!(sz.notch_width > 0.0) || sz.notch_width > 1.0 - 2.0 / sz.n + 1e-12) {
    fail("sz.notch_width must lie in (0, 1 - 2/n]");
  }
  if (radar.num_pulses < 32 && scheme == Scheme::freq_diversity) {
    fail("radar.num_pulses must be >= 32 for freq_diversity");
  }
  try {
    ddc.mask.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("ddc: ") + e.what());
  }
  if (!(ddc.design.output_rate > 0.0)) fail("ddc.output_rate must be > 0");
  if (ddc.design.max_taps < 3) fail("ddc.max_taps must be >= 3");
  if (ddc.design.grid_points < 16) fail("ddc.grid_points must be >= 16");
}

void FieldConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (gates < 1 || rays < 1) fail("field.gates and field.rays must be >= 1");
  if (!(width > 0.0)) fail("field.width must be > 0");
  if (start_gate < 0 || start_gate >= gates) fail("field.start_gate outside the field");
  if (start_ray < 0 || start_ray >= rays) fail("field.start_ray outside the field");
}

ExperimentConfig parse_config(std::istream& is, const std::string& source) {
  ExperimentConfig cfg;
  std::map<std::string, int> key_lines;
  std::string section;
  std::string raw;
  int line_no = 0;
  auto error = [&](int line, const std::string& key, const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line << ": ";
    if (!key.empty()) os << key << ": ";
    os << msg;
    return ConfigError(os.str());
  };

  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw error(line_no, "", "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) throw error(line_no, section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw error(line_no, "", "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw error(line_no, key, "key outside any section");
    const std::string path = section + "." + key;
    const auto& table = key_table();
    const auto it = table.find(path);
    if (it == table.end()) throw error(line_no, path, "unknown key");
    if (key_lines.count(path)) throw error(line_no, path, "duplicate key");
    key_lines[path] = line_no;
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw error(line_no, path, e.what());
    }
  }

  auto check = [&](const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      const std::string path = msg.substr(0, msg.find(' '));
      const auto it = key_lines.find(path);
      const std::string rest = msg.size() > path.size() ? msg.substr(path.size() + 1) : msg;
      if (it != key_lines.end()) throw error(it->second, path, rest);
      throw ConfigError(source + ": " + msg);
    }
  };
  check([&] { cfg.sweep.validate(); });
  check([&] { cfg.field.validate(); });
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

}  // namespace tripsep::harness
