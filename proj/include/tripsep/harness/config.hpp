#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tripsep/ddc.hpp"
#include "tripsep/sim_core.hpp"
#include "tripsep/waveform_dsp.hpp"

namespace tripsep::harness {

/// Schema violation; message carries "source:line: section.key: reason".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme { sz, freq_diversity };

const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& text);

struct SZSettings {
  int n = 8;
  double notch_width = 0.75;
  Window window = Window::hann;
};

enum class FdPath { gate_level, full_if };
enum class BranchReference { truth, none };

struct FdSettings {
  double snr_gate_db = 10.0;
  FdPath path = FdPath::gate_level;
  BranchReference branch_reference = BranchReference::truth;
};

struct DdcSettings {
  FilterMask mask;
  DesignOptions design{2.0e6, 2001, 4096};
};

struct SweepConfig {
  Scheme scheme = Scheme::sz;
  std::vector<double> ratio_grid;   // P1/P2, dB, ascending
  std::vector<double> jitter_list;  // rms degrees
  int trials = 200;
  RadarConfig radar;
  DualPolTripSpec trip1;  // strong trip; its power follows the ratio
  DualPolTripSpec trip2;  // weak trip, retrieved
  std::uint64_t seed0 = 0;
  SZSettings sz;
  FdSettings fd;
  DdcSettings ddc;

  SweepConfig();
  void validate() const;
};

/// Synthetic gate x ray field for the retrieve subcommand.
struct FieldConfig {
  int gates = 24;
  int rays = 8;
  double velocity = 5.0;       // m/s at gate 0
  double shear = 0.0;          // m/s per gate
  double width = 1.0;          // m/s
  double snr_db = 20.0;
  int start_gate = 0;
  int start_ray = 0;
  double reference_velocity = 0.0;  // external estimate used to pick the branch
  bool use_reference = true;

  void validate() const;
};

struct ExperimentConfig {
  SweepConfig sweep;
  FieldConfig field;
};

/// Parses the key = value format with [section] headers and '#' comments.
/// Unknown sections or keys, malformed values and schema violations throw
/// ConfigError naming the line and key path.
ExperimentConfig parse_config(std::istream& is, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// "a, b, c" or "start:step:stop" (inclusive).
std::vector<double> parse_number_list(const std::string& text);

}  // namespace tripsep::harness
