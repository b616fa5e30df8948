#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tripsep/freq_diversity.hpp"
#include "tripsep/harness/config.hpp"
#include "tripsep/sz_coding.hpp"

namespace tripsep::harness {

inline constexpr double kRecoveryBiasMps = 2.0;
inline constexpr double kRecoveryStdMps = 4.0;

struct SweepPoint {
  double ratio_db = 0.0;
  double jitter_deg = 0.0;
  int trials = 0;
  double bias_mps = 0.0;  // median of wrapped weak-trip velocity errors
  double std_mps = 0.0;
  double retrieval_rate = 0.0;
  double ci95_mps = 0.0;  // half-width of the 95% interval of the median

  /// |bias| < 2 m/s and std < 4 m/s.
  bool recovered() const;
  /// Field-wise equality; NaN statistics compare equal to NaN.
  bool operator==(const SweepPoint& other) const;
};

struct SweepResult {
  Scheme scheme = Scheme::sz;
  std::vector<SweepPoint> points;  // jitter-major, ratio ascending

  bool operator==(const SweepResult&) const = default;
};

/// Seed of one trial; independent of evaluation order.
std::uint64_t trial_seed(std::uint64_t seed0, std::size_t ratio_index, std::size_t jitter_index,
                         std::size_t trial_index);

/// Weak-trip velocity outcome of a single simulated trial.
struct TrialOutcome {
  bool retrieved = false;
  double error_mps = 0.0;  // wrapped into [-v_unb, v_unb)
};

/// Precomputed scheme state shared by all trials (SZ code, FD transfer).
class TrialRunner {
 public:
  explicit TrialRunner(const SweepConfig& cfg);
  TrialOutcome run(double ratio_db, double jitter_deg, std::uint64_t seed) const;
  const GateTransfer& transfer() const { return transfer_; }

 private:
  SweepConfig cfg_;
  std::optional<SZCode> code_;
  DecimationChain chain_;
  IQSeries ref_chirp_;
  GateTransfer transfer_;
};

/// Runs every (jitter, ratio) grid point with `trials` trials on `parallel`
/// worker threads (0 = hardware concurrency). Deterministic in seed0.
SweepResult run_sweep(const SweepConfig& cfg, int parallel = 1);

/// Aggregates trial outcomes into one grid point.
SweepPoint aggregate(double ratio_db, double jitter_deg, const std::vector<TrialOutcome>& outcomes);

/// Largest ratio such that every grid point from the lowest ratio up to it is
/// recovered, for one jitter value. NaN when the first point already fails.
double recovery_boundary(const SweepResult& result, double jitter_deg);

/// CSV: header then one row per point; floats with 6 significant digits.
void write_csv(std::ostream& os, const SweepResult& result);
SweepResult read_csv(std::istream& is);
void write_json(std::ostream& os, const SweepResult& result);
SweepResult read_json(std::istream& is);

enum class OutputFormat { csv, json };
/// Writes the result file; I/O failures throw std::runtime_error with the OS message.
void emit_results(const SweepResult& result, const std::string& path, OutputFormat format);

}  // namespace tripsep::harness
