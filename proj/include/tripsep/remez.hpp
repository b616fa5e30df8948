#pragma once

#include <vector>

namespace tripsep {

/// Equiripple (Parks-McClellan) linear-phase lowpass, odd length (type I).
/// Edges are in cycles/sample, 0 < pass_edge < stop_edge <= 0.5. The
/// stopband error is weighted by stop_weight relative to the passband.
/// Returns the taps and writes the final equiripple deviation to *deviation.
std::vector<double> remez_lowpass(int num_taps, double pass_edge, double stop_edge,
                                  double stop_weight, double* deviation = nullptr);

/// Kaiser's order estimate for a lowpass with the given deviations; odd result.
int estimate_lowpass_taps(double pass_dev, double stop_dev, double transition_width);

}  // namespace tripsep
