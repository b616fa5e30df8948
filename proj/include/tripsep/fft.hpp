#pragma once

#include <span>
#include <vector>

#include "tripsep/iq_series.hpp"

namespace tripsep::fft {

// Thin FFTW wrapper. Plans are cached per (length, direction) behind a mutex;
// execution uses the new-array interface, so calls are safe from any thread.

/// X[k] = sum_n x[n] exp(-j 2 pi k n / N). Unnormalized.
std::vector<cplx> forward(std::span<const cplx> x);

/// x[n] = (1/N) sum_k X[k] exp(+j 2 pi k n / N).
std::vector<cplx> inverse(std::span<const cplx> spectrum);

}  // namespace tripsep::fft
