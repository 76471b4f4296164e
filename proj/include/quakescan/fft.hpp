#pragma once

#include <complex>
#include <span>
#include <vector>

namespace quakescan {

size_t next_pow2(size_t n);

// Iterative radix-2 FFT; a.size() must be a power of two. The inverse
// transform includes the 1/n scaling.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// One-sided periodogram of x zero-padded to the next power of two.
// Frequencies are in cycles per sample, (0, 0.5]; the DC bin is omitted.
struct Spectrum {
  std::vector<double> freq;
  std::vector<double> power;
};

Spectrum periodogram(std::span<const double> x);

}  // namespace quakescan
