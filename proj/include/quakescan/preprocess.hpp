#pragma once

#include <span>
#include <vector>

#include "quakescan/trace.hpp"

namespace quakescan {

// Butterworth bandpass description. `order` is the design order per band
// edge (the seismological "corners" convention), so the resulting transfer
// function has 2*order poles realized as `order` second-order sections.
struct BandpassSpec {
  double low_hz = 5.0;
  double high_hz = 25.0;
  int order = 4;
  bool zero_phase = true;
};

std::vector<double> demean(std::span<const double> x);

// Removes the least-squares line a + b*t, t = 0..n-1.
std::vector<double> detrend_linear(std::span<const double> x);

// Scales so max|x| == 1; throws DegenerateInput on an all-zero input.
std::vector<double> normalize_unity(std::span<const double> x);

std::vector<double> bandpass(std::span<const double> x, double rate,
                             const BandpassSpec& spec);

// demean -> detrend -> bandpass -> normalize, in that order.
Window preprocess_window(const Window& window, const BandpassSpec& spec);

// One second-order section, direct form II transposed,
// H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
  double b0, b1, b2, a1, a2;
};

std::vector<Biquad> design_butter_bandpass(int order, double low_hz,
                                           double high_hz, double rate);

// Single forward pass with zero initial conditions.
std::vector<double> sosfilt(const std::vector<Biquad>& sections,
                            std::span<const double> x);

// Forward-backward pass; the input is odd-reflect padded by three times the
// section-coefficient length at both ends and trimmed afterwards, which
// suppresses the startup transient of the zero-state filter.
std::vector<double> sosfiltfilt(const std::vector<Biquad>& sections,
                                std::span<const double> x);

}  // namespace quakescan
