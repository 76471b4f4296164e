#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quakescan/trace.hpp"

namespace quakescan {

enum class NoiseModel { white, colored };
enum class WaveletKind { ricker, damped_sine };

// Everything a generated window or record depends on; identical specs (and
// seeds) reproduce identical samples.
struct SynthSpec {
  double rate = 200.0;
  NoiseModel noise_model = NoiseModel::white;
  double colored_exponent = 1.0;  // power ~ 1/f^exponent
  WaveletKind wavelet = WaveletKind::ricker;
  double ricker_center_hz = 12.0;
  double sine_freq_hz = 12.0;
  double sine_decay_s = 1.5;
  double snr = 5.0;  // peak |wavelet| over noise RMS
  uint64_t rng_seed = 0;

  void validate() const;
};

// Wavelet sampled at the spec rate; the Ricker is centered in its buffer,
// the damped sine starts at index 0. Peak |amplitude| is 1 for the Ricker.
std::vector<double> make_wavelet(const SynthSpec& spec);

Window make_noise_window(const SynthSpec& spec, double duration_s);

// Noise plus the wavelet scaled so peak|wavelet| = snr * RMS(noise); onset_s
// is the wavelet reference time (Ricker peak; damped-sine start).
Window make_event_window(const SynthSpec& spec, double duration_s, double onset_s);

struct ContinuousRecord {
  std::vector<Trace> traces;  // one per station
  Catalog truth;
};

// Multi-station record: shared events at per-station moveout delays over
// independent per-station noise (seed + station index). The truth catalog
// records each origin time with the spec snr in the magnitude column.
ContinuousRecord make_continuous(const SynthSpec& spec, double duration_s,
                                 const std::vector<double>& event_times,
                                 int n_stations,
                                 const std::vector<double>& moveout_s);

}  // namespace quakescan
