#include "quakescan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "quakescan/errors.hpp"
#include "quakescan/fft.hpp"
#include "quakescan/rng.hpp"
#include "quakescan/stats.hpp"

namespace quakescan {

namespace {

std::vector<double> white_noise(Rng& rng, size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = rng.next_gaussian();
  return out;
}

// Shapes white noise to power ~ 1/f^exponent in the frequency domain, then
// rescales to unit sample std so white and colored windows are comparable.
std::vector<double> colored_noise(Rng& rng, size_t n, double exponent) {
  const size_t m = next_pow2(std::max<size_t>(n, 2));
  std::vector<std::complex<double>> buf(m);
  for (auto& v : buf) v = {rng.next_gaussian(), 0.0};
  fft_inplace(buf, false);
  buf[0] = 0.0;
  for (size_t k = 1; k <= m / 2; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(m);
    const double scale = std::pow(f, -exponent / 2.0);
    buf[k] *= scale;
    if (k < m / 2) buf[m - k] = std::conj(buf[k]);
  }
  fft_inplace(buf, true);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = buf[i].real();
  const double sd = stats::sample_std(out);
  if (sd > 0.0) {
    for (double& v : out) v /= sd;
  }
  return out;
}

std::vector<double> make_noise(Rng& rng, const SynthSpec& spec, size_t n) {
  return spec.noise_model == NoiseModel::white
             ? white_noise(rng, n)
             : colored_noise(rng, n, spec.colored_exponent);
}

// Adds wavelet * scale into samples with its reference index at ref.
void add_wavelet_at(std::vector<double>& samples, const std::vector<double>& wavelet,
                    size_t wavelet_ref, long long ref, double scale) {
  for (size_t i = 0; i < wavelet.size(); ++i) {
    const long long idx = ref + static_cast<long long>(i) -
                          static_cast<long long>(wavelet_ref);
    if (idx < 0 || idx >= static_cast<long long>(samples.size())) continue;
    samples[static_cast<size_t>(idx)] += scale * wavelet[i];
  }
}

size_t wavelet_ref_index(const SynthSpec& spec, const std::vector<double>& w) {
  if (spec.wavelet == WaveletKind::ricker) return w.size() / 2;
  return 0;
}

}  // namespace

void SynthSpec::validate() const {
  if (!(rate > 0.0)) throw ConfigError("synth: rate must be positive");
  if (!(snr > 0.0)) throw ConfigError("synth: snr must be positive");
  const double fc =
      wavelet == WaveletKind::ricker ? ricker_center_hz : sine_freq_hz;
  if (!(fc > 0.0) || !(fc < rate / 2.0)) {
    throw ConfigError("synth: wavelet frequency must be inside (0, rate/2)");
  }
  if (wavelet == WaveletKind::damped_sine && !(sine_decay_s > 0.0)) {
    throw ConfigError("synth: decay must be positive");
  }
}

std::vector<double> make_wavelet(const SynthSpec& spec) {
  spec.validate();
  std::vector<double> w;
  if (spec.wavelet == WaveletKind::ricker) {
    const double f = spec.ricker_center_hz;
    // envelope below 1e-10 of peak beyond half_width
    const double half_width = std::sqrt(23.0) / (std::numbers::pi * f);
    const long long half_n = std::llround(half_width * spec.rate);
    for (long long i = -half_n; i <= half_n; ++i) {
      const double t = static_cast<double>(i) / spec.rate;
      const double a = std::numbers::pi * std::numbers::pi * f * f * t * t;
      w.push_back((1.0 - 2.0 * a) * std::exp(-a));
    }
  } else {
    const double f = spec.sine_freq_hz;
    const double tau = spec.sine_decay_s;
    const double t_end = 23.0 * tau;
    const long long n = std::llround(t_end * spec.rate);
    for (long long i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / spec.rate;
      w.push_back(std::sin(2.0 * std::numbers::pi * f * t) * std::exp(-t / tau));
    }
  }
  return w;
}

Window make_noise_window(const SynthSpec& spec, double duration_s) {
  spec.validate();
  const size_t n = static_cast<size_t>(std::llround(duration_s * spec.rate));
  if (n < 2) throw ConfigError("synth: duration too short");
  Rng rng(spec.rng_seed);
  Window w;
  w.station_id = "SYN";
  w.channel = "Z";
  w.start_time = 0.0;
  w.sampling_rate = spec.rate;
  w.samples = make_noise(rng, spec, n);
  w.label = Label::noise;
  return w;
}

Window make_event_window(const SynthSpec& spec, double duration_s, double onset_s) {
  spec.validate();
  if (onset_s < 0.0 || onset_s >= duration_s) {
    throw ConfigError("synth: onset must be inside the window");
  }
  Window w = make_noise_window(spec, duration_s);
  const auto wavelet = make_wavelet(spec);
  const double peak = stats::max_abs(wavelet);
  const double noise_rms = stats::rms(w.samples);
  const double scale = spec.snr * noise_rms / peak;
  add_wavelet_at(w.samples, wavelet, wavelet_ref_index(spec, wavelet),
                 std::llround(onset_s * spec.rate), scale);
  w.label = Label::event;
  return w;
}

ContinuousRecord make_continuous(const SynthSpec& spec, double duration_s,
                                 const std::vector<double>& event_times,
                                 int n_stations,
                                 const std::vector<double>& moveout_s) {
  spec.validate();
  if (n_stations < 1) throw ConfigError("synth: need at least one station");
  if (!moveout_s.empty() && moveout_s.size() != static_cast<size_t>(n_stations)) {
    throw ConfigError("synth: moveout list must match station count");
  }
  for (double t : event_times) {
    if (t < 0.0 || t >= duration_s) {
      throw ConfigError("synth: event time outside record");
    }
  }

  const size_t n = static_cast<size_t>(std::llround(duration_s * spec.rate));
  const auto wavelet = make_wavelet(spec);
  const double peak = stats::max_abs(wavelet);
  const size_t ref = wavelet_ref_index(spec, wavelet);

  ContinuousRecord rec;
  for (int s = 0; s < n_stations; ++s) {
    Rng rng(spec.rng_seed + static_cast<uint64_t>(s));
    Trace t;
    char name[16];
    std::snprintf(name, sizeof(name), "G%02d", s + 1);
    t.station_id = name;
    t.channel = "Z";
    t.start_time = 0.0;
    t.sampling_rate = spec.rate;
    t.samples = make_noise(rng, spec, n);
    const double noise_rms = stats::rms(t.samples);
    const double scale = spec.snr * noise_rms / peak;
    const double delay = moveout_s.empty() ? 0.0 : moveout_s[static_cast<size_t>(s)];
    for (double te : event_times) {
      add_wavelet_at(t.samples, wavelet, ref,
                     std::llround((te + delay) * spec.rate), scale);
    }
    rec.traces.push_back(std::move(t));
  }

  for (size_t i = 0; i < event_times.size(); ++i) {
    CatalogEntry e;
    e.origin_time = event_times[i];
    e.magnitude = spec.snr;  // amplitude proxy for synthetic truth
    e.id = "synth-" + std::to_string(i);
    rec.truth.entries.push_back(std::move(e));
  }
  rec.truth.sort_by_time();
  return rec;
}

}  // namespace quakescan
