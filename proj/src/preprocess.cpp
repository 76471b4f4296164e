#include "quakescan/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "quakescan/errors.hpp"
#include "quakescan/stats.hpp"

namespace quakescan {

namespace {

using cplx = std::complex<double>;

// Pairs the digital poles into second-order sections. Poles arrive as the
// bandpass image of the Butterworth prototype: complex poles in conjugate
// pairs plus an even number of real poles (from odd prototype orders).
std::vector<Biquad> pair_sections(std::vector<cplx> poles, double gain) {
  constexpr double kImagEps = 1e-10;
  std::vector<cplx> complex_half;
  std::vector<double> reals;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) < kImagEps) {
      reals.push_back(p.real());
    } else if (p.imag() > 0.0) {
      complex_half.push_back(p);
    }
  }
  std::sort(complex_half.begin(), complex_half.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::sort(reals.begin(), reals.end());

  const size_t n_sections = complex_half.size() + reals.size() / 2;
  // Even gain split keeps section coefficients near unity.
  const double g = std::pow(gain, 1.0 / static_cast<double>(n_sections));

  std::vector<Biquad> out;
  out.reserve(n_sections);
  for (const auto& p : complex_half) {
    // numerator g*(z-1)(z+1): one zero at DC, one at Nyquist
    out.push_back({g, 0.0, -g, -2.0 * p.real(), std::norm(p)});
  }
  for (size_t i = 0; i + 1 < reals.size(); i += 2) {
    out.push_back({g, 0.0, -g, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]});
  }
  return out;
}

}  // namespace

std::vector<Biquad> design_butter_bandpass(int order, double low_hz,
                                           double high_hz, double rate) {
  if (order < 1) throw ConfigError("filter order must be at least 1");
  if (!(rate > 0.0)) throw ConfigError("non-positive sampling rate");
  if (!(low_hz > 0.0) || !(low_hz < high_hz)) {
    throw ConfigError("band edges must satisfy 0 < low < high");
  }
  if (!(high_hz < rate / 2.0)) {
    throw ConfigError("corner frequencies at or above Nyquist");
  }

  // Prewarped analog band edges.
  const double w1 = 2.0 * rate * std::tan(std::numbers::pi * low_hz / rate);
  const double w2 = 2.0 * rate * std::tan(std::numbers::pi * high_hz / rate);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Unit-cutoff Butterworth prototype poles, then the lowpass-to-bandpass
  // substitution s -> (s^2 + w0^2) / (bw * s): each prototype pole maps to
  // the two roots of s^2 - p*bw*s + w0^2 = 0.
  std::vector<cplx> analog_poles;
  analog_poles.reserve(2 * static_cast<size_t>(order));
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi / 2.0 +
                         std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    const cplx proto = std::polar(1.0, theta);
    const cplx half = proto * (bw / 2.0);
    const cplx disc = std::sqrt(half * half - cplx(w0sq, 0.0));
    analog_poles.push_back(half + disc);
    analog_poles.push_back(half - disc);
  }

  // Bilinear transform z = (2*rate + s) / (2*rate - s). The analog system
  // has `order` zeros at s = 0 and gain bw^order; the digital zeros land at
  // z = +1 (order of them) with the remaining `order` at z = -1.
  const double fs2 = 2.0 * rate;
  std::vector<cplx> digital_poles;
  digital_poles.reserve(analog_poles.size());
  cplx den(1.0, 0.0);
  for (const auto& p : analog_poles) {
    digital_poles.push_back((cplx(fs2, 0.0) + p) / (cplx(fs2, 0.0) - p));
    den *= (cplx(fs2, 0.0) - p);
  }
  const double num = std::pow(bw, order) * std::pow(fs2, order);
  const double gain = (num / den).real();

  return pair_sections(std::move(digital_poles), gain);
}

std::vector<double> sosfilt(const std::vector<Biquad>& sections,
                            std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> sosfiltfilt(const std::vector<Biquad>& sections,
                                std::span<const double> x) {
  const size_t n = x.size();
  if (n < 2) return std::vector<double>(x.begin(), x.end());

  size_t pad = 3 * (2 * sections.size() + 1);
  if (pad > n - 1) pad = n - 1;

  // Odd reflection about the end samples.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[0] - x[pad - i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

  std::vector<double> fwd = sosfilt(sections, ext);
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = sosfilt(sections, fwd);
  std::reverse(bwd.begin(), bwd.end());

  return std::vector<double>(bwd.begin() + static_cast<ptrdiff_t>(pad),
                             bwd.begin() + static_cast<ptrdiff_t>(pad + n));
}

std::vector<double> demean(std::span<const double> x) {
  if (x.empty()) throw DataError("demean: empty input");
  const double mu = stats::mean(x);
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] - mu;
  return out;
}

std::vector<double> detrend_linear(std::span<const double> x) {
  const size_t n = x.size();
  if (n < 2) throw DataError("detrend: need at least 2 samples");

  // Closed-form least squares for y = a + b*t with t = 0..n-1.
  const double nn = static_cast<double>(n);
  const double t_mean = (nn - 1.0) / 2.0;
  double y_mean = stats::mean(x);
  double stt = 0.0, sty = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - t_mean;
    stt += dt * dt;
    sty += dt * (x[i] - y_mean);
  }
  const double b = sty / stt;
  const double a = y_mean - b * t_mean;

  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = x[i] - (a + b * static_cast<double>(i));
  }
  return out;
}

std::vector<double> normalize_unity(std::span<const double> x) {
  const double peak = stats::max_abs(x);
  if (!(peak > 0.0)) throw DegenerateInput("degenerate window");
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] / peak;
  return out;
}

std::vector<double> bandpass(std::span<const double> x, double rate,
                             const BandpassSpec& spec) {
  const auto sections =
      design_butter_bandpass(spec.order, spec.low_hz, spec.high_hz, rate);
  return spec.zero_phase ? sosfiltfilt(sections, x) : sosfilt(sections, x);
}

Window preprocess_window(const Window& window, const BandpassSpec& spec) {
  Window out = window;
  out.samples = demean(out.samples);
  out.samples = detrend_linear(out.samples);
  out.samples = bandpass(out.samples, out.sampling_rate, spec);
  out.samples = normalize_unity(out.samples);
  return out;
}

}  // namespace quakescan
