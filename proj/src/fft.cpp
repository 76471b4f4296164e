#include "quakescan/fft.hpp"

#include <cmath>
#include <numbers>

#include "quakescan/errors.hpp"

namespace quakescan {

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (n == 0) return;
  if ((n & (n - 1)) != 0) throw ConfigError("fft: size must be a power of two");

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= inv_n;
  }
}

Spectrum periodogram(std::span<const double> x) {
  Spectrum out;
  if (x.size() < 2) return out;
  const size_t m = next_pow2(x.size());
  std::vector<std::complex<double>> buf(m, {0.0, 0.0});
  for (size_t i = 0; i < x.size(); ++i) buf[i] = {x[i], 0.0};
  fft_inplace(buf, false);
  const size_t half = m / 2;
  out.freq.reserve(half);
  out.power.reserve(half);
  for (size_t k = 1; k <= half; ++k) {
    out.freq.push_back(static_cast<double>(k) / static_cast<double>(m));
    out.power.push_back(std::norm(buf[k]));
  }
  return out;
}

}  // namespace quakescan
