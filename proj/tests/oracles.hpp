#pragma once

// Brute-force reference implementations, written independently of the
// library code paths they check. Straight textbook loops; no shortcuts, no
// shared helpers with src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "quakescan/trace.hpp"

namespace oracle {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_std(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Full normalized ACF out to max_lag, direct definition.
inline std::vector<double> acf(std::span<const double> x, size_t max_lag) {
  const size_t n = x.size();
  const double mu = mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mu) * (v - mu);
  std::vector<double> r(max_lag + 1, 0.0);
  for (size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (size_t t = 0; t + k < n; ++t) s += (x[t] - mu) * (x[t + k] - mu);
    r[k] = s / c0;
  }
  return r;
}

inline size_t first_zero(std::span<const double> r) {
  for (size_t k = 1; k < r.size(); ++k) {
    if (r[k] <= 0.0) return k;
  }
  return r.size() - 1;
}

inline size_t first_zero_of_series(std::span<const double> x) {
  const auto r = acf(x, x.size() - 1);
  return first_zero(r);
}

inline double removepoints(std::span<const double> z) {
  const size_t n = z.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return z[a] < z[b]; });
  std::vector<char> removed(n, 0);
  for (size_t i = 0; i < n / 2; ++i) removed[idx[i]] = 1;
  std::vector<double> survivors;
  for (size_t i = 0; i < n; ++i) {
    if (!removed[i]) survivors.push_back(z[i]);
  }
  const double fz_red = static_cast<double>(first_zero_of_series(survivors));
  const double fz_all = static_cast<double>(first_zero_of_series(z));
  return fz_red / fz_all;
}

inline double slidingwindow(std::span<const double> z) {
  const size_t seg = z.size() / 5;
  std::vector<double> stds;
  for (size_t i = 0; i < 5; ++i) {
    std::vector<double> part(z.begin() + static_cast<ptrdiff_t>(i * seg),
                             z.begin() + static_cast<ptrdiff_t>((i + 1) * seg));
    stds.push_back(sample_std(part));
  }
  return sample_std(stds) / sample_std(z);
}

// Plain-order 2-D histogram MI in bits.
inline double mutual_information(std::span<const double> x,
                                 std::span<const double> y, int bins) {
  const size_t n = x.size();
  const double xmin = *std::min_element(x.begin(), x.end());
  const double xmax = *std::max_element(x.begin(), x.end());
  const double ymin = *std::min_element(y.begin(), y.end());
  const double ymax = *std::max_element(y.begin(), y.end());
  auto bucket = [bins](double v, double lo, double hi) {
    if (!(hi > lo)) return 0;
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    return std::clamp(b, 0, bins - 1);
  };
  std::vector<std::vector<double>> joint(static_cast<size_t>(bins),
                                         std::vector<double>(bins, 0.0));
  for (size_t i = 0; i < n; ++i) {
    joint[bucket(x[i], xmin, xmax)][bucket(y[i], ymin, ymax)] += 1.0;
  }
  std::vector<double> px(bins, 0.0), py(bins, 0.0);
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      px[i] += joint[i][j];
      py[j] += joint[i][j];
    }
  }
  double mi = 0.0;
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      if (joint[i][j] == 0.0) continue;
      const double pij = joint[i][j] / static_cast<double>(n);
      mi += pij * std::log2(pij / ((px[i] / n) * (py[j] / n)));
    }
  }
  return mi;
}

inline double momentcorr(std::span<const double> z) {
  const size_t n = z.size();
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    y[i] = (z[i] < 0.0 ? -1.0 : 1.0) * std::sqrt(std::abs(z[i]));
  }
  const auto wl = static_cast<size_t>(std::llround(0.02 * static_cast<double>(n)));
  const auto step = static_cast<size_t>(std::llround(0.8 * static_cast<double>(wl)));
  std::vector<double> means, stds;
  for (size_t s = 0; s + wl <= n; s += step) {
    std::vector<double> seg(y.begin() + static_cast<ptrdiff_t>(s),
                            y.begin() + static_cast<ptrdiff_t>(s + wl));
    means.push_back(mean(seg));
    stds.push_back(sample_std(seg));
  }
  const int bins = std::max(
      2, static_cast<int>(std::sqrt(static_cast<double>(means.size())) / 2.0));
  return mutual_information(means, stds, bins);
}

// Duplicates the library's seeded stream contract: splitmix64 plus a partial
// Fisher-Yates that keeps draw order, selection by value-modulo.
struct SplitMix {
  uint64_t state;
  explicit SplitMix(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

inline std::vector<size_t> sample_indices(uint64_t seed, size_t n, size_t k) {
  SplitMix rng(seed);
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (k > n) k = n;
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + static_cast<size_t>(rng.next() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

struct SurpriseParams {
  int n_groups = 5;
  int memory = 100;
  int n_eval = 500;
  uint64_t seed = 0;
};

inline double surprise_tstat(std::span<const double> z, const SurpriseParams& p) {
  const size_t n = z.size();
  const size_t g = static_cast<size_t>(p.n_groups);
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> bounds;
  for (size_t j = 1; j < g; ++j) {
    const size_t pos = (j * n + g - 1) / g;
    bounds.push_back(sorted[pos - 1]);
  }
  std::vector<int> sym(n);
  for (size_t i = 0; i < n; ++i) {
    int s = static_cast<int>(g) - 1;
    for (size_t j = 0; j < bounds.size(); ++j) {
      if (z[i] <= bounds[j]) {
        s = static_cast<int>(j);
        break;
      }
    }
    sym[i] = s;
  }
  const size_t memory = static_cast<size_t>(p.memory);
  const size_t avail = n - memory;
  const size_t k = std::min(static_cast<size_t>(p.n_eval), avail);
  const auto picks = sample_indices(p.seed, avail, k);
  std::vector<double> ig;
  for (size_t pick : picks) {
    const size_t t = memory + pick;
    int count = 0;
    for (size_t i = t - memory; i < t; ++i) {
      if (sym[i] == sym[t]) ++count;
    }
    const double prob =
        count > 0 ? static_cast<double>(count) / static_cast<double>(memory)
                  : 1.0 / static_cast<double>(memory + 1);
    ig.push_back(-std::log2(prob));
  }
  const double m = mean(ig);
  const double sd = sample_std(ig);
  if (sd == 0.0) throw std::runtime_error("oracle: zero-variance gains");
  return m / (sd / std::sqrt(static_cast<double>(k)));
}

// Exhaustive threshold scan for the 1-D classifier: every midpoint plus
// sentinels, both polarities, O(n^2) counting.
struct ThresholdRule {
  double accuracy = -1.0;
  double threshold = 0.0;
  bool ge = true;
};

inline ThresholdRule best_threshold(std::span<const double> v,
                                    std::span<const quakescan::Label> labels) {
  const size_t n = v.size();
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> candidates;
  candidates.push_back(sorted.front() - 1.0);
  for (size_t i = 0; i + 1 < sorted.size(); ++i) {
    candidates.push_back((sorted[i] + sorted[i + 1]) / 2.0);
  }
  candidates.push_back(sorted.back() + 1.0);

  ThresholdRule best;
  for (double t : candidates) {
    for (bool ge : {true, false}) {
      size_t correct = 0;
      for (size_t i = 0; i < n; ++i) {
        const bool predict_event = ge ? (v[i] >= t) : (v[i] < t);
        const bool is_event = labels[i] == quakescan::Label::event;
        if (predict_event == is_event) ++correct;
      }
      const double acc = static_cast<double>(correct) / static_cast<double>(n);
      if (acc > best.accuracy) {
        best.accuracy = acc;
        best.threshold = t;
        best.ge = ge;
      }
    }
  }
  return best;
}

inline double pearson_abs(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::abs(sxy / std::sqrt(sxx * syy));
}

inline std::vector<size_t> greedy_prune(const std::vector<std::vector<double>>& cols,
                                        double r_max) {
  std::vector<size_t> kept;
  for (size_t c = 0; c < cols.size(); ++c) {
    bool ok = true;
    for (size_t k : kept) {
      if (pearson_abs(cols[c], cols[k]) > r_max) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c);
  }
  return kept;
}

// Amplitude of the frequency-f component via correlation with quadrature
// sinusoids over an integer number of cycles.
inline double tone_amplitude(std::span<const double> x, double rate, double f) {
  const double period = rate / f;
  const size_t cycles = static_cast<size_t>(static_cast<double>(x.size()) / period);
  const size_t n = static_cast<size_t>(static_cast<double>(cycles) * period);
  double c = 0.0, s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double w = 2.0 * M_PI * f * static_cast<double>(i) / rate;
    c += x[i] * std::cos(w);
    s += x[i] * std::sin(w);
  }
  return 2.0 * std::sqrt(c * c + s * s) / static_cast<double>(n);
}

// Least-squares line via the normal equations.
inline void fit_line(std::span<const double> y, double& intercept, double& slope) {
  const size_t n = y.size();
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    st += t;
    sy += y[i];
    stt += t * t;
    sty += t * y[i];
  }
  const double dn = static_cast<double>(n);
  const double det = dn * stt - st * st;
  slope = (dn * sty - st * sy) / det;
  intercept = (sy * stt - st * sty) / det;
}

}  // namespace oracle
