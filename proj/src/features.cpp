#include "quakescan/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "quakescan/errors.hpp"
#include "quakescan/fft.hpp"
#include "quakescan/rng.hpp"
#include "quakescan/stats.hpp"

namespace quakescan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log2_safe(double p) { return std::log2(p); }

// Constant series must hit the degenerate path even when repeated summation
// would leave sub-ulp rounding noise in the variance.
bool all_equal(std::span<const double> x) {
  for (size_t i = 1; i < x.size(); ++i) {
    if (x[i] != x[0]) return false;
  }
  return true;
}

// Sum of (x_t - mu)(x_{t+k} - mu) over the overlap.
double autocov_sum(std::span<const double> x, double mu, size_t k) {
  double s = 0.0;
  for (size_t t = 0; t + k < x.size(); ++t) {
    s += (x[t] - mu) * (x[t + k] - mu);
  }
  return s;
}

}  // namespace

const std::array<const char*, 4> kSelectedFeatures = {
    "DN_RemovePoints_min_05_fzcacrat",
    "SY_SlidingWindow_s_s_5_1",
    "ST_MomentCorr_002_02_mean_std_sqrt_mi",
    "FC_Surprise_dist_100_5_q_500_tstat",
};

static const std::array<const char*, 12> kBaselineFeatures = {
    "baseline.variance",
    "baseline.skewness",
    "baseline.kurtosis",
    "baseline.zero_crossing_rate",
    "baseline.acf1",
    "baseline.acf5",
    "baseline.acf_first_zero",
    "baseline.spectral_centroid",
    "baseline.spectral_rolloff90",
    "baseline.hist_entropy10",
    "baseline.peak_position",
    "baseline.rms_half_ratio",
};

std::vector<std::string> all_feature_names() {
  std::vector<std::string> names;
  names.reserve(kSelectedFeatures.size() + kBaselineFeatures.size());
  for (const char* n : kSelectedFeatures) names.emplace_back(n);
  for (const char* n : kBaselineFeatures) names.emplace_back(n);
  return names;
}

bool is_selected_feature(const std::string& name) {
  return std::any_of(kSelectedFeatures.begin(), kSelectedFeatures.end(),
                     [&](const char* n) { return name == n; });
}

void SurpriseSpec::validate() const {
  if (n_groups < 2) throw ConfigError("surprise: n_groups must be >= 2");
  if (memory < 1) throw ConfigError("surprise: memory must be >= 1");
  if (n_eval < 2) throw ConfigError("surprise: n_eval must be >= 2");
}

bool FeatureVector::has_finite(const std::string& name) const {
  for (const auto& [n, v] : values) {
    if (n == name) return std::isfinite(v);
  }
  return false;
}

double FeatureVector::get(const std::string& name) const {
  for (const auto& [n, v] : values) {
    if (n == name) return v;
  }
  return kNaN;
}

std::vector<double> zscore(std::span<const double> x) {
  if (x.size() < 2) throw DegenerateInput("degenerate window");
  if (all_equal(x)) throw DegenerateInput("degenerate window");
  const double mu = stats::mean(x);
  const double sd = stats::sample_std(x);
  if (!(sd > 0.0)) throw DegenerateInput("degenerate window");
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mu) / sd;
  return out;
}

std::vector<double> acf(std::span<const double> x, size_t max_lag) {
  const size_t n = x.size();
  if (n < 2) throw DegenerateInput("degenerate feature input");
  if (max_lag >= n) throw ConfigError("acf: max_lag must be below the length");
  if (all_equal(x)) throw DegenerateInput("degenerate feature input");
  const double mu = stats::mean(x);
  const double c0 = autocov_sum(x, mu, 0);
  if (!(c0 > 0.0)) throw DegenerateInput("degenerate feature input");
  std::vector<double> r(max_lag + 1);
  r[0] = 1.0;
  for (size_t k = 1; k <= max_lag; ++k) r[k] = autocov_sum(x, mu, k) / c0;
  return r;
}

size_t first_zero_crossing(std::span<const double> acf_values) {
  for (size_t k = 1; k < acf_values.size(); ++k) {
    if (acf_values[k] <= 0.0) return k;
  }
  return acf_values.empty() ? 0 : acf_values.size() - 1;
}

size_t acf_first_zero_of_series(std::span<const double> x) {
  const size_t n = x.size();
  if (n < 2) throw DegenerateInput("degenerate feature input");
  if (all_equal(x)) throw DegenerateInput("degenerate feature input");
  const double mu = stats::mean(x);
  const double c0 = autocov_sum(x, mu, 0);
  if (!(c0 > 0.0)) throw DegenerateInput("degenerate feature input");
  for (size_t k = 1; k < n; ++k) {
    if (autocov_sum(x, mu, k) / c0 <= 0.0) return k;
  }
  return n - 1;
}

double feat_removepoints(std::span<const double> zscored) {
  const size_t n = zscored.size();
  if (n < 40) throw DegenerateInput("degenerate feature input");

  // Rank by value, ties broken by earlier index removed first; drop the
  // lowest half, keep survivors in time order.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (zscored[a] != zscored[b]) return zscored[a] < zscored[b];
    return a < b;
  });
  const size_t n_remove = n / 2;
  std::vector<size_t> keep(order.begin() + static_cast<ptrdiff_t>(n_remove),
                           order.end());
  std::sort(keep.begin(), keep.end());
  std::vector<double> reduced(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) reduced[i] = zscored[keep[i]];

  const size_t fz_full = acf_first_zero_of_series(zscored);
  const size_t fz_reduced = acf_first_zero_of_series(reduced);
  return static_cast<double>(fz_reduced) / static_cast<double>(fz_full);
}

double feat_slidingwindow(std::span<const double> zscored) {
  const size_t n = zscored.size();
  if (n < 10) throw DegenerateInput("degenerate feature input");
  if (all_equal(zscored)) throw DegenerateInput("degenerate feature input");
  const size_t seg = n / 5;

  std::array<double, 5> seg_std{};
  for (size_t i = 0; i < 5; ++i) {
    seg_std[i] = stats::sample_std(zscored.subspan(i * seg, seg));
  }
  const double full_std = stats::sample_std(zscored);
  if (!(full_std > 0.0)) throw DegenerateInput("degenerate feature input");
  return stats::sample_std(seg_std) / full_std;
}

double mutual_information_hist(std::span<const double> x,
                               std::span<const double> y, int bins) {
  if (x.size() != y.size()) throw ConfigError("mutual information: length mismatch");
  if (x.size() < 4) throw ConfigError("mutual information: need at least 4 samples");
  if (bins < 2) throw ConfigError("mutual information: bins must be >= 2");

  const size_t n = x.size();
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double xmin = *xmin_it, xmax = *xmax_it;
  const double ymin = *ymin_it, ymax = *ymax_it;

  auto bin_of = [bins](double v, double lo, double hi) -> int {
    if (!(hi > lo)) return 0;
    int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
    if (idx < 0) idx = 0;
    if (idx >= bins) idx = bins - 1;
    return idx;
  };

  const size_t b = static_cast<size_t>(bins);
  std::vector<size_t> joint(b * b, 0), px(b, 0), py(b, 0);
  for (size_t i = 0; i < n; ++i) {
    const int bx = bin_of(x[i], xmin, xmax);
    const int by = bin_of(y[i], ymin, ymax);
    ++joint[static_cast<size_t>(bx) * b + static_cast<size_t>(by)];
    ++px[static_cast<size_t>(bx)];
    ++py[static_cast<size_t>(by)];
  }

  // Each term is symmetric in (x, y); summing the sorted terms makes
  // MI(x, y) == MI(y, x) bit-exact.
  const double dn = static_cast<double>(n);
  std::vector<double> terms;
  terms.reserve(b * b);
  for (size_t i = 0; i < b; ++i) {
    for (size_t j = 0; j < b; ++j) {
      const size_t c = joint[i * b + j];
      if (c == 0) continue;
      const double pij = static_cast<double>(c) / dn;
      const double pi = static_cast<double>(px[i]) / dn;
      const double pj = static_cast<double>(py[j]) / dn;
      terms.push_back(pij * log2_safe(pij / (pi * pj)));
    }
  }
  std::sort(terms.begin(), terms.end());
  double mi = 0.0;
  for (double t : terms) mi += t;
  return std::max(mi, 0.0);
}

double feat_momentcorr(std::span<const double> zscored) {
  const size_t n = zscored.size();
  if (n < 200) throw DegenerateInput("degenerate feature input");

  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    y[i] = std::copysign(std::sqrt(std::abs(zscored[i])), zscored[i]);
  }

  const size_t wl = static_cast<size_t>(std::llround(0.02 * static_cast<double>(n)));
  const size_t step = static_cast<size_t>(std::llround(0.8 * static_cast<double>(wl)));
  if (wl < 2 || step < 1) throw DegenerateInput("degenerate feature input");

  std::vector<double> means, stds;
  for (size_t start = 0; start + wl <= n; start += step) {
    const auto seg = std::span<const double>(y).subspan(start, wl);
    means.push_back(stats::mean(seg));
    stds.push_back(stats::sample_std(seg));
  }
  if (means.size() < 4) throw DegenerateInput("degenerate feature input");
  if (all_equal(means) || all_equal(stds)) {
    throw DegenerateInput("degenerate feature input");
  }
  if (!(stats::sample_std(means) > 0.0) || !(stats::sample_std(stds) > 0.0)) {
    throw DegenerateInput("degenerate feature input");
  }

  const int bins = std::max(
      2, static_cast<int>(std::floor(std::sqrt(static_cast<double>(means.size())) / 2.0)));
  return mutual_information_hist(means, stds, bins);
}

double feat_surprise(std::span<const double> zscored, const SurpriseSpec& spec) {
  spec.validate();
  const size_t n = zscored.size();
  const size_t memory = static_cast<size_t>(spec.memory);
  if (n < memory + 2) throw DegenerateInput("degenerate feature input");

  // Quantile-group boundaries from the series itself; ties go to the lower
  // group. Boundary j is the order statistic at position ceil(j*n/groups).
  const size_t groups = static_cast<size_t>(spec.n_groups);
  std::vector<double> sorted(zscored.begin(), zscored.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> bounds(groups - 1);
  for (size_t j = 1; j < groups; ++j) {
    const size_t pos = (j * n + groups - 1) / groups;  // ceil, 1-indexed
    bounds[j - 1] = sorted[pos - 1];
  }
  std::vector<int> symbols(n);
  for (size_t i = 0; i < n; ++i) {
    int s = static_cast<int>(groups) - 1;
    for (size_t j = 0; j < bounds.size(); ++j) {
      if (zscored[i] <= bounds[j]) {
        s = static_cast<int>(j);
        break;
      }
    }
    symbols[i] = s;
  }

  const size_t avail = n - memory;
  const size_t n_eval = std::min(static_cast<size_t>(spec.n_eval), avail);
  if (n_eval < 2) throw DegenerateInput("degenerate feature input");

  Rng rng(spec.rng_seed);
  const auto picks = rng.sample_without_replacement(avail, n_eval);

  // Information gain of the observed symbol against the distribution of the
  // previous `memory` symbols; unseen symbols get the 1/(memory+1) floor.
  std::vector<double> gains;
  gains.reserve(n_eval);
  for (size_t pick : picks) {
    const size_t t = memory + pick;
    size_t count = 0;
    for (size_t i = t - memory; i < t; ++i) {
      if (symbols[i] == symbols[t]) ++count;
    }
    const double p = count > 0
                         ? static_cast<double>(count) / static_cast<double>(memory)
                         : 1.0 / static_cast<double>(memory + 1);
    gains.push_back(-log2_safe(p));
  }

  if (all_equal(gains)) throw DegenerateInput("degenerate feature input");
  const double m = stats::mean(gains);
  const double sd = stats::sample_std(gains);
  if (!(sd > 0.0)) throw DegenerateInput("degenerate feature input");
  return m / (sd / std::sqrt(static_cast<double>(n_eval)));
}

namespace {

// Shared intermediates for the baseline set.
struct BaselineContext {
  std::span<const double> z;
  std::optional<std::vector<double>> acf5;
  std::optional<Spectrum> spectrum;

  const std::vector<double>& acf_to_5() {
    if (!acf5) acf5 = acf(z, std::min<size_t>(5, z.size() - 1));
    return *acf5;
  }
  const Spectrum& spec() {
    if (!spectrum) spectrum = periodogram(z);
    return *spectrum;
  }
};

double moment_ratio(std::span<const double> z, int p) {
  const double mu = stats::mean(z);
  double m2 = 0.0, mp = 0.0;
  for (double v : z) {
    const double d = v - mu;
    m2 += d * d;
    mp += std::pow(d, p);
  }
  const double n = static_cast<double>(z.size());
  m2 /= n;
  mp /= n;
  if (!(m2 > 0.0)) throw DegenerateInput("degenerate feature input");
  return mp / std::pow(m2, p / 2.0);
}

double zero_crossing_rate(std::span<const double> z) {
  if (z.size() < 2) throw DegenerateInput("degenerate feature input");
  size_t crossings = 0;
  for (size_t i = 1; i < z.size(); ++i) {
    if (z[i - 1] * z[i] < 0.0) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(z.size() - 1);
}

double spectral_centroid(const Spectrum& s) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < s.freq.size(); ++i) {
    num += s.freq[i] * s.power[i];
    den += s.power[i];
  }
  if (!(den > 0.0)) throw DegenerateInput("degenerate feature input");
  return num / den;
}

double spectral_rolloff(const Spectrum& s, double fraction) {
  double total = 0.0;
  for (double p : s.power) total += p;
  if (!(total > 0.0)) throw DegenerateInput("degenerate feature input");
  double acc = 0.0;
  for (size_t i = 0; i < s.power.size(); ++i) {
    acc += s.power[i];
    if (acc >= fraction * total) return s.freq[i];
  }
  return s.freq.back();
}

double hist_entropy(std::span<const double> z, int bins) {
  const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<size_t> counts(static_cast<size_t>(bins), 0);
  for (double v : z) {
    int idx = 0;
    if (hi > lo) {
      idx = static_cast<int>((v - lo) / (hi - lo) * bins);
      if (idx < 0) idx = 0;
      if (idx >= bins) idx = bins - 1;
    }
    ++counts[static_cast<size_t>(idx)];
  }
  const double n = static_cast<double>(z.size());
  double h = 0.0;
  for (size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * log2_safe(p);
  }
  return h;
}

double peak_position(std::span<const double> z) {
  if (z.size() < 2) throw DegenerateInput("degenerate feature input");
  size_t best = 0;
  double best_val = std::abs(z[0]);
  for (size_t i = 1; i < z.size(); ++i) {
    const double a = std::abs(z[i]);
    if (a > best_val) {
      best_val = a;
      best = i;
    }
  }
  return static_cast<double>(best) / static_cast<double>(z.size() - 1);
}

double rms_half_ratio(std::span<const double> z) {
  const size_t half = z.size() / 2;
  if (half < 1) throw DegenerateInput("degenerate feature input");
  const double first = stats::rms(z.subspan(0, half));
  const double second = stats::rms(z.subspan(half));
  if (!(second > 0.0)) throw DegenerateInput("degenerate feature input");
  return first / second;
}

double sample_variance(std::span<const double> z) {
  const double sd = stats::sample_std(z);
  return sd * sd;
}

double eval_baseline(const std::string& name, BaselineContext& ctx) {
  const auto& z = ctx.z;
  if (name == "baseline.variance") return sample_variance(z);
  if (name == "baseline.skewness") return moment_ratio(z, 3);
  if (name == "baseline.kurtosis") return moment_ratio(z, 4);
  if (name == "baseline.zero_crossing_rate") return zero_crossing_rate(z);
  if (name == "baseline.acf1") return ctx.acf_to_5().size() > 1 ? ctx.acf_to_5()[1] : kNaN;
  if (name == "baseline.acf5") return ctx.acf_to_5().size() > 5 ? ctx.acf_to_5()[5] : kNaN;
  if (name == "baseline.acf_first_zero") {
    return static_cast<double>(acf_first_zero_of_series(z));
  }
  if (name == "baseline.spectral_centroid") return spectral_centroid(ctx.spec());
  if (name == "baseline.spectral_rolloff90") return spectral_rolloff(ctx.spec(), 0.9);
  if (name == "baseline.hist_entropy10") return hist_entropy(z, 10);
  if (name == "baseline.peak_position") return peak_position(z);
  if (name == "baseline.rms_half_ratio") return rms_half_ratio(z);
  throw ConfigError("unknown feature '" + name + "'");
}

double eval_feature(const std::string& name, BaselineContext& ctx,
                    const SurpriseSpec& surprise) {
  if (name == kSelectedFeatures[0]) return feat_removepoints(ctx.z);
  if (name == kSelectedFeatures[1]) return feat_slidingwindow(ctx.z);
  if (name == kSelectedFeatures[2]) return feat_momentcorr(ctx.z);
  if (name == kSelectedFeatures[3]) return feat_surprise(ctx.z, surprise);
  return eval_baseline(name, ctx);
}

}  // namespace

FeatureVector baseline_features(std::span<const double> zscored) {
  FeatureVector fv;
  BaselineContext ctx{zscored, {}, {}};
  for (const char* name : kBaselineFeatures) {
    double v = kNaN;
    try {
      v = eval_baseline(name, ctx);
    } catch (const DegenerateInput&) {
    }
    fv.values.emplace_back(name, v);
  }
  return fv;
}

FeatureVector extract_features(const Window& window,
                               const std::vector<std::string>& which,
                               const SurpriseSpec& surprise) {
  FeatureVector fv;

  std::vector<double> z;
  bool z_ok = true;
  try {
    z = zscore(window.samples);
  } catch (const DegenerateInput&) {
    z_ok = false;
  }

  BaselineContext ctx{z, {}, {}};
  size_t n_missing = 0;
  for (const auto& name : which) {
    double v = kNaN;
    if (z_ok) {
      try {
        v = eval_feature(name, ctx, surprise);
      } catch (const DegenerateInput&) {
      }
    }
    if (!std::isfinite(v)) {
      v = kNaN;
      ++n_missing;
      if (is_selected_feature(name)) fv.usable = false;
    }
    fv.values.emplace_back(name, v);
  }
  if (!which.empty() && n_missing == which.size()) fv.usable = false;
  return fv;
}

}  // namespace quakescan
