#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quakescan/trace.hpp"

namespace quakescan {

// Parameters of the surprise feature: coarse-grain into n_groups symbols,
// score the observed symbol against the empirical distribution of the
// previous `memory` symbols at n_eval randomly chosen positions.
struct SurpriseSpec {
  int n_groups = 5;
  int memory = 100;
  int n_eval = 500;
  uint64_t rng_seed = 0;

  void validate() const;
};

// The four selected feature identifiers, in canonical order.
extern const std::array<const char*, 4> kSelectedFeatures;

// Selected four plus the twelve baseline features.
std::vector<std::string> all_feature_names();

bool is_selected_feature(const std::string& name);

// Ordered name -> value map; missing values are stored as quiet NaN.
struct FeatureVector {
  std::vector<std::pair<std::string, double>> values;
  bool usable = true;

  bool has_finite(const std::string& name) const;
  double get(const std::string& name) const;  // NaN when absent/missing
};

// (x - mean) / sample_std; throws DegenerateInput on zero variance.
std::vector<double> zscore(std::span<const double> x);

// Normalized linear autocorrelation: mean removed, scaled by the lag-0
// autocovariance, so acf[0] == 1.
std::vector<double> acf(std::span<const double> x, size_t max_lag);

// Smallest lag k >= 1 with acf[k] <= 0; the last lag when there is none.
size_t first_zero_crossing(std::span<const double> acf_values);

// ACF first-zero lag computed lag by lag (stops at the crossing); identical
// in value to first_zero_crossing(acf(x, n-1)).
size_t acf_first_zero_of_series(std::span<const double> x);

// DN_RemovePoints_min_05_fzcacrat: drop the 50% lowest-valued samples
// (survivors keep their time order), then return
// first_zero(acf(reduced)) / first_zero(acf(original)).
double feat_removepoints(std::span<const double> zscored);

// SY_SlidingWindow_s_s_5_1: std of the five segment standard deviations,
// over the full-series std. Trailing remainder samples are discarded.
double feat_slidingwindow(std::span<const double> zscored);

// ST_MomentCorr_002_02_mean_std_sqrt_mi: signed-sqrt transform, sliding
// windows of 2% of the series with 20% overlap, histogram mutual
// information between the per-window mean and std vectors.
double feat_momentcorr(std::span<const double> zscored);

// FC_Surprise_dist_100_5_q_500_tstat: quintile coarse-graining, information
// gain of each evaluated point against its preceding memory, one-sample
// t-statistic of the gains.
double feat_surprise(std::span<const double> zscored, const SurpriseSpec& spec);

// Equal-width 2-D histogram estimate of mutual information, in bits.
double mutual_information_hist(std::span<const double> x,
                               std::span<const double> y, int bins);

// The twelve baseline features on a z-scored window.
FeatureVector baseline_features(std::span<const double> zscored);

// Z-scores the window once and evaluates each requested feature. Features
// that raise DegenerateInput record NaN; the vector is flagged unusable when
// any requested selected feature is missing (or when z-scoring itself fails).
FeatureVector extract_features(const Window& window,
                               const std::vector<std::string>& which,
                               const SurpriseSpec& surprise = {});

}  // namespace quakescan
