#pragma once

#include <span>
#include <string>
#include <vector>

#include "quakescan/features.hpp"
#include "quakescan/trace.hpp"

namespace quakescan {

struct NormParams {
  double median = 0.0;
  double iqr = 0.0;
};

// Windows-by-features value matrix with its labels. norm_params is non-empty
// exactly when the matrix has been through normalize_matrix (or had training
// parameters applied).
struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::vector<double> window_starts;
  std::vector<Label> labels;
  std::vector<std::vector<double>> rows;
  std::vector<NormParams> norm_params;

  bool normalized() const { return !norm_params.empty(); }
  size_t n_rows() const { return rows.size(); }
  size_t n_features() const { return feature_names.size(); }

  std::vector<double> column(size_t j) const;
  size_t feature_index(const std::string& name) const;  // throws if absent

  // Sub-matrix restricted to the named features, in the given order.
  FeatureMatrix select_features(const std::vector<std::string>& names) const;
};

struct MatrixBuildReport {
  size_t n_rows_in = 0;
  size_t n_rows_dropped = 0;
  std::vector<std::string> dropped_columns;  // contained non-finite values
};

// Assembles a matrix from per-window feature vectors: unusable rows are
// dropped first, then any column still containing a non-finite value.
FeatureMatrix matrix_from_windows(const std::vector<double>& starts,
                                  const std::vector<Label>& labels,
                                  const std::vector<FeatureVector>& vectors,
                                  MatrixBuildReport* report = nullptr);

// CSV layout: window_start,label,<feature names...>.
void save_matrix_csv(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_matrix_csv(const std::string& path);

// Outlier-robust sigmoidal transform centered on the median and scaled by
// iqr/1.35 (the IQR of a normal distribution is 1.35 sigma).
double robust_sigmoid(double x, double median, double iqr);

struct NormalizeReport {
  std::vector<std::string> dropped_constant;
};

// Per-column median/IQR fit plus columnwise robust sigmoid. Columns whose
// IQR is zero (to within 1e-12 relative) carry no information and are
// dropped.
FeatureMatrix normalize_matrix(const FeatureMatrix& m,
                               NormalizeReport* report = nullptr);

// Applies existing per-feature parameters (inference path; never refits).
FeatureMatrix apply_normalization(const FeatureMatrix& m,
                                  const std::vector<NormParams>& params);

enum class Polarity { ge, lt };

struct RankedFeature {
  std::string name;
  double single_feature_accuracy = 0.0;
  double threshold = 0.0;
  Polarity polarity = Polarity::ge;
};

// Optimal 1-D threshold classifier for one feature: scans the midpoints of
// sorted distinct values (plus below-min / above-max sentinels) in both
// polarities. Ties go to the smaller threshold, then to polarity >=.
RankedFeature rank_single_feature(std::span<const double> values,
                                  std::span<const Label> labels,
                                  const std::string& name);

// All columns ranked by single-feature accuracy, descending; ties keep
// column order.
std::vector<RankedFeature> rank_features(const FeatureMatrix& m);

// Greedy pass over the top_k ranked features: keep a feature iff its |Pearson
// r| with every already-kept feature is <= r_max. Returns names in rank order.
std::vector<std::string> prune_correlated(const FeatureMatrix& m,
                                          const std::vector<RankedFeature>& ranking,
                                          size_t top_k, double r_max);

}  // namespace quakescan
