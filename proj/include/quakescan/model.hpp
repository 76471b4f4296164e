#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quakescan/selection.hpp"

namespace quakescan {

struct Hyper {
  double learning_rate = 0.5;
  int max_iters = 5000;
  double tol = 1e-8;  // gradient infinity-norm stop
  double l2 = 1e-6;   // weight penalty, bias excluded
};

struct SplitSpec {
  double train_fraction = 0.7;
  bool stratified = true;
  uint64_t seed = 0;
};

struct TrainDiagnostics {
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_history;  // not serialized
};

// Four weights plus a bias, bound to named features and the normalization
// parameters fitted on the training split.
struct LogRegModel {
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<NormParams> norm_params;
  double trained_at = 0.0;  // epoch seconds, injected by the caller
  Hyper hyper;
  TrainDiagnostics diagnostics;
};

// Row-disjoint train/test partition; stratified per class when requested;
// deterministic under the seed. Requires at least 10 rows per class.
std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& m,
                                              const SplitSpec& spec);

// sigma(w.x + b) on an already-normalized feature row.
double predict_proba(const LogRegModel& model, std::span<const double> features);

// Looks the model's features up by name; throws on a missing feature or an
// unusable vector. Values must already be normalized with the model params.
double predict_proba(const LogRegModel& model, const FeatureVector& features);

// Applies the model's stored normalization to raw feature values and
// predicts. The inference path never refits normalization.
double predict_raw(const LogRegModel& model, const FeatureVector& raw);

// Full-batch gradient descent on mean NLL + l2*||w||^2/2 from zero
// initialization. Rows are accumulated in a canonical order so the result is
// invariant to row shuffling, bit for bit.
LogRegModel train(const FeatureMatrix& train_matrix, const Hyper& hyper);

// Objective internals, exposed for verification.
double logreg_loss(const FeatureMatrix& m, std::span<const double> w, double bias,
                   double l2);
void logreg_gradient(const FeatureMatrix& m, std::span<const double> w, double bias,
                     double l2, std::span<double> grad_w, double& grad_bias);

struct EvalResult {
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Classifies event iff probability >= threshold (ties are events).
EvalResult evaluate(const LogRegModel& model, const FeatureMatrix& data,
                    double threshold = 0.5);

std::string model_to_json(const LogRegModel& model);
LogRegModel model_from_json(const std::string& text);
void save_model(const LogRegModel& model, const std::string& path);
LogRegModel load_model(const std::string& path);

}  // namespace quakescan
