#include "quakescan/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "quakescan/errors.hpp"
#include "quakescan/rng.hpp"

namespace quakescan {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) - y*z, evaluated without overflow.
double nll_term(double z, double y) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

double label_value(Label l) {
  if (l == Label::event) return 1.0;
  if (l == Label::noise) return 0.0;
  throw DataError("unlabeled row in training data");
}

// Canonical row order: lexicographic by feature values then label. Gradient
// and loss sums taken in this order do not depend on how the caller shuffled
// the rows.
std::vector<size_t> canonical_order(const FeatureMatrix& m) {
  std::vector<size_t> idx(m.n_rows());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    const auto& ra = m.rows[a];
    const auto& rb = m.rows[b];
    for (size_t j = 0; j < ra.size(); ++j) {
      if (ra[j] != rb[j]) return ra[j] < rb[j];
    }
    return static_cast<int>(m.labels[a]) < static_cast<int>(m.labels[b]);
  });
  return idx;
}

}  // namespace

std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& m,
                                              const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0) || !(spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must be in (0, 1)");
  }
  size_t n_event = 0, n_noise = 0;
  for (Label l : m.labels) {
    if (l == Label::event) ++n_event;
    else if (l == Label::noise) ++n_noise;
    else throw DataError("split: unlabeled row");
  }
  if (n_event < 10 || n_noise < 10) throw DataError("class too small");

  Rng rng(spec.seed);
  std::vector<size_t> train_idx, test_idx;

  auto take = [&](std::vector<size_t>& pool) {
    rng.shuffle(pool);
    const size_t n_train = static_cast<size_t>(
        std::llround(spec.train_fraction * static_cast<double>(pool.size())));
    for (size_t i = 0; i < pool.size(); ++i) {
      (i < n_train ? train_idx : test_idx).push_back(pool[i]);
    }
  };

  if (spec.stratified) {
    std::vector<size_t> events, noises;
    for (size_t i = 0; i < m.n_rows(); ++i) {
      (m.labels[i] == Label::event ? events : noises).push_back(i);
    }
    take(events);
    take(noises);
  } else {
    std::vector<size_t> all(m.n_rows());
    std::iota(all.begin(), all.end(), size_t{0});
    take(all);
  }

  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto build = [&](const std::vector<size_t>& idx) {
    FeatureMatrix out;
    out.feature_names = m.feature_names;
    out.norm_params = m.norm_params;
    for (size_t i : idx) {
      out.window_starts.push_back(m.window_starts[i]);
      out.labels.push_back(m.labels[i]);
      out.rows.push_back(m.rows[i]);
    }
    return out;
  };
  return {build(train_idx), build(test_idx)};
}

double predict_proba(const LogRegModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size()) {
    throw ConfigError("feature count does not match model");
  }
  double z = model.bias;
  for (size_t j = 0; j < features.size(); ++j) z += model.weights[j] * features[j];
  return sigmoid(z);
}

double predict_proba(const LogRegModel& model, const FeatureVector& features) {
  if (!features.usable) throw DataError("unusable feature vector");
  std::vector<double> x;
  x.reserve(model.feature_names.size());
  for (const auto& name : model.feature_names) {
    const double v = features.get(name);
    if (!std::isfinite(v)) throw DataError("missing feature '" + name + "'");
    x.push_back(v);
  }
  return predict_proba(model, x);
}

double predict_raw(const LogRegModel& model, const FeatureVector& raw) {
  if (!raw.usable) throw DataError("unusable feature vector");
  std::vector<double> x;
  x.reserve(model.feature_names.size());
  for (size_t j = 0; j < model.feature_names.size(); ++j) {
    const double v = raw.get(model.feature_names[j]);
    if (!std::isfinite(v)) {
      throw DataError("missing feature '" + model.feature_names[j] + "'");
    }
    x.push_back(robust_sigmoid(v, model.norm_params[j].median,
                               model.norm_params[j].iqr));
  }
  return predict_proba(model, x);
}

double logreg_loss(const FeatureMatrix& m, std::span<const double> w, double bias,
                   double l2) {
  const auto order = canonical_order(m);
  double loss = 0.0;
  for (size_t i : order) {
    double z = bias;
    for (size_t j = 0; j < w.size(); ++j) z += w[j] * m.rows[i][j];
    loss += nll_term(z, label_value(m.labels[i]));
  }
  loss /= static_cast<double>(m.n_rows());
  double wsq = 0.0;
  for (double v : w) wsq += v * v;
  return loss + 0.5 * l2 * wsq;
}

void logreg_gradient(const FeatureMatrix& m, std::span<const double> w, double bias,
                     double l2, std::span<double> grad_w, double& grad_bias) {
  const auto order = canonical_order(m);
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_bias = 0.0;
  for (size_t i : order) {
    double z = bias;
    for (size_t j = 0; j < w.size(); ++j) z += w[j] * m.rows[i][j];
    const double err = sigmoid(z) - label_value(m.labels[i]);
    for (size_t j = 0; j < w.size(); ++j) grad_w[j] += err * m.rows[i][j];
    grad_bias += err;
  }
  const double inv_n = 1.0 / static_cast<double>(m.n_rows());
  for (size_t j = 0; j < w.size(); ++j) grad_w[j] = grad_w[j] * inv_n + l2 * w[j];
  grad_bias *= inv_n;
}

LogRegModel train(const FeatureMatrix& train_matrix, const Hyper& hyper) {
  if (!train_matrix.normalized()) {
    throw ConfigError("train requires a normalized matrix");
  }
  if (train_matrix.n_features() != 4) {
    throw ConfigError("model takes exactly 4 features");
  }
  if (train_matrix.n_rows() == 0) throw DataError("empty training matrix");
  size_t n_event = 0, n_noise = 0;
  for (Label l : train_matrix.labels) {
    if (l == Label::event) ++n_event;
    else if (l == Label::noise) ++n_noise;
    else throw DataError("unlabeled row in training data");
  }
  if (n_event == 0 || n_noise == 0) throw DataError("both classes required");

  LogRegModel model;
  model.feature_names = train_matrix.feature_names;
  model.norm_params = train_matrix.norm_params;
  model.hyper = hyper;
  model.weights.assign(4, 0.0);
  model.bias = 0.0;

  std::vector<double> grad(4, 0.0);
  double grad_bias = 0.0;
  int iter = 0;
  for (; iter < hyper.max_iters; ++iter) {
    const double loss =
        logreg_loss(train_matrix, model.weights, model.bias, hyper.l2);
    if (!std::isfinite(loss)) throw ConvergenceError("non-finite loss");
    model.diagnostics.loss_history.push_back(loss);

    logreg_gradient(train_matrix, model.weights, model.bias, hyper.l2, grad,
                    grad_bias);
    double ginf = std::abs(grad_bias);
    for (double g : grad) ginf = std::max(ginf, std::abs(g));
    if (ginf < hyper.tol) {
      model.diagnostics.converged = true;
      break;
    }
    for (size_t j = 0; j < 4; ++j) {
      model.weights[j] -= hyper.learning_rate * grad[j];
    }
    model.bias -= hyper.learning_rate * grad_bias;
  }

  model.diagnostics.iterations = iter;
  model.diagnostics.final_loss =
      logreg_loss(train_matrix, model.weights, model.bias, hyper.l2);
  if (!std::isfinite(model.diagnostics.final_loss)) {
    throw ConvergenceError("non-finite loss");
  }
  return model;
}

EvalResult evaluate(const LogRegModel& model, const FeatureMatrix& data,
                    double threshold) {
  if (data.n_rows() == 0) throw DataError("empty data");
  EvalResult r;
  for (size_t i = 0; i < data.n_rows(); ++i) {
    const double p = predict_proba(model, data.rows[i]);
    const bool predicted_event = p >= threshold;
    const bool is_event = data.labels[i] == Label::event;
    if (data.labels[i] == Label::unlabeled) throw DataError("unlabeled row");
    if (predicted_event && is_event) ++r.tp;
    else if (predicted_event && !is_event) ++r.fp;
    else if (!predicted_event && !is_event) ++r.tn;
    else ++r.fn;
  }
  const double n = static_cast<double>(data.n_rows());
  r.accuracy = static_cast<double>(r.tp + r.tn) / n;
  r.precision = (r.tp + r.fp) > 0
                    ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp)
                    : 0.0;
  r.recall = (r.tp + r.fn) > 0
                 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn)
                 : 0.0;
  return r;
}

std::string model_to_json(const LogRegModel& model) {
  nlohmann::json j;
  j["feature_names"] = model.feature_names;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  nlohmann::json np = nlohmann::json::object();
  for (size_t i = 0; i < model.feature_names.size(); ++i) {
    np[model.feature_names[i]] = {{"median", model.norm_params[i].median},
                                  {"iqr", model.norm_params[i].iqr}};
  }
  j["norm_params"] = np;
  j["trained_at"] = model.trained_at;
  j["hyper"] = {{"learning_rate", model.hyper.learning_rate},
                {"max_iters", model.hyper.max_iters},
                {"tol", model.hyper.tol},
                {"l2", model.hyper.l2}};
  j["diagnostics"] = {{"final_loss", model.diagnostics.final_loss},
                      {"iterations", model.diagnostics.iterations},
                      {"converged", model.diagnostics.converged}};
  return j.dump(2) + "\n";
}

LogRegModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
  LogRegModel m;
  try {
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    for (const auto& name : m.feature_names) {
      const auto& np = j.at("norm_params").at(name);
      m.norm_params.push_back({np.at("median").get<double>(),
                               np.at("iqr").get<double>()});
    }
    m.trained_at = j.value("trained_at", 0.0);
    if (j.contains("hyper")) {
      const auto& h = j["hyper"];
      m.hyper.learning_rate = h.value("learning_rate", m.hyper.learning_rate);
      m.hyper.max_iters = h.value("max_iters", m.hyper.max_iters);
      m.hyper.tol = h.value("tol", m.hyper.tol);
      m.hyper.l2 = h.value("l2", m.hyper.l2);
    }
    if (j.contains("diagnostics")) {
      const auto& d = j["diagnostics"];
      m.diagnostics.final_loss = d.value("final_loss", 0.0);
      m.diagnostics.iterations = d.value("iterations", 0);
      m.diagnostics.converged = d.value("converged", false);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
  if (m.feature_names.size() != 4 || m.weights.size() != 4) {
    throw DataError("model json: expected exactly 4 features and 4 weights");
  }
  return m;
}

void save_model(const LogRegModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << model_to_json(model);
  if (!out) throw DataError("write failed: " + path);
}

LogRegModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace quakescan
