#include "quakescan/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "quakescan/errors.hpp"
#include "quakescan/stats.hpp"

namespace quakescan {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(std::string("failed to parse ") + what + " '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream iss(s);
  while (std::getline(iss, cur, delim)) out.push_back(cur);
  if (!s.empty() && s.back() == delim) out.push_back("");
  return out;
}

}  // namespace

std::vector<double> FeatureMatrix::column(size_t j) const {
  std::vector<double> out(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) out[i] = rows[i][j];
  return out;
}

size_t FeatureMatrix::feature_index(const std::string& name) const {
  for (size_t j = 0; j < feature_names.size(); ++j) {
    if (feature_names[j] == name) return j;
  }
  throw ConfigError("missing feature '" + name + "'");
}

FeatureMatrix FeatureMatrix::select_features(
    const std::vector<std::string>& names) const {
  FeatureMatrix out;
  out.feature_names = names;
  out.window_starts = window_starts;
  out.labels = labels;
  std::vector<size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(feature_index(n));
  out.rows.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> r;
    r.reserve(idx.size());
    for (size_t j : idx) r.push_back(row[j]);
    out.rows.push_back(std::move(r));
  }
  if (normalized()) {
    for (size_t j : idx) out.norm_params.push_back(norm_params[j]);
  }
  return out;
}

FeatureMatrix matrix_from_windows(const std::vector<double>& starts,
                                  const std::vector<Label>& labels,
                                  const std::vector<FeatureVector>& vectors,
                                  MatrixBuildReport* report) {
  if (starts.size() != labels.size() || starts.size() != vectors.size()) {
    throw ConfigError("matrix build: input sizes disagree");
  }
  MatrixBuildReport rep;
  rep.n_rows_in = vectors.size();

  FeatureMatrix m;
  for (size_t i = 0; i < vectors.size(); ++i) {
    if (!vectors[i].usable) {
      ++rep.n_rows_dropped;
      continue;
    }
    if (m.feature_names.empty()) {
      for (const auto& [n, v] : vectors[i].values) m.feature_names.push_back(n);
    }
    std::vector<double> row;
    row.reserve(vectors[i].values.size());
    for (const auto& [n, v] : vectors[i].values) row.push_back(v);
    if (row.size() != m.feature_names.size()) {
      throw DataError("matrix build: inconsistent feature vectors");
    }
    m.window_starts.push_back(starts[i]);
    m.labels.push_back(labels[i]);
    m.rows.push_back(std::move(row));
  }
  if (m.rows.empty()) throw DataError("no usable windows");

  // Columns that still hold non-finite values are not applicable to this
  // dataset and get removed.
  std::vector<size_t> keep;
  for (size_t j = 0; j < m.feature_names.size(); ++j) {
    bool finite = true;
    for (const auto& row : m.rows) {
      if (!std::isfinite(row[j])) {
        finite = false;
        break;
      }
    }
    if (finite) {
      keep.push_back(j);
    } else {
      rep.dropped_columns.push_back(m.feature_names[j]);
    }
  }
  if (keep.size() != m.feature_names.size()) {
    std::vector<std::string> names;
    for (size_t j : keep) names.push_back(m.feature_names[j]);
    m = m.select_features(names);
  }
  if (report) *report = rep;
  return m;
}

void save_matrix_csv(const FeatureMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write matrix file: " + path);
  out << "window_start,label";
  for (const auto& n : m.feature_names) out << "," << n;
  out << "\n";
  for (size_t i = 0; i < m.n_rows(); ++i) {
    out << format_double(m.window_starts[i]) << "," << to_string(m.labels[i]);
    for (double v : m.rows[i]) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

FeatureMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty matrix file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "window_start" || header[1] != "label") {
    throw DataError("malformed matrix header in " + path);
  }
  FeatureMatrix m;
  m.feature_names.assign(header.begin() + 2, header.end());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw DataError("malformed matrix row '" + line + "'");
    }
    m.window_starts.push_back(parse_double(fields[0], "window_start"));
    m.labels.push_back(label_from_string(fields[1]));
    std::vector<double> row;
    row.reserve(m.feature_names.size());
    for (size_t j = 2; j < fields.size(); ++j) {
      row.push_back(parse_double(fields[j], "feature value"));
    }
    m.rows.push_back(std::move(row));
  }
  if (m.rows.empty()) throw DataError("matrix file has no rows: " + path);
  return m;
}

double robust_sigmoid(double x, double median, double iqr) {
  if (!(iqr > 0.0)) throw DegenerateInput("robust sigmoid: zero iqr");
  return 1.0 / (1.0 + std::exp(-(x - median) / (iqr / 1.35)));
}

FeatureMatrix normalize_matrix(const FeatureMatrix& m, NormalizeReport* report) {
  if (m.normalized()) throw ConfigError("double normalization");
  if (m.n_rows() == 0) throw DataError("normalize: empty matrix");

  NormalizeReport rep;
  std::vector<std::string> kept_names;
  std::vector<NormParams> params;
  std::vector<size_t> kept_idx;

  for (size_t j = 0; j < m.n_features(); ++j) {
    auto col = m.column(j);
    std::sort(col.begin(), col.end());
    NormParams p;
    p.median = stats::quantile_sorted(col, 0.5);
    p.iqr = stats::quantile_sorted(col, 0.75) - stats::quantile_sorted(col, 0.25);
    if (p.iqr <= 1e-12 * std::max(1.0, std::abs(p.median))) {
      rep.dropped_constant.push_back(m.feature_names[j]);
      continue;
    }
    kept_names.push_back(m.feature_names[j]);
    params.push_back(p);
    kept_idx.push_back(j);
  }
  if (kept_names.empty()) throw DataError("normalize: no informative features");

  FeatureMatrix out;
  out.feature_names = kept_names;
  out.window_starts = m.window_starts;
  out.labels = m.labels;
  out.norm_params = params;
  out.rows.reserve(m.n_rows());
  for (const auto& row : m.rows) {
    std::vector<double> r;
    r.reserve(kept_idx.size());
    for (size_t k = 0; k < kept_idx.size(); ++k) {
      r.push_back(robust_sigmoid(row[kept_idx[k]], params[k].median, params[k].iqr));
    }
    out.rows.push_back(std::move(r));
  }
  if (report) *report = rep;
  return out;
}

FeatureMatrix apply_normalization(const FeatureMatrix& m,
                                  const std::vector<NormParams>& params) {
  if (m.normalized()) throw ConfigError("double normalization");
  if (params.size() != m.n_features()) {
    throw ConfigError("normalization parameter count mismatch");
  }
  FeatureMatrix out = m;
  out.norm_params = params;
  for (auto& row : out.rows) {
    for (size_t j = 0; j < row.size(); ++j) {
      row[j] = robust_sigmoid(row[j], params[j].median, params[j].iqr);
    }
  }
  return out;
}

RankedFeature rank_single_feature(std::span<const double> values,
                                  std::span<const Label> labels,
                                  const std::string& name) {
  if (values.size() != labels.size()) throw ConfigError("rank: size mismatch");
  const size_t n = values.size();
  size_t n_event = 0, n_noise = 0;
  for (Label l : labels) {
    if (l == Label::event) ++n_event;
    else if (l == Label::noise) ++n_noise;
    else throw DataError("rank: unlabeled row");
  }
  if (n_event == 0 || n_noise == 0) throw DataError("rank: one class empty");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });

  // Candidate thresholds: below the minimum, midpoints between consecutive
  // distinct values, above the maximum. Walking them in ascending order with
  // running class counts below the threshold gives both polarities at once.
  RankedFeature best;
  best.name = name;
  best.single_feature_accuracy = -1.0;

  size_t events_below = 0, noise_below = 0;
  size_t i = 0;
  const double lo_sentinel = values[order[0]] - 1.0;
  const double hi_sentinel = values[order[n - 1]] + 1.0;

  auto consider = [&](double threshold) {
    const size_t correct_ge = n_event - events_below + noise_below;
    const double acc_ge =
        static_cast<double>(correct_ge) / static_cast<double>(n);
    const double acc_lt =
        static_cast<double>(n - correct_ge) / static_cast<double>(n);
    if (acc_ge > best.single_feature_accuracy) {
      best.single_feature_accuracy = acc_ge;
      best.threshold = threshold;
      best.polarity = Polarity::ge;
    }
    if (acc_lt > best.single_feature_accuracy) {
      best.single_feature_accuracy = acc_lt;
      best.threshold = threshold;
      best.polarity = Polarity::lt;
    }
  };

  consider(lo_sentinel);
  while (i < n) {
    const double v = values[order[i]];
    while (i < n && values[order[i]] == v) {
      if (labels[order[i]] == Label::event) ++events_below;
      else ++noise_below;
      ++i;
    }
    if (i < n) {
      consider((v + values[order[i]]) / 2.0);
    }
  }
  consider(hi_sentinel);
  return best;
}

std::vector<RankedFeature> rank_features(const FeatureMatrix& m) {
  std::vector<RankedFeature> ranking;
  ranking.reserve(m.n_features());
  for (size_t j = 0; j < m.n_features(); ++j) {
    ranking.push_back(rank_single_feature(m.column(j), m.labels, m.feature_names[j]));
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const RankedFeature& a, const RankedFeature& b) {
                     return a.single_feature_accuracy > b.single_feature_accuracy;
                   });
  return ranking;
}

std::vector<std::string> prune_correlated(const FeatureMatrix& m,
                                          const std::vector<RankedFeature>& ranking,
                                          size_t top_k, double r_max) {
  if (!(r_max > 0.0) || !(r_max < 1.0)) {
    throw ConfigError("r_max must be in (0, 1)");
  }
  std::vector<std::string> kept;
  std::vector<std::vector<double>> kept_cols;
  const size_t limit = std::min(top_k, ranking.size());
  for (size_t r = 0; r < limit; ++r) {
    auto col = m.column(m.feature_index(ranking[r].name));
    bool ok = true;
    for (const auto& kc : kept_cols) {
      if (std::abs(stats::pearson(col, kc)) > r_max) {
        ok = false;
        break;
      }
    }
    if (ok) {
      kept.push_back(ranking[r].name);
      kept_cols.push_back(std::move(col));
    }
  }
  return kept;
}

}  // namespace quakescan
