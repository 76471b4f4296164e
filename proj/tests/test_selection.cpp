#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "quakescan/errors.hpp"
#include "quakescan/rng.hpp"
#include "quakescan/selection.hpp"
#include "quakescan/stats.hpp"
#include "support.hpp"

using namespace quakescan;

namespace {

FeatureMatrix small_matrix(std::vector<std::string> names,
                           std::vector<std::vector<double>> rows,
                           std::vector<Label> labels) {
  FeatureMatrix m;
  m.feature_names = std::move(names);
  m.rows = std::move(rows);
  m.labels = std::move(labels);
  m.window_starts.assign(m.rows.size(), 0.0);
  return m;
}

std::vector<Label> random_labels(Rng& rng, size_t n) {
  std::vector<Label> labels(n);
  bool has_event = false, has_noise = false;
  for (auto& l : labels) {
    l = rng.next_unit() < 0.45 ? Label::event : Label::noise;
    (l == Label::event ? has_event : has_noise) = true;
  }
  if (!has_event) labels[0] = Label::event;
  if (!has_noise) labels[1] = Label::noise;
  return labels;
}

}  // namespace

TEST_CASE("robust_sigmoid") {
  CHECK(robust_sigmoid(2.5, 2.5, 1.0) == 0.5);
  const double iqr = 2.7;
  const double at_one_scale = robust_sigmoid(10.0 + iqr / 1.35, 10.0, iqr);
  CHECK(at_one_scale == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));

  SUBCASE("monotone") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const double a = rng.next_in(-50.0, 50.0);
      const double b = a + rng.next_in(1e-9, 10.0);
      CHECK(robust_sigmoid(a, 1.0, 2.0) < robust_sigmoid(b, 1.0, 2.0));
    }
  }
  SUBCASE("zero iqr is rejected") {
    CHECK_THROWS_AS(robust_sigmoid(1.0, 0.0, 0.0), DegenerateInput);
  }
}

TEST_CASE("normalize_matrix") {
  SUBCASE("hand-computed median/iqr on [1,2,3,100]") {
    auto m = small_matrix({"f"}, {{1}, {2}, {3}, {100}},
                          {Label::event, Label::noise, Label::event, Label::noise});
    const auto norm = normalize_matrix(m);
    REQUIRE(norm.norm_params.size() == 1);
    // linear-interpolation quantiles: q25 = 1.75, q75 = 27.25
    CHECK(norm.norm_params[0].median == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(norm.norm_params[0].iqr == doctest::Approx(25.5).epsilon(1e-12));
    for (const auto& row : norm.rows) {
      CHECK(row[0] > 0.0);
      CHECK(row[0] < 1.0);
    }
    // the outlier is tamed, not saturated to 1
    CHECK(norm.rows[3][0] == doctest::Approx(robust_sigmoid(100.0, 2.5, 25.5)));
    // median maps to 0.5
    CHECK(robust_sigmoid(2.5, norm.norm_params[0].median, norm.norm_params[0].iqr) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("double normalization is rejected") {
    auto m = small_matrix({"f"}, {{1}, {2}, {3}, {4}},
                          {Label::event, Label::noise, Label::event, Label::noise});
    const auto norm = normalize_matrix(m);
    CHECK_THROWS_AS(normalize_matrix(norm), ConfigError);
  }

  SUBCASE("constant and near-constant columns are dropped") {
    auto m = small_matrix(
        {"const", "jitter", "ok"},
        {{5.0, 1.0, 0.1}, {5.0, 1.0 + 1e-15, 0.9}, {5.0, 1.0 - 1e-15, 0.4},
         {5.0, 1.0, 0.7}},
        {Label::event, Label::noise, Label::event, Label::noise});
    NormalizeReport report;
    const auto norm = normalize_matrix(m, &report);
    CHECK(norm.feature_names == std::vector<std::string>{"ok"});
    REQUIRE(report.dropped_constant.size() == 2);
    CHECK(report.dropped_constant[0] == "const");
    CHECK(report.dropped_constant[1] == "jitter");
  }
}

TEST_CASE("rank_single_feature") {
  SUBCASE("perfect separation scores 1.0") {
    const std::vector<double> v{0.1, 0.2, 0.3, 5.0, 6.0, 7.0};
    const std::vector<Label> l{Label::noise, Label::noise, Label::noise,
                               Label::event, Label::event, Label::event};
    const auto r = rank_single_feature(v, l, "f");
    CHECK(r.single_feature_accuracy == 1.0);
    CHECK(r.polarity == Polarity::ge);
    CHECK(r.threshold > 0.3);
    CHECK(r.threshold < 5.0);
  }
  SUBCASE("identical distributions score the majority fraction") {
    const std::vector<double> v{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    std::vector<Label> l(10, Label::noise);
    l[0] = l[1] = l[2] = l[3] = Label::event;  // 40% events
    const auto r = rank_single_feature(v, l, "f");
    CHECK(r.single_feature_accuracy == doctest::Approx(0.6));
  }
  SUBCASE("one empty class is an error") {
    CHECK_THROWS_AS(rank_single_feature(std::vector<double>{1, 2},
                                        std::vector<Label>{Label::event, Label::event},
                                        "f"),
                    DataError);
  }
  SUBCASE("matches the exhaustive oracle on random instances") {
    Rng rng(2718);
    for (int rep = 0; rep < 100; ++rep) {
      const size_t n = 50;
      std::vector<double> v(n);
      for (auto& x : v) x = std::floor(rng.next_in(-5.0, 5.0) * 4.0) / 4.0;
      const auto labels = random_labels(rng, n);
      const auto got = rank_single_feature(v, labels, "f");
      const auto want = oracle::best_threshold(v, labels);
      CHECK(got.single_feature_accuracy == doctest::Approx(want.accuracy));
    }
  }
  SUBCASE("accuracy invariant under strictly monotone transforms") {
    Rng rng(31);
    std::vector<double> v(80);
    for (auto& x : v) x = rng.next_in(-2.0, 2.0);
    const auto labels = random_labels(rng, v.size());
    const double base = rank_single_feature(v, labels, "f").single_feature_accuracy;

    auto expv = v;
    for (auto& x : expv) x = std::exp(x);
    CHECK(rank_single_feature(expv, labels, "f").single_feature_accuracy == base);

    auto atanv = v;
    for (auto& x : atanv) x = std::atan(3.0 * x);
    CHECK(rank_single_feature(atanv, labels, "f").single_feature_accuracy == base);
  }
}

TEST_CASE("prune_correlated") {
  Rng rng(55);
  const size_t n = 120;

  SUBCASE("duplicated column is pruned") {
    std::vector<double> base(n);
    for (auto& x : base) x = rng.next_gaussian();
    std::vector<double> other(n);
    for (auto& x : other) x = rng.next_gaussian();
    FeatureMatrix m = small_matrix({"a", "dup", "b"}, {}, {});
    for (size_t i = 0; i < n; ++i) {
      m.rows.push_back({base[i], base[i], other[i]});
      m.labels.push_back(i % 2 == 0 ? Label::event : Label::noise);
      m.window_starts.push_back(0.0);
    }
    std::vector<RankedFeature> ranking{{"a", 0.9, 0, Polarity::ge},
                                       {"dup", 0.9, 0, Polarity::ge},
                                       {"b", 0.8, 0, Polarity::ge}};
    const auto kept = prune_correlated(m, ranking, 50, 0.8);
    CHECK(kept == std::vector<std::string>{"a", "b"});
  }

  SUBCASE("mutually uncorrelated features all survive") {
    FeatureMatrix m = small_matrix({"x", "y", "z"}, {}, {});
    Rng g(7);
    for (size_t i = 0; i < n; ++i) {
      m.rows.push_back({g.next_gaussian(), g.next_gaussian(), g.next_gaussian()});
      m.labels.push_back(i % 2 == 0 ? Label::event : Label::noise);
      m.window_starts.push_back(0.0);
    }
    std::vector<RankedFeature> ranking{{"x", 0.9, 0, Polarity::ge},
                                       {"y", 0.85, 0, Polarity::ge},
                                       {"z", 0.8, 0, Polarity::ge}};
    CHECK(prune_correlated(m, ranking, 50, 0.8).size() == 3);
  }

  SUBCASE("matches the greedy oracle and respects r_max, seeded instances") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
      Rng g(1000 + seed);
      const size_t n_feat = 20;
      // correlated family: mixtures of a few latent factors
      std::vector<std::vector<double>> latent(4, std::vector<double>(n));
      for (auto& c : latent) {
        for (auto& x : c) x = g.next_gaussian();
      }
      FeatureMatrix m;
      for (size_t j = 0; j < n_feat; ++j) {
        m.feature_names.push_back("f" + std::to_string(j));
      }
      std::vector<std::vector<double>> cols(n_feat, std::vector<double>(n));
      for (size_t j = 0; j < n_feat; ++j) {
        const size_t pick = g.next_below(4);
        const double mix = g.next_unit();
        for (size_t i = 0; i < n; ++i) {
          cols[j][i] = mix * latent[pick][i] + (1.0 - mix) * g.next_gaussian();
        }
      }
      for (size_t i = 0; i < n; ++i) {
        std::vector<double> row(n_feat);
        for (size_t j = 0; j < n_feat; ++j) row[j] = cols[j][i];
        m.rows.push_back(std::move(row));
        m.labels.push_back(i % 2 == 0 ? Label::event : Label::noise);
        m.window_starts.push_back(0.0);
      }
      std::vector<RankedFeature> ranking;
      for (size_t j = 0; j < n_feat; ++j) {
        ranking.push_back({m.feature_names[j], 1.0 - 0.01 * static_cast<double>(j),
                           0.0, Polarity::ge});
      }
      const double r_max = 0.6;
      const auto kept = prune_correlated(m, ranking, n_feat, r_max);

      const auto oracle_kept = oracle::greedy_prune(cols, r_max);
      REQUIRE(kept.size() == oracle_kept.size());
      for (size_t i = 0; i < kept.size(); ++i) {
        CHECK(kept[i] == m.feature_names[oracle_kept[i]]);
      }
      // no kept pair correlates above r_max
      for (size_t a = 0; a < kept.size(); ++a) {
        for (size_t b = a + 1; b < kept.size(); ++b) {
          const auto ca = m.column(m.feature_index(kept[a]));
          const auto cb = m.column(m.feature_index(kept[b]));
          CHECK(std::abs(stats::pearson(ca, cb)) <= r_max);
        }
      }
    }
  }

  SUBCASE("bad r_max is a config error") {
    FeatureMatrix m = small_matrix({"a"}, {{1.0}}, {Label::event});
    CHECK_THROWS_AS(prune_correlated(m, {}, 10, 1.5), ConfigError);
  }
}

TEST_CASE("matrix csv round-trip") {
  qstest::TempDir dir("matrix");
  FeatureMatrix m = small_matrix(
      {"a", "b"}, {{0.125, -3.5}, {2.25, 1e-9}, {7.5, 0.0}, {1.0, 2.0}},
      {Label::event, Label::noise, Label::unlabeled, Label::event});
  m.window_starts = {0.0, 20.0, 40.0, 60.0};
  const std::string path = dir.file("m.csv");
  save_matrix_csv(m, path);
  const auto back = load_matrix_csv(path);
  CHECK(back.feature_names == m.feature_names);
  CHECK(back.window_starts == m.window_starts);
  CHECK(back.labels == m.labels);
  REQUIRE(back.rows.size() == m.rows.size());
  for (size_t i = 0; i < m.rows.size(); ++i) {
    for (size_t j = 0; j < m.rows[i].size(); ++j) {
      CHECK(back.rows[i][j] == m.rows[i][j]);
    }
  }
}

TEST_CASE("matrix_from_windows drops unusable rows and non-finite columns") {
  std::vector<FeatureVector> vectors(3);
  vectors[0].values = {{"a", 1.0}, {"b", 2.0}};
  vectors[1].values = {{"a", 3.0}, {"b", std::nan("")}};
  vectors[2].values = {{"a", 5.0}, {"b", 6.0}};
  vectors[2].usable = false;

  MatrixBuildReport report;
  const auto m = matrix_from_windows({0.0, 20.0, 40.0},
                                     {Label::event, Label::noise, Label::noise},
                                     vectors, &report);
  CHECK(m.n_rows() == 2);
  CHECK(m.feature_names == std::vector<std::string>{"a"});
  CHECK(report.n_rows_dropped == 1);
  REQUIRE(report.dropped_columns.size() == 1);
  CHECK(report.dropped_columns[0] == "b");

  SUBCASE("all rows unusable is a data error") {
    std::vector<FeatureVector> bad(2);
    bad[0].usable = bad[1].usable = false;
    CHECK_THROWS_AS(matrix_from_windows({0.0, 1.0}, {Label::event, Label::noise},
                                        bad, nullptr),
                    DataError);
  }
}
