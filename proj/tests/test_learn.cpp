#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "learn_fixtures.hpp"
#include "motifscope/model.hpp"

using namespace motifscope;

TEST_CASE("class weights follow N/(K*n_c)") {
  std::vector<int> y(100, 0);
  std::fill(y.begin() + 90, y.end(), 1);
  const auto w = class_weights(y, 2);
  CHECK(w[0] == doctest::Approx(100.0 / 180.0));
  CHECK(w[1] == doctest::Approx(5.0));

  std::vector<int> uniform = {0, 1, 2, 0, 1, 2};
  for (double v : class_weights(uniform, 3)) CHECK(v == doctest::Approx(1.0));

  // Reference supports: Transfer vs Borrow.
  std::vector<int> skew(404130 + 1389, 0);
  std::fill(skew.begin() + 404130, skew.end(), 1);
  const auto ws = class_weights(skew, 2);
  CHECK(ws[1] / ws[0] == doctest::Approx(404130.0 / 1389.0));

  CHECK_THROWS_AS(class_weights(std::vector<int>{0, 0}, 2), InputError);
}

namespace {

std::vector<std::vector<std::size_t>> fold_class_counts(const std::vector<Fold>& folds, const std::vector<int>& y,
                                                        int k) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& f : folds) {
    std::vector<std::size_t> c(static_cast<std::size_t>(k), 0);
    for (auto i : f.test) ++c[static_cast<std::size_t>(y[i])];
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("stratified k-fold: exact divisibility and sizes") {
  std::vector<int> y(100, 0);
  std::fill(y.begin() + 80, y.end(), 1);
  const auto folds = stratified_kfold(y, 2, 10, 7);
  REQUIRE(folds.size() == 10);
  for (const auto& c : fold_class_counts(folds, y, 2)) {
    CHECK(c[0] == 8);
    CHECK(c[1] == 2);
  }
  std::vector<int> one(101, 0);
  for (const auto& f : stratified_kfold(one, 1, 10, 1)) CHECK((f.test.size() == 10 || f.test.size() == 11));
  CHECK_THROWS_AS(stratified_kfold(std::vector<int>{0, 0, 0, 1}, 2, 3, 0), InputError);
}

TEST_CASE("stratified k-fold properties over random datasets") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 9);
    const int classes = 1 + static_cast<int>(rng() % 6);
    std::vector<int> y;
    for (int c = 0; c < classes; ++c) {
      const int n = k + static_cast<int>(rng() % 60);
      for (int i = 0; i < n; ++i) y.push_back(c);
    }
    std::shuffle(y.begin(), y.end(), rng);
    const auto a = stratified_kfold(y, classes, k, rng());
    const auto b = stratified_kfold(y, classes, k, rng());
    std::vector<std::size_t> per_class(static_cast<std::size_t>(classes), 0);
    for (int v : y) ++per_class[static_cast<std::size_t>(v)];
    const auto ca = fold_class_counts(a, y, classes);
    for (const auto& row : ca) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        const auto lo = per_class[c] / static_cast<std::size_t>(k);
        CHECK(row[c] >= lo);
        CHECK(row[c] <= lo + 1);
      }
    }
    std::multiset<std::size_t> sa, sb;
    for (const auto& row : ca) sa.insert(row.begin(), row.end());
    for (const auto& row : fold_class_counts(b, y, classes)) sb.insert(row.begin(), row.end());
    CHECK(sa == sb);
    std::set<std::size_t> seen;
    for (const auto& f : a) {
      CHECK(f.train.size() + f.test.size() == y.size());
      std::set<std::size_t> tr(f.train.begin(), f.train.end());
      for (auto i : f.test) {
        CHECK(tr.count(i) == 0);
        CHECK(seen.insert(i).second);
      }
    }
    CHECK(seen.size() == y.size());
  }
}

TEST_CASE("logistic gradient matches central finite differences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = fixtures::random_counts(rng, 30, 6, 2);
    const auto rows = fixtures::all_rows(d);
    std::vector<double> y(rows.size()), s(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      y[i] = d.labels()[i] == 1 ? 1.0 : 0.0;
      s[i] = 0.5 + std::abs(nd(rng));
    }
    BinaryLogisticObjective f(d, rows, y, s, 0.7);
    std::vector<double> x(f.dimension());
    for (auto& v : x) v = 0.3 * nd(rng);
    std::vector<double> g(x.size());
    f.value_and_gradient(x, g);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double h = 1e-5;
      auto xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double fd = (f.value(xp) - f.value(xm)) / (2 * h);
      const double rel = std::abs(fd - g[j]) / std::max(1.0, std::max(std::abs(fd), std::abs(g[j])));
      CHECK(rel < 1e-5);
    }
  }
}

TEST_CASE("logistic separates a linearly separable toy set") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back({static_cast<double>(i % 20), i < 20 ? 5.0 : 0.0});
    y.push_back(i < 20 ? 0 : 1);
  }
  auto d = fixtures::dense_dataset(x, y, 2);
  const auto rows = fixtures::all_rows(d);
  LogisticParams p;
  p.l2 = 1e-3;
  const auto m = fit_logistic(d, rows, std::vector<double>{1, 1}, p);
  for (std::size_t r = 0; r < d.rows(); ++r) CHECK(m.predict(d.row_cols(r), d.row_vals(r)) == d.labels()[r]);
}

TEST_CASE("logistic on identical rows predicts the weighted majority") {
  std::vector<std::vector<double>> x(30, std::vector<double>{1.0, 2.0});
  std::vector<int> y(30, 0);
  for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = 1;
  auto d = fixtures::dense_dataset(x, y, 2);
  const auto rows = fixtures::all_rows(d);
  CHECK(fit_logistic(d, rows, std::vector<double>{1, 1}, {}).predict(d.row_cols(0), d.row_vals(0)) == 0);
  CHECK(fit_logistic(d, rows, std::vector<double>{1, 5}, {}).predict(d.row_cols(0), d.row_vals(0)) == 1);
}

TEST_CASE("trees: pure input, 1-D split, min-leaf") {
  {
    std::vector<std::vector<double>> x(25, std::vector<double>{1.0});
    for (std::size_t i = 0; i < x.size(); ++i) x[i][0] = static_cast<double>(i);
    auto d = fixtures::dense_dataset(x, std::vector<int>(25, 1), 2);
    const auto t = fit_tree(d, fixtures::all_rows(d), std::vector<double>{1, 1});
    CHECK(t.leaf_count() == 1);
    CHECK(t.nodes()[0].predicted() == 1);
  }
  {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) {
      x.push_back({static_cast<double>(i)});
      y.push_back(i < 12 ? 0 : 1);
    }
    auto d = fixtures::dense_dataset(x, y, 2);
    const auto t = fit_tree(d, fixtures::all_rows(d), std::vector<double>{1, 1});
    CHECK(t.depth() == 1);
    CHECK(t.nodes()[0].threshold == doctest::Approx(11.5));
    for (std::size_t r = 0; r < d.rows(); ++r) CHECK(t.predict(d.row_cols(r), d.row_vals(r)) == d.labels()[r]);
  }
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto d = fixtures::random_counts(rng, 400, 12, 4, 0.6);
    for (int min_leaf : {1, 5, 10, 25}) {
      TreeParams p;
      p.min_leaf = min_leaf;
      const auto t = fit_tree(d, fixtures::all_rows(d), class_weights(d.labels(), 4), p);
      for (const auto& n : t.nodes()) {
        if (n.is_leaf() && t.nodes().size() > 1) CHECK(n.samples >= min_leaf);
      }
      CHECK_NOTHROW(t.check_min_leaf());
    }
  }
}

namespace {

// Exhaustive root split: every feature, every midpoint, both children
// holding at least `min_leaf` rows; lowest cost, then lowest feature, then
// lowest threshold.
std::pair<int, double> brute_root_split(const Dataset& d, const std::vector<double>& w, int min_leaf) {
  const auto& cols = d.columns();
  const auto k = static_cast<std::size_t>(d.n_classes());
  double best = 1e300;
  std::pair<int, double> arg{-1, 0};
  auto cost_of = [&](const std::vector<double>& c) {
    double tot = 0, sq = 0;
    for (double v : c) {
      tot += v;
      sq += v * v;
    }
    return tot > 0 ? tot - sq / tot : 0.0;
  };
  std::vector<double> all(k, 0);
  for (std::size_t r = 0; r < d.rows(); ++r) all[static_cast<std::size_t>(d.labels()[r])] += w[static_cast<std::size_t>(d.labels()[r])];
  const double root = cost_of(all);
  for (std::size_t f = 0; f < d.cols(); ++f) {
    std::set<double> vals(cols[f].begin(), cols[f].end());
    std::vector<double> v(vals.begin(), vals.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double thr = v[i] + (v[i + 1] - v[i]) / 2;
      std::vector<double> l(k, 0), r(k, 0);
      int nl = 0, nr = 0;
      for (std::size_t row = 0; row < d.rows(); ++row) {
        const auto c = static_cast<std::size_t>(d.labels()[row]);
        if (cols[f][row] <= thr) {
          l[c] += w[c];
          ++nl;
        } else {
          r[c] += w[c];
          ++nr;
        }
      }
      if (nl < min_leaf || nr < min_leaf) continue;
      const double cost = cost_of(l) + cost_of(r);
      if (cost < best - 1e-9) {
        best = cost;
        arg = {static_cast<int>(f), thr};
      }
    }
  }
  if (arg.first >= 0 && !(best < root - 1e-9)) arg.first = -1;
  return arg;
}

}  // namespace

TEST_CASE("tree root split agrees with exhaustive search") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    auto d = fixtures::random_counts(rng, 60 + rng() % 100, 5, 3, 0.7);
    const auto w = class_weights(d.labels(), 3);
    const auto t = fit_tree(d, fixtures::all_rows(d), w);
    const auto [f, thr] = brute_root_split(d, w, 10);
    CHECK(t.nodes()[0].feature == f);
    if (f >= 0) CHECK(t.nodes()[0].threshold == doctest::Approx(thr));
  }
}

TEST_CASE("scaling every class weight leaves predictions unchanged") {
  std::mt19937_64 rng(23);
  auto d = fixtures::random_counts(rng, 300, 9, 3, 0.6);
  const auto rows = fixtures::all_rows(d);
  auto w = class_weights(d.labels(), 3);
  auto w4 = w;
  for (auto& v : w4) v *= 4;
  const auto t1 = fit_tree(d, rows, w);
  const auto t4 = fit_tree(d, rows, w4);
  const auto l1 = fit_logistic(d, rows, w, {});
  const auto l4 = fit_logistic(d, rows, w4, {});
  ForestParams fp;
  fp.n_trees = 5;
  const auto f1 = fit_forest(d, rows, w, fp, 9);
  const auto f4 = fit_forest(d, rows, w4, fp, 9);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    CHECK(t1.predict(d.row_cols(r), d.row_vals(r)) == t4.predict(d.row_cols(r), d.row_vals(r)));
    CHECK(l1.predict(d.row_cols(r), d.row_vals(r)) == l4.predict(d.row_cols(r), d.row_vals(r)));
    CHECK(f1.predict(d.row_cols(r), d.row_vals(r)) == f4.predict(d.row_cols(r), d.row_vals(r)));
  }
}

TEST_CASE("forest: single all-feature tree equals fit_tree on its bootstrap; deterministic") {
  std::mt19937_64 rng(29);
  auto d = fixtures::random_counts(rng, 250, 8, 3, 0.7);
  const auto rows = fixtures::all_rows(d);
  const auto w = class_weights(d.labels(), 3);
  ForestParams fp;
  fp.n_trees = 1;
  fp.max_features = -1;
  const auto f = fit_forest(d, rows, w, fp, 42);
  const auto boot = forest_bootstrap(rows, 42, 0);
  CHECK(f.trees.at(0) == fit_tree(d, boot, w));

  fp.n_trees = 12;
  fp.max_features = 0;
  const auto a = fit_forest(d, rows, w, fp, 5, 1);
  const auto b = fit_forest(d, rows, w, fp, 5, 4);
  CHECK(a.trees == b.trees);
  for (const auto& t : a.trees) CHECK_NOTHROW(t.check_min_leaf());
}

TEST_CASE("metrics: perfect and constant predictors") {
  std::vector<int> y = {0, 1, 2, 3, 0, 1, 2, 3};
  const auto perfect = confusion_matrix(y, y, 4);
  const auto m = macro_metrics(perfect);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(perfect[i][j] == (i == j ? 2 : 0));
  const auto constant = confusion_matrix(y, std::vector<int>(8, 2), 4);
  CHECK(macro_metrics(constant).recall == doctest::Approx(0.25));
  const auto rp = row_percentages(constant);
  CHECK(rp[0][2] == doctest::Approx(100.0));
  const auto cp = column_proportions(constant);
  CHECK(cp[2][2] == doctest::Approx(0.25));
}

TEST_CASE("model JSON round trip and cross-validation determinism") {
  std::mt19937_64 rng(31);
  auto d = fixtures::random_counts(rng, 200, 6, 3, 0.75);
  const auto rows = fixtures::all_rows(d);
  for (auto kind : {ModelKind::Logistic, ModelKind::Tree, ModelKind::Forest}) {
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.forest.n_trees = 4;
    cfg.seed = 3;
    const auto m = train_model(d, rows, cfg, FeatureMode::ME);
    const auto back = TrainedModel::from_json_text(m.to_json_text());
    CHECK(back.to_json_text() == m.to_json_text());
    for (std::size_t r = 0; r < d.rows(); ++r) {
      SparseRow row{{d.row_cols(r).begin(), d.row_cols(r).end()}, {d.row_vals(r).begin(), d.row_vals(r).end()}};
      CHECK(back.predict(row) == m.predict(row));
    }
    const auto folds = stratified_kfold(d.labels(), 3, 5, 1);
    const auto a = cross_validate(d, folds, cfg, FeatureMode::ME, 1);
    const auto b = cross_validate(d, folds, cfg, FeatureMode::ME, 3);
    CHECK(a.to_json_text() == b.to_json_text());
    std::int64_t total = 0;
    for (const auto& row : a.confusion)
      for (auto v : row) total += v;
    CHECK(total == static_cast<std::int64_t>(d.rows()));
    CHECK(a.mean.f1 >= 0.0);
    CHECK(a.mean.f1 <= 1.0);
  }
  CHECK_THROWS_AS(TrainedModel::from_json_text("{}"), InputError);
}
