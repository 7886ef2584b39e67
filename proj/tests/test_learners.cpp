#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "fraudseq/adaboost.hpp"
#include "fraudseq/forest.hpp"
#include "fraudseq/gridsearch.hpp"
#include "fraudseq/logreg.hpp"
#include "fraudseq/serialize.hpp"

using namespace fraudseq;
namespace fs = std::filesystem;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& y) {
  Dataset ds;
  ds.y = y;
  ds.cols.assign(rows[0].size(), std::vector<double>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) ds.cols[c][r] = rows[r][c];
  return ds;
}

// two gaussian blobs separated along feature 0; feature 1 is pure noise
Dataset blobs(std::size_t n_per_class, std::uint64_t seed, double gap = 4.0) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (std::size_t i = 0; i < n_per_class; ++i) {
    rows.push_back({rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)});
    y.push_back(0);
    rows.push_back({rng.normal(gap, 1.0), rng.normal(0.0, 1.0)});
    y.push_back(1);
  }
  return make_dataset(rows, y);
}

// y = x0 AND x1: a depth-1 stump cannot express it, a depth-2 tree can
Dataset and_dataset() {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int rep = 0; rep < 5; ++rep) {
        rows.push_back({static_cast<double>(a), static_cast<double>(b)});
        y.push_back(a & b);
      }
  return make_dataset(rows, y);
}

double accuracy(const std::vector<double>& scores, const std::vector<int>& y) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    hit += (scores[i] >= 0.5 ? 1 : 0) == y[i];
  return static_cast<double>(hit) / y.size();
}

std::string temp_path(const char* stem) {
  return (fs::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("a single tree finds the midpoint split on a separable feature") {
  const Dataset ds = make_dataset(
      {{1.0, 9.0}, {2.0, 8.0}, {3.0, 7.0}, {7.0, 1.0}, {8.0, 2.0}, {9.0, 3.0}},
      {0, 0, 0, 1, 1, 1});
  std::vector<std::uint32_t> idx = {0, 1, 2, 3, 4, 5};
  std::vector<double> w(6, 1.0);
  DecisionTree tree;
  Rng rng(1);
  tree.fit(ds, idx, w, TreeParams{}, rng);
  // one internal node, two leaves, threshold at the midpoint 5.0
  REQUIRE(tree.nodes().size() == 3);
  CHECK(tree.nodes()[0].threshold == 5.0);
  CHECK(tree.predict({2.0, 0.0}) == 0.0);
  CHECK(tree.predict({7.5, 0.0}) == 1.0);
}

TEST_CASE("min_samples_leaf blocks undersized splits") {
  const Dataset ds = make_dataset({{1.0}, {2.0}, {3.0}, {4.0}}, {0, 0, 0, 1});
  std::vector<std::uint32_t> idx = {0, 1, 2, 3};
  std::vector<double> w(4, 1.0);
  TreeParams p;
  p.min_samples_leaf = 2;
  DecisionTree tree;
  Rng rng(1);
  tree.fit(ds, idx, w, p, rng);
  // the pure split at 3.5 would leave a 1-sample leaf, so the tree must
  // settle for the 2/2 split at 2.5 and leave the right child impure
  REQUIRE(tree.nodes().size() == 3);
  CHECK(tree.nodes()[0].threshold == 2.5);
  CHECK(tree.predict({0.0}) == 0.0);
  CHECK(tree.predict({4.0}) == 0.5);
}

TEST_CASE("a depth-2 tree solves the AND function exactly") {
  const Dataset ds = and_dataset();
  std::vector<std::uint32_t> idx(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) idx[i] = static_cast<std::uint32_t>(i);
  std::vector<double> w(ds.n(), 1.0);
  TreeParams p;
  p.max_depth = 2;
  DecisionTree tree;
  Rng rng(3);
  tree.fit(ds, idx, w, p, rng);
  CHECK(tree.predict({0, 0}) == 0.0);
  CHECK(tree.predict({0, 1}) == 0.0);
  CHECK(tree.predict({1, 0}) == 0.0);
  CHECK(tree.predict({1, 1}) == 1.0);
  CHECK(tree.max_depth_reached() == 2);
}

TEST_CASE("random forest is deterministic per seed and fits training data") {
  const Dataset ds = blobs(120, 5);
  RfParams p;
  p.n_trees = 30;
  p.n_features_per_split = 1;
  p.seed = 11;
  RandomForest a, b;
  a.fit(ds, p);
  b.fit(ds, p);
  const auto sa = a.predict_proba_all(ds);
  CHECK(sa == b.predict_proba_all(ds));
  CHECK(accuracy(sa, ds.y) >= 0.99);
  p.seed = 12;
  RandomForest c;
  c.fit(ds, p);
  CHECK(sa != c.predict_proba_all(ds));
}

TEST_CASE("forest importance concentrates on the informative feature") {
  const Dataset ds = blobs(150, 7);
  RfParams p;
  p.n_trees = 40;
  p.n_features_per_split = 1;  // forces noise-feature attempts
  p.seed = 3;
  RandomForest rf;
  rf.fit(ds, p);
  const auto imp = rf.gini_importance();
  REQUIRE(imp.size() == 2);
  CHECK_THAT(imp[0] + imp[1], Catch::Matchers::WithinAbs(1.0, 1e-9));
  CHECK(imp[0] > 0.8);
}

TEST_CASE("forest rejects bad inputs") {
  const Dataset ds = blobs(10, 1);
  RfParams p;
  p.n_features_per_split = 5;  // > 2 features
  RandomForest rf;
  CHECK_THROWS_AS(rf.fit(ds, p), std::invalid_argument);
  Dataset single = ds;
  std::fill(single.y.begin(), single.y.end(), 0);
  CHECK_THROWS_AS(rf.fit(single, RfParams{10, 1, 1, 0, 0}), std::invalid_argument);
}

TEST_CASE("adaboost with deeper trees beats a single stump on AND data") {
  const Dataset ds = and_dataset();
  AdaParams stump;
  stump.n_trees = 1;
  stump.max_tree_depth = 1;
  AdaBoost weak;
  weak.fit(ds, stump);
  const double stump_acc = accuracy(weak.predict_proba_all(ds), ds.y);
  CHECK(stump_acc <= 0.8);  // a lone stump cannot express AND
  AdaParams p;
  p.n_trees = 10;
  p.max_tree_depth = 2;
  AdaBoost m;
  m.fit(ds, p);
  CHECK(accuracy(m.predict_proba_all(ds), ds.y) == 1.0);
}

TEST_CASE("adaboost stops early on a perfect round with a capped weight") {
  const Dataset ds = blobs(50, 2, 8.0);  // trivially separable
  AdaParams p;
  p.n_trees = 50;
  p.max_tree_depth = 3;
  AdaBoost m;
  m.fit(ds, p);
  CHECK(m.rounds().size() < 50);
  for (const auto& r : m.rounds()) CHECK(std::isfinite(r.alpha));
  CHECK(accuracy(m.predict_proba_all(ds), ds.y) >= 0.99);
}

TEST_CASE("adaboost scores stay in [0,1] and order by confidence") {
  const Dataset ds = blobs(80, 9, 3.0);
  AdaParams p;
  p.n_trees = 20;
  p.max_tree_depth = 2;
  AdaBoost m;
  m.fit(ds, p);
  for (double s : m.predict_proba_all(ds)) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("logistic regression separates blobs and emits calibrated-side scores") {
  const Dataset ds = blobs(200, 4);
  LogRegParams p;
  p.tolerance = 1.0;
  p.max_iter = 2000;
  LogisticRegression m;
  m.fit(ds, p);
  CHECK(accuracy(m.predict_proba_all(ds), ds.y) >= 0.97);
  // the informative feature carries the weight
  CHECK(std::abs(m.weights()[0]) > 3.0 * std::abs(m.weights()[1]));
  CHECK(m.converged());
}

TEST_CASE("l1 regularization zeroes the noise feature exactly") {
  const Dataset ds = blobs(200, 8);
  LogRegParams p;
  p.penalty = Penalty::l1;
  p.C = 0.05;
  p.tolerance = 0.5;
  p.max_iter = 4000;
  LogisticRegression m;
  m.fit(ds, p);
  CHECK(m.weights()[0] != 0.0);
  CHECK(m.weights()[1] == 0.0);
}

TEST_CASE("logreg parameter validation") {
  LogRegParams p;
  p.C = 0.0;
  LogisticRegression m;
  CHECK_THROWS_AS(m.fit(blobs(5, 1), p), std::invalid_argument);
}

TEST_CASE("grid search keeps the argmax and breaks ties toward the first cell") {
  const std::vector<int> grid = {10, 20, 30, 40};
  auto result = grid_search(grid, [](int g) {
    return g == 20 || g == 30 ? 0.9 : 0.1;  // tie between cells 1 and 2
  });
  CHECK(result.best_index == 1);
  CHECK(result.best_params() == 20);
  REQUIRE(result.cells.size() == 4);
  CHECK(result.cells[3].validation_auc == 0.1);
  CHECK_THROWS_AS(grid_search(std::vector<int>{}, [](int) { return 0.0; }),
                  std::invalid_argument);
}

TEST_CASE("reference grids have the documented shapes") {
  CHECK(rf_reference_grid(1).size() == 18);
  CHECK(ada_reference_grid(1).size() == 24);
  CHECK(logreg_reference_grid().size() == 12);
  for (const auto& p : rf_reference_grid(7)) {
    CHECK(p.n_trees == 300);
    CHECK(p.seed == 7);
  }
}

TEST_CASE("model serialization round-trips predictions bit-exactly") {
  const Dataset train = blobs(100, 6);
  const Dataset probe = blobs(30, 60);

  RandomForest rf;
  RfParams rp;
  rp.n_trees = 15;
  rp.n_features_per_split = 1;
  rp.seed = 2;
  rf.fit(train, rp);
  const std::string fpath = temp_path("fraudseq_rf.txt");
  save_forest(fpath, rf);
  CHECK(load_forest(fpath).predict_proba_all(probe) == rf.predict_proba_all(probe));
  fs::remove(fpath);

  AdaBoost ada;
  AdaParams ap;
  ap.n_trees = 8;
  ap.max_tree_depth = 2;
  ada.fit(train, ap);
  const std::string apath = temp_path("fraudseq_ada.txt");
  save_adaboost(apath, ada, ap);
  CHECK(load_adaboost(apath).predict_proba_all(probe) == ada.predict_proba_all(probe));
  fs::remove(apath);

  LogisticRegression lr;
  lr.fit(train, LogRegParams{});
  const std::string lpath = temp_path("fraudseq_lr.txt");
  save_logreg(lpath, lr);
  CHECK(load_logreg(lpath).predict_proba_all(probe) == lr.predict_proba_all(probe));
  fs::remove(lpath);
}
