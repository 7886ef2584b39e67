#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fraudseq/common.hpp"
#include "fraudseq/tree.hpp"

namespace fraudseq {

struct RfParams {
  std::size_t n_trees = 300;
  std::size_t n_features_per_split = 7;
  std::size_t min_samples_leaf = 1;
  std::size_t max_depth = 0;  // 0 = unlimited ("None")
  std::uint64_t seed = 0;

  void check(std::size_t n_features) const {
    if (n_trees == 0 || min_samples_leaf == 0)
      throw std::invalid_argument("rf: counts must be positive");
    if (n_features_per_split > n_features)
      throw std::invalid_argument("rf: n_features_per_split exceeds feature count");
  }
};

// Bagged gini CART ensemble; per-tree RNG streams derived from
// (seed, tree_index) so the forest is reproducible regardless of build
// order.
class RandomForest {
public:
  void fit(const Dataset& ds, const RfParams& params) {
    params.check(ds.d());
    bool has_pos = false, has_neg = false;
    for (int y : ds.y) (y != 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
      throw std::invalid_argument("rf: training labels contain a single class");
    params_ = params;
    trees_.assign(params.n_trees, DecisionTree());
    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_samples_leaf = params.min_samples_leaf;
    tp.n_features_per_split = params.n_features_per_split;
    const std::size_t n = ds.n();
    for (std::size_t t = 0; t < params.n_trees; ++t) {
      Rng rng(derive_seed(params.seed, t));
      std::vector<std::uint32_t> sample(n);
      for (std::size_t i = 0; i < n; ++i)
        sample[i] = static_cast<std::uint32_t>(rng.uniform_index(n));
      const std::vector<double> weights(n, 1.0);
      trees_[t].fit(ds, sample, weights, tp, rng);
    }
  }

  double predict_proba(const std::vector<double>& row) const {
    double acc = 0.0;
    for (const auto& t : trees_) acc += t.predict(row);
    return acc / static_cast<double>(trees_.size());
  }

  std::vector<double> predict_proba_all(const Dataset& ds) const {
    std::vector<double> out(ds.n(), 0.0);
    for (const auto& t : trees_)
      for (std::size_t r = 0; r < ds.n(); ++r) out[r] += t.predict_cols(ds, r);
    for (double& v : out) v /= static_cast<double>(trees_.size());
    return out;
  }

  // Mean decrease in gini impurity, normalized to sum 1 (all zeros if no
  // tree ever split).
  std::vector<double> gini_importance() const {
    if (trees_.empty()) throw std::logic_error("rf: not fitted");
    std::vector<double> imp(trees_[0].raw_importance().size(), 0.0);
    for (const auto& t : trees_)
      for (std::size_t f = 0; f < imp.size(); ++f) imp[f] += t.raw_importance()[f];
    double total = 0.0;
    for (double v : imp) total += v;
    if (total > 0.0)
      for (double& v : imp) v /= total;
    return imp;
  }

  const std::vector<DecisionTree>& trees() const { return trees_; }
  const RfParams& params() const { return params_; }

  // deserialization hook
  void restore(std::vector<DecisionTree> trees, const RfParams& params) {
    trees_ = std::move(trees);
    params_ = params;
  }

private:
  RfParams params_;
  std::vector<DecisionTree> trees_;
};

}  // namespace fraudseq
