#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fraudseq/common.hpp"
#include "fraudseq/tree.hpp"

namespace fraudseq {

struct AdaParams {
  std::size_t n_trees = 100;
  double learning_rate = 1.0;
  double stop_tolerance = 10.0;  // multiplier on machine epsilon for the
                                 // weighted-error early stop
  std::size_t max_tree_depth = 1;
  std::uint64_t seed = 0;

  void check() const {
    if (n_trees == 0 || max_tree_depth == 0)
      throw std::invalid_argument("adaboost: counts must be positive");
    if (learning_rate <= 0.0)
      throw std::invalid_argument("adaboost: learning_rate must be positive");
  }
};

// Discrete SAMME boosting of depth-limited gini trees. For two classes the
// SAMME stage weight reduces to the classic AdaBoost one. Scores are the
// weighted vote for the positive class mapped to [0,1].
class AdaBoost {
public:
  struct Round {
    DecisionTree tree;
    double alpha = 0.0;
    double weighted_error = 0.0;
  };

  void fit(const Dataset& ds, const AdaParams& params) {
    params.check();
    bool has_pos = false, has_neg = false;
    for (int y : ds.y) (y != 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
      throw std::invalid_argument("adaboost: training labels contain a single class");
    params_ = params;
    rounds_.clear();
    const std::size_t n = ds.n();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    TreeParams tp;
    tp.max_depth = params.max_tree_depth;
    tp.min_samples_leaf = 1;
    tp.n_features_per_split = 0;  // boosting uses every feature
    const double stop_eps =
        params.stop_tolerance * std::numeric_limits<double>::epsilon();

    for (std::size_t m = 0; m < params.n_trees; ++m) {
      Rng rng(derive_seed(params.seed, m));
      Round round;
      round.tree.fit(ds, idx, w, tp, rng);
      double err = 0.0;
      std::vector<int> pred(n);
      for (std::size_t i = 0; i < n; ++i) {
        pred[i] = round.tree.predict_cols(ds, i) >= 0.5 ? 1 : 0;
        if (pred[i] != ds.y[i]) err += w[i];
      }
      round.weighted_error = err;
      if (err >= 0.5) break;           // weak-learner precondition violated
      if (err <= stop_eps) {
        // perfect round: keep it with a capped weight, then stop
        round.alpha = params.learning_rate * std::log((1.0 - stop_eps) / stop_eps);
        rounds_.push_back(std::move(round));
        break;
      }
      round.alpha = params.learning_rate * std::log((1.0 - err) / err);
      double wsum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (pred[i] != ds.y[i]) w[i] *= std::exp(round.alpha);
        wsum += w[i];
      }
      for (double& v : w) v /= wsum;
      rounds_.push_back(std::move(round));
    }
    if (rounds_.empty())
      throw std::runtime_error("adaboost: first weak learner no better than chance");
  }

  // Fraction of the total vote weight cast for the positive class.
  double predict_proba(const std::vector<double>& row) const {
    double pos = 0.0, total = 0.0;
    for (const auto& r : rounds_) {
      total += r.alpha;
      if (r.tree.predict(row) >= 0.5) pos += r.alpha;
    }
    return total > 0.0 ? pos / total : 0.0;
  }

  std::vector<double> predict_proba_all(const Dataset& ds) const {
    std::vector<double> out(ds.n(), 0.0);
    double total = 0.0;
    for (const auto& r : rounds_) {
      total += r.alpha;
      for (std::size_t i = 0; i < ds.n(); ++i)
        if (r.tree.predict_cols(ds, i) >= 0.5) out[i] += r.alpha;
    }
    if (total > 0.0)
      for (double& v : out) v /= total;
    return out;
  }

  const std::vector<Round>& rounds() const { return rounds_; }

  // deserialization hook
  void restore(std::vector<Round> rounds, const AdaParams& params) {
    rounds_ = std::move(rounds);
    params_ = params;
  }

private:
  AdaParams params_;
  std::vector<Round> rounds_;
};

}  // namespace fraudseq
