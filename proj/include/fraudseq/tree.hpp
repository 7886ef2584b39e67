#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "fraudseq/common.hpp"
#include "fraudseq/features.hpp"

namespace fraudseq {

// Column-major training view; rows are samples, labels in {0,1}.
struct Dataset {
  std::vector<std::vector<double>> cols;
  std::vector<int> y;

  std::size_t n() const { return y.size(); }
  std::size_t d() const { return cols.size(); }
  double at(std::size_t row, std::size_t col) const { return cols[col][row]; }

  static Dataset from_matrix(const FeatureMatrix& m) {
    Dataset ds;
    ds.y = m.labels;
    ds.cols.assign(m.column_names.size(), std::vector<double>(m.rows.size()));
    for (std::size_t r = 0; r < m.rows.size(); ++r)
      for (std::size_t c = 0; c < m.column_names.size(); ++c)
        ds.cols[c][r] = m.rows[r][c];
    return ds;
  }
};

struct TreeParams {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t n_features_per_split = 0;  // 0 = all features
};

// Weighted binary CART with gini splits. Numeric split candidates are the
// midpoints between consecutive distinct sorted values; label-encoded
// categoricals are treated as ordinal numerics.
class DecisionTree {
public:
  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // positive fraction at the leaf
  };

  void fit(const Dataset& ds, const std::vector<std::uint32_t>& sample_indices,
           const std::vector<double>& sample_weights, const TreeParams& params,
           Rng& rng) {
    nodes_.clear();
    importance_raw_.assign(ds.d(), 0.0);
    double total_w = 0.0;
    for (double w : sample_weights) total_w += w;
    root_weight_ = total_w;
    build(ds, sample_indices, sample_weights, params, rng, 0);
  }

  double predict(const std::vector<double>& row) const {
    std::int32_t idx = 0;
    while (nodes_[idx].feature >= 0) {
      idx = row[nodes_[idx].feature] <= nodes_[idx].threshold ? nodes_[idx].left
                                                             : nodes_[idx].right;
    }
    return nodes_[idx].value;
  }

  double predict_cols(const Dataset& ds, std::size_t row) const {
    std::int32_t idx = 0;
    while (nodes_[idx].feature >= 0) {
      idx = ds.at(row, nodes_[idx].feature) <= nodes_[idx].threshold
                ? nodes_[idx].left
                : nodes_[idx].right;
    }
    return nodes_[idx].value;
  }

  std::size_t n_leaves() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) n += node.feature < 0;
    return n;
  }

  std::size_t max_depth_reached() const { return depth_reached_; }

  // Unnormalized per-feature sum of weighted gini decreases.
  const std::vector<double>& raw_importance() const { return importance_raw_; }

  const std::vector<Node>& nodes() const { return nodes_; }

  // deserialization hook
  void set_nodes(std::vector<Node> nodes) {
    nodes_ = std::move(nodes);
    importance_raw_.clear();
  }

private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
  };

  static double gini(double w_pos, double w_total) {
    if (w_total <= 0.0) return 0.0;
    const double p = w_pos / w_total;
    return 2.0 * p * (1.0 - p);
  }

  // Best split on one feature; returns decrease <= 0 if none is valid.
  Split best_split_on_feature(const Dataset& ds,
                              const std::vector<std::uint32_t>& idx,
                              const std::vector<double>& w, int feature,
                              double w_total, double w_pos,
                              std::size_t min_leaf) const {
    const std::size_t m = idx.size();
    scratch_.clear();
    scratch_.reserve(m);
    const std::vector<double>& col = ds.cols[feature];
    for (std::size_t i = 0; i < m; ++i)
      scratch_.push_back({col[idx[i]], static_cast<std::uint32_t>(i)});
    std::sort(scratch_.begin(), scratch_.end(),
              [](const Entry& a, const Entry& b) { return a.value < b.value; });

    Split best;
    const double parent = gini(w_pos, w_total);
    double wl = 0.0, wl_pos = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const std::size_t src = scratch_[i].src;
      wl += w[src];
      if (ds.y[idx[src]] != 0) wl_pos += w[src];
      if (scratch_[i].value == scratch_[i + 1].value) continue;
      if (i + 1 < min_leaf || m - i - 1 < min_leaf) continue;
      const double wr = w_total - wl;
      const double wr_pos = w_pos - wl_pos;
      const double child =
          (wl * gini(wl_pos, wl) + wr * gini(wr_pos, wr)) / w_total;
      const double decrease = parent - child;
      if (decrease > best.decrease) {
        best.feature = feature;
        best.threshold = scratch_[i].value + 0.5 * (scratch_[i + 1].value - scratch_[i].value);
        best.decrease = decrease;
      }
    }
    return best;
  }

  std::int32_t build(const Dataset& ds, const std::vector<std::uint32_t>& idx,
                     const std::vector<double>& w, const TreeParams& params,
                     Rng& rng, std::size_t depth) {
    depth_reached_ = std::max(depth_reached_, depth);
    double w_total = 0.0, w_pos = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      w_total += w[i];
      if (ds.y[idx[i]] != 0) w_pos += w[i];
    }
    const std::int32_t node_id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{});
    nodes_[node_id].value = w_total > 0.0 ? w_pos / w_total : 0.0;

    const bool pure = w_pos <= 0.0 || w_pos >= w_total;
    const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
    if (pure || depth_capped || idx.size() < 2 * params.min_samples_leaf ||
        idx.size() < 2)
      return node_id;

    const std::size_t d = ds.d();
    std::vector<int> features(d);
    for (std::size_t i = 0; i < d; ++i) features[i] = static_cast<int>(i);
    std::size_t mtry = params.n_features_per_split;
    if (mtry == 0 || mtry > d) mtry = d;
    // partial Fisher-Yates: the first mtry entries are the sampled features,
    // the rest serve as fallback when none of the sampled ones can split
    for (std::size_t i = 0; i < mtry; ++i) {
      const std::size_t j = i + rng.uniform_index(d - i);
      std::swap(features[i], features[j]);
    }

    Split best;
    for (std::size_t i = 0; i < d; ++i) {
      if (i >= mtry && best.feature >= 0) break;
      const Split s = best_split_on_feature(ds, idx, w, features[i], w_total, w_pos,
                                            params.min_samples_leaf);
      if (s.decrease > best.decrease) best = s;
    }
    if (best.feature < 0) return node_id;

    importance_raw_[best.feature] += (w_total / root_weight_) * best.decrease;

    std::vector<std::uint32_t> left_idx, right_idx;
    std::vector<double> left_w, right_w;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (ds.at(idx[i], best.feature) <= best.threshold) {
        left_idx.push_back(idx[i]);
        left_w.push_back(w[i]);
      } else {
        right_idx.push_back(idx[i]);
        right_w.push_back(w[i]);
      }
    }
    nodes_[node_id].feature = best.feature;
    nodes_[node_id].threshold = best.threshold;
    const std::int32_t left = build(ds, left_idx, left_w, params, rng, depth + 1);
    nodes_[node_id].left = left;
    const std::int32_t right = build(ds, right_idx, right_w, params, rng, depth + 1);
    nodes_[node_id].right = right;
    return node_id;
  }

  struct Entry {
    double value;
    std::uint32_t src;  // position within the node's index list
  };

  std::vector<Node> nodes_;
  std::vector<double> importance_raw_;
  double root_weight_ = 1.0;
  std::size_t depth_reached_ = 0;
  mutable std::vector<Entry> scratch_;
};

}  // namespace fraudseq
