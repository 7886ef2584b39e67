#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "fraudseq/adaboost.hpp"
#include "fraudseq/forest.hpp"
#include "fraudseq/logreg.hpp"

namespace fraudseq {

template <typename P>
struct GridCell {
  P params;
  double validation_auc = 0.0;
};

template <typename P>
struct GridResult {
  std::size_t best_index = 0;
  std::vector<GridCell<P>> cells;

  const P& best_params() const { return cells[best_index].params; }
};

// Exhaustive search maximizing validation PR-AUC; ties keep the first cell
// in grid order.
template <typename P, typename TrainEval>
GridResult<P> grid_search(const std::vector<P>& grid, TrainEval&& evaluate_cell) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  GridResult<P> result;
  result.cells.reserve(grid.size());
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double auc = evaluate_cell(grid[i]);
    result.cells.push_back({grid[i], auc});
    if (auc > best) {
      best = auc;
      result.best_index = i;
    }
  }
  return result;
}

// Reference hyperparameter grids.
inline std::vector<RfParams> rf_reference_grid(std::uint64_t seed) {
  std::vector<RfParams> grid;
  for (std::size_t mtry : {1, 7, 13})
    for (std::size_t min_leaf : {1, 20, 40})
      for (std::size_t depth : {std::size_t{4}, std::size_t{0}}) {
        RfParams p;
        p.n_trees = 300;
        p.n_features_per_split = mtry;
        p.min_samples_leaf = min_leaf;
        p.max_depth = depth;
        p.seed = seed;
        grid.push_back(p);
      }
  return grid;
}

inline std::vector<AdaParams> ada_reference_grid(std::uint64_t seed) {
  std::vector<AdaParams> grid;
  for (std::size_t n_trees : {100, 400})
    for (double lr : {0.1, 1.0, 100.0})
      for (double tol : {10.0, 100.0})
        for (std::size_t depth : {1, 4}) {
          AdaParams p;
          p.n_trees = n_trees;
          p.learning_rate = lr;
          p.stop_tolerance = tol;
          p.max_tree_depth = depth;
          p.seed = seed;
          grid.push_back(p);
        }
  return grid;
}

inline std::vector<LogRegParams> logreg_reference_grid() {
  std::vector<LogRegParams> grid;
  for (double c : {1.0, 10.0, 100.0})
    for (Penalty pen : {Penalty::l1, Penalty::l2})
      for (double tol : {10.0, 100.0}) {
        LogRegParams p;
        p.C = c;
        p.penalty = pen;
        p.tolerance = tol;
        grid.push_back(p);
      }
  return grid;
}

inline std::string describe(const RfParams& p) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "n_trees=%zu;mtry=%zu;min_leaf=%zu;max_depth=%s",
                p.n_trees, p.n_features_per_split, p.min_samples_leaf,
                p.max_depth == 0 ? "None" : std::to_string(p.max_depth).c_str());
  return buf;
}

inline std::string describe(const AdaParams& p) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "n_trees=%zu;lr=%g;stop_tol=%g;max_depth=%zu",
                p.n_trees, p.learning_rate, p.stop_tolerance, p.max_tree_depth);
  return buf;
}

inline std::string describe(const LogRegParams& p) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "C=%g;penalty=%s;tol=%g", p.C,
                p.penalty == Penalty::l1 ? "l1" : "l2", p.tolerance);
  return buf;
}

template <typename P>
void save_grid_report(const std::string& path, const GridResult<P>& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grid report: " + path);
  out << "cell,params,validation_pr_auc,selected\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i)
    out << i << ',' << describe(result.cells[i].params) << ','
        << format_double(result.cells[i].validation_auc) << ','
        << (i == result.best_index ? 1 : 0) << '\n';
}

}  // namespace fraudseq
