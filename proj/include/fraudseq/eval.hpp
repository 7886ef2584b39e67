#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "fraudseq/common.hpp"

namespace fraudseq {

struct PrPoint {
  double threshold;
  double recall;
  double precision;
};

struct PrCurve {
  std::vector<PrPoint> points;  // recall non-decreasing
  double auc = 0.0;
  double prevalence = 0.0;
};

// Precision-recall curve over score-descending thresholds, ties grouped.
// AUC is the average-precision step sum (no linear interpolation in PR
// space).
inline PrCurve pr_curve(const std::vector<double>& scores,
                        const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("pr_curve: scores and labels must be same non-zero size");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y != 0;
  if (n_pos == 0) throw std::invalid_argument("pr_curve: no positive labels, PR undefined");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  PrCurve c;
  c.prevalence = static_cast<double>(n_pos) / scores.size();
  double tp = 0, fp = 0;
  double prev_recall = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double thr = scores[order[i]];
    // consume the whole tie group before emitting a point
    while (i < order.size() && scores[order[i]] == thr) {
      if (labels[order[i]] != 0)
        tp += 1;
      else
        fp += 1;
      ++i;
    }
    const double recall = tp / static_cast<double>(n_pos);
    const double precision = tp / (tp + fp);
    c.auc += (recall - prev_recall) * precision;
    prev_recall = recall;
    c.points.push_back({thr, recall, precision});
  }
  return c;
}

inline double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  return pr_curve(scores, labels).auc;
}

inline void save_pr_curve(const std::string& path, const PrCurve& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write PR curve: " + path);
  out << "threshold,precision,recall\n";
  for (const auto& p : c.points)
    out << format_double(p.threshold) << ',' << format_double(p.precision) << ','
        << format_double(p.recall) << '\n';
}

// Mean and population standard deviation over repeated runs.
struct RunSummary {
  std::string name;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  std::size_t n_runs = 0;
};

inline RunSummary summarize_runs(const std::string& name,
                                 const std::vector<double>& aucs) {
  if (aucs.empty()) throw std::invalid_argument("summarize_runs: no runs");
  RunSummary s;
  s.name = name;
  s.n_runs = aucs.size();
  s.mean_auc = std::accumulate(aucs.begin(), aucs.end(), 0.0) / aucs.size();
  double var = 0.0;
  for (double a : aucs) var += (a - s.mean_auc) * (a - s.mean_auc);
  s.std_auc = std::sqrt(var / aucs.size());
  return s;
}

struct ComparisonRow {
  std::string feature_set;
  RunSummary without_hmm;
  RunSummary with_hmm;
  double relative_increase = 0.0;  // (with - without) / without
};

inline ComparisonRow compare_feature_set(const std::string& feature_set,
                                         const RunSummary& without_hmm,
                                         const RunSummary& with_hmm) {
  ComparisonRow row{feature_set, without_hmm, with_hmm, 0.0};
  row.relative_increase =
      (with_hmm.mean_auc - without_hmm.mean_auc) / without_hmm.mean_auc;
  return row;
}

inline std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.1f%%", fraction * 100.0);
  return buf;
}

inline std::string format_mean_std(const RunSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f +- %.4f", s.mean_auc, s.std_auc);
  return buf;
}

inline void save_comparison_csv(const std::string& path,
                                const std::vector<ComparisonRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write comparison table: " + path);
  out << "feature_set,mean_auc_no_hmm,std_auc_no_hmm,mean_auc_hmm,std_auc_hmm,"
         "relative_increase_pct\n";
  for (const auto& r : rows) {
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%.1f", r.relative_increase * 100.0);
    out << r.feature_set << ',' << format_double(r.without_hmm.mean_auc) << ','
        << format_double(r.without_hmm.std_auc) << ','
        << format_double(r.with_hmm.mean_auc) << ','
        << format_double(r.with_hmm.std_auc) << ',' << pct << '\n';
  }
}

inline std::string render_comparison_text(const std::vector<ComparisonRow>& rows) {
  std::string out =
      "feature set          no HMM             with HMM           increase\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s %-18s %-18s %s\n", r.feature_set.c_str(),
                  format_mean_std(r.without_hmm).c_str(),
                  format_mean_std(r.with_hmm).c_str(),
                  format_percent(r.relative_increase).c_str());
    out += line;
  }
  return out;
}

}  // namespace fraudseq
