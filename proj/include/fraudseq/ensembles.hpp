#pragma once

#include <array>
#include <string>
#include <vector>

#include "fraudseq/eval.hpp"
#include "fraudseq/forest.hpp"

namespace fraudseq {

// Minimum per-actor history (transaction count including the current one)
// required by a specialist model. 0 means unconstrained.
struct HistoryConstraint {
  std::size_t tm_min = 0;
  std::size_t ch_min = 0;

  bool satisfied_by(const TxFeatureRecord& r) const {
    return r.tm_history >= tm_min && r.ch_history >= ch_min;
  }
};

inline const std::array<std::size_t, 4> kHistoryLevels = {0, 3, 5, 7};

// The 16 (terminal x card-holder) history constraints, [0,0] first.
inline std::vector<HistoryConstraint> all_history_constraints() {
  std::vector<HistoryConstraint> out;
  for (std::size_t tm : kHistoryLevels)
    for (std::size_t ch : kHistoryLevels) out.push_back({tm, ch});
  return out;
}

inline std::string constraint_name(const HistoryConstraint& c) {
  return "[" + std::to_string(c.tm_min) + "," + std::to_string(c.ch_min) + "]";
}

namespace detail {

inline const std::array<std::size_t, 4> kChHmmSlots = {0, 1, 4, 5};
inline const std::array<std::size_t, 4> kTmHmmSlots = {2, 3, 6, 7};

}  // namespace detail

// Feature layout of one specialist: raw + all aggregates, plus the HMM
// features whose window fits under the constraint (CH features for
// w <= ch_min, TM features for w <= tm_min). All such features are present
// by construction on rows satisfying the constraint.
inline std::vector<std::string> constraint_column_names(const HistoryConstraint& c,
                                                        const std::vector<std::size_t>& windows) {
  std::vector<std::string> names = {"amount", "hour",   "day_of_week", "country",
                                    "mcc",    "channel", "aggch1",      "aggch2",
                                    "aggch3", "aggch4",  "aggtm1",      "aggtm2",
                                    "aggtm3", "aggtm4"};
  for (std::size_t w : windows) {
    if (w <= c.ch_min)
      for (std::size_t slot : detail::kChHmmSlots)
        names.push_back(std::string(kHmmColumnNames[slot]) + "_w" + std::to_string(w));
    if (w <= c.tm_min)
      for (std::size_t slot : detail::kTmHmmSlots)
        names.push_back(std::string(kHmmColumnNames[slot]) + "_w" + std::to_string(w));
  }
  return names;
}

inline std::vector<double> constraint_row(const Transaction& tx,
                                          const TxFeatureRecord& r,
                                          const Encoders& encoders,
                                          const HistoryConstraint& c,
                                          const std::vector<std::size_t>& windows) {
  std::vector<double> row = {tx.amount,
                             static_cast<double>(hour_of_day(tx.timestamp)),
                             static_cast<double>(day_of_week(tx.timestamp)),
                             encoders.country.encode(tx.country),
                             encoders.mcc.encode(tx.mcc),
                             tx.channel == Channel::ecommerce ? 1.0 : 2.0,
                             r.agg.aggch1,
                             r.agg.aggch2,
                             r.agg.aggch3,
                             r.agg.aggch4,
                             r.agg.aggtm1,
                             r.agg.aggtm2,
                             r.agg.aggtm3,
                             r.agg.aggtm4};
  for (std::size_t w : windows) {
    const HmmFeatureSet& fs = r.hmm_by_window.at(w);
    if (w <= c.ch_min)
      for (std::size_t slot : detail::kChHmmSlots)
        row.push_back(fs.present[slot] ? fs.loglik[slot] : 0.0);
    if (w <= c.tm_min)
      for (std::size_t slot : detail::kTmHmmSlots)
        row.push_back(fs.present[slot] ? fs.loglik[slot] : 0.0);
  }
  return row;
}

inline FeatureMatrix constraint_matrix(const std::vector<Transaction>& subset,
                                       const std::vector<TxFeatureRecord>& records,
                                       const Encoders& encoders,
                                       const HistoryConstraint& c,
                                       const std::vector<std::size_t>& windows) {
  FeatureMatrix m;
  m.column_names = constraint_column_names(c, windows);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (!c.satisfied_by(records[i])) continue;
    m.rows.push_back(constraint_row(subset[i], records[i], encoders, c, windows));
    m.labels.push_back(subset[i].is_fraud() ? 1 : 0);
    m.tx_indices.push_back(i);
  }
  return m;
}

struct SpecialistBank {
  std::vector<HistoryConstraint> constraints;
  std::vector<RandomForest> forests;
  std::vector<bool> trained;  // degenerate training subsets are skipped
  std::vector<double> validation_auc;
  std::vector<std::string> warnings;
  std::vector<std::size_t> windows;

  // Per-row predictions of every applicable trained specialist, with the
  // constraint indices that produced them.
  void predict_applicable(const Transaction& tx, const TxFeatureRecord& r,
                          const Encoders& encoders,
                          std::vector<std::pair<std::size_t, double>>* out) const {
    out->clear();
    for (std::size_t j = 0; j < constraints.size(); ++j) {
      if (!trained[j] || !constraints[j].satisfied_by(r)) continue;
      out->push_back(
          {j, forests[j].predict_proba(constraint_row(tx, r, encoders, constraints[j], windows))});
    }
  }
};

// Trains the 16 history-constraint specialists on the training period and
// scores each on its applicable slice of the validation period.
inline SpecialistBank train_specialists(
    const std::vector<Transaction>& train, const std::vector<TxFeatureRecord>& train_records,
    const std::vector<Transaction>& validation,
    const std::vector<TxFeatureRecord>& validation_records, const Encoders& encoders,
    const RfParams& base_params, const std::vector<std::size_t>& windows = {3, 5, 7}) {
  SpecialistBank bank;
  bank.constraints = all_history_constraints();
  bank.windows = windows;
  bank.forests.resize(bank.constraints.size());
  bank.trained.assign(bank.constraints.size(), false);
  bank.validation_auc.assign(bank.constraints.size(), 0.0);
  for (std::size_t j = 0; j < bank.constraints.size(); ++j) {
    const HistoryConstraint& c = bank.constraints[j];
    FeatureMatrix tm = constraint_matrix(train, train_records, encoders, c, windows);
    std::size_t n_pos = 0;
    for (int y : tm.labels) n_pos += y != 0;
    if (tm.labels.empty() || n_pos == 0 || n_pos == tm.labels.size()) {
      bank.warnings.push_back("specialist " + constraint_name(c) +
                              " skipped: degenerate training subset");
      if (c.tm_min == 0 && c.ch_min == 0)
        throw std::runtime_error("ensemble: the unconstrained [0,0] specialist is untrainable");
      continue;
    }
    RfParams p = base_params;
    p.seed = derive_seed(base_params.seed, j);
    if (p.n_features_per_split > tm.column_names.size())
      p.n_features_per_split = tm.column_names.size();
    bank.forests[j].fit(Dataset::from_matrix(tm), p);
    bank.trained[j] = true;

    FeatureMatrix vm = constraint_matrix(validation, validation_records, encoders, c, windows);
    std::size_t v_pos = 0;
    for (int y : vm.labels) v_pos += y != 0;
    if (v_pos == 0) {
      bank.warnings.push_back("specialist " + constraint_name(c) +
                              " has no validation positives; weight 0");
      bank.validation_auc[j] = 0.0;
      continue;
    }
    bank.validation_auc[j] =
        pr_auc(bank.forests[j].predict_proba_all(Dataset::from_matrix(vm)), vm.labels);
  }
  return bank;
}

// Missing-value strategy "weighted PR": validation-PR-AUC-weighted average
// of every applicable specialist; falls back to [0,0] when nothing applies.
class WeightedPrEnsemble {
public:
  WeightedPrEnsemble(SpecialistBank bank, Encoders encoders)
      : bank_(std::move(bank)), encoders_(std::move(encoders)) {}

  double predict(const Transaction& tx, const TxFeatureRecord& r) const {
    std::vector<std::pair<std::size_t, double>> preds;
    bank_.predict_applicable(tx, r, encoders_, &preds);
    double num = 0.0, den = 0.0;
    for (const auto& [j, p] : preds) {
      num += bank_.validation_auc[j] * p;
      den += bank_.validation_auc[j];
    }
    if (den > 0.0) return num / den;
    // all weights zero (or nothing applicable): unweighted mean, then [0,0]
    if (!preds.empty()) {
      double s = 0.0;
      for (const auto& [j, p] : preds) s += p;
      return s / static_cast<double>(preds.size());
    }
    return bank_.forests[0].predict_proba(
        constraint_row(tx, r, encoders_, bank_.constraints[0], bank_.windows));
  }

  std::vector<double> predict_all(const std::vector<Transaction>& subset,
                                  const std::vector<TxFeatureRecord>& records) const {
    std::vector<double> out(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) out[i] = predict(subset[i], records[i]);
    return out;
  }

  const SpecialistBank& bank() const { return bank_; }

private:
  SpecialistBank bank_;
  Encoders encoders_;
};

// Missing-value strategy "stacked RF": a meta random forest over the 16
// specialist predictions (0 where a constraint is unsatisfied). Base models
// are trained on the training period and the meta model on the validation
// period, so no base model predicts its own training rows for meta fitting.
class StackedRfEnsemble {
public:
  StackedRfEnsemble(SpecialistBank bank, Encoders encoders)
      : bank_(std::move(bank)), encoders_(std::move(encoders)) {}

  void fit_meta(const std::vector<Transaction>& validation,
                const std::vector<TxFeatureRecord>& validation_records,
                const RfParams& meta_params) {
    FeatureMatrix meta;
    for (std::size_t j = 0; j < bank_.constraints.size(); ++j)
      meta.column_names.push_back("base" + constraint_name(bank_.constraints[j]));
    for (std::size_t i = 0; i < validation.size(); ++i) {
      meta.rows.push_back(meta_row(validation[i], validation_records[i]));
      meta.labels.push_back(validation[i].is_fraud() ? 1 : 0);
      meta.tx_indices.push_back(i);
    }
    RfParams p = meta_params;
    if (p.n_features_per_split > meta.column_names.size())
      p.n_features_per_split = meta.column_names.size();
    meta_.fit(Dataset::from_matrix(meta), p);
  }

  std::vector<double> meta_row(const Transaction& tx, const TxFeatureRecord& r) const {
    std::vector<double> row(bank_.constraints.size(), 0.0);
    std::vector<std::pair<std::size_t, double>> preds;
    bank_.predict_applicable(tx, r, encoders_, &preds);
    for (const auto& [j, p] : preds) row[j] = p;
    return row;
  }

  double predict(const Transaction& tx, const TxFeatureRecord& r) const {
    return meta_.predict_proba(meta_row(tx, r));
  }

  std::vector<double> predict_all(const std::vector<Transaction>& subset,
                                  const std::vector<TxFeatureRecord>& records) const {
    std::vector<double> out(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) out[i] = predict(subset[i], records[i]);
    return out;
  }

  const SpecialistBank& bank() const { return bank_; }

private:
  SpecialistBank bank_;
  Encoders encoders_;
  RandomForest meta_;
};

}  // namespace fraudseq
