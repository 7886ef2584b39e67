#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fraudseq/corpus.hpp"
#include "fraudseq/hmm.hpp"
#include "fraudseq/transaction.hpp"

namespace fraudseq {

// The 8 trailing-window log-likelihoods, in feature order (1..4 genuine
// CH-amt, CH-td, TM-amt, TM-td; 5..8 the compromised counterparts), with
// structural-missing flags.
struct HmmFeatureSet {
  std::array<double, 8> loglik{};
  std::array<bool, 8> present{};
};

// Eight models for one window size, indexed by perspective_index.
using ModelBank = std::array<GaussianHmm, 8>;

inline HmmFeatureSet compute_hmm_features(const Transaction& tx,
                                          const HistoryIndex& history,
                                          const ModelBank& models, std::size_t w) {
  HmmFeatureSet fs;
  const auto perspectives = all_perspectives();
  for (std::size_t i = 0; i < 8; ++i) {
    const Perspective& p = perspectives[i];
    const GaussianHmm& hmm = models[i];
    if (hmm.transform_tag != history.transform_tag())
      throw std::runtime_error("hmm feature config error: model transform '" +
                               hmm.transform_tag + "' does not match index transform '" +
                               history.transform_tag() + "'");
    auto window = history.trailing_window(tx, w, p.actor, p.signal);
    if (!window) {
      fs.present[i] = false;
      fs.loglik[i] = 0.0;
      continue;
    }
    fs.present[i] = true;
    fs.loglik[i] = sequence_loglik(hmm, *window);
  }
  return fs;
}

// 24h descriptive statistics (window (t-24h, t], current transaction
// included). The terminal card-type filters use the transaction channel.
struct AggregatedFeatures {
  double aggch1 = 0;  // # card txs in 24h
  double aggch2 = 0;  // card amount in 24h
  double aggch3 = 0;  // # card txs in current country in 24h
  double aggch4 = 0;  // card amount in current country in 24h
  double aggtm1 = 0;  // # terminal txs in 24h
  double aggtm2 = 0;  // terminal amount in 24h
  double aggtm3 = 0;  // # terminal txs with current channel in 24h
  double aggtm4 = 0;  // terminal amount with current channel in 24h
};

inline AggregatedFeatures compute_aggregates(const Transaction& tx,
                                             const HistoryIndex& history) {
  AggregatedFeatures a;
  const auto& txs = history.transactions();
  for (std::uint32_t i : history.window_24h(tx, ActorKind::card_holder)) {
    const Transaction& h = txs[i];
    a.aggch1 += 1;
    a.aggch2 += h.amount;
    if (h.country == tx.country) {
      a.aggch3 += 1;
      a.aggch4 += h.amount;
    }
  }
  for (std::uint32_t i : history.window_24h(tx, ActorKind::terminal)) {
    const Transaction& h = txs[i];
    a.aggtm1 += 1;
    a.aggtm2 += h.amount;
    if (h.channel == tx.channel) {
      a.aggtm3 += 1;
      a.aggtm4 += h.amount;
    }
  }
  return a;
}

// First-appearance label encoder for categorical raw features. Code 0 is
// reserved for categories unseen during training.
class LabelEncoder {
public:
  void fit_value(const std::string& v) {
    codes_.try_emplace(v, static_cast<int>(codes_.size()) + 1);
  }
  double encode(const std::string& v) const {
    auto it = codes_.find(v);
    return it == codes_.end() ? 0.0 : static_cast<double>(it->second);
  }
  std::size_t size() const { return codes_.size(); }
  // insertion-ordered (value, code) pairs for the sidecar metadata
  std::vector<std::pair<std::string, int>> table() const {
    std::vector<std::pair<std::string, int>> t(codes_.begin(), codes_.end());
    std::sort(t.begin(), t.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    return t;
  }

private:
  std::unordered_map<std::string, int> codes_;
};

struct Encoders {
  LabelEncoder country;
  LabelEncoder mcc;

  static Encoders fit(const std::vector<Transaction>& train_txs) {
    Encoders e;
    for (const auto& tx : train_txs) {
      e.country.fit_value(tx.country);
      e.mcc.fit_value(tx.mcc);
    }
    return e;
  }
};

inline int hour_of_day(std::int64_t timestamp) {
  return static_cast<int>(((timestamp % kSecondsPerDay) + kSecondsPerDay) %
                          kSecondsPerDay / 3600);
}

inline int day_of_week(std::int64_t timestamp) {
  // epoch day 0 was a Thursday; 0 = Monday
  const std::int64_t days =
      (timestamp >= 0 ? timestamp : timestamp - kSecondsPerDay + 1) / kSecondsPerDay;
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

enum class FeatureBlock : std::uint8_t { agg_ch, agg_tm, hmm };

struct FeatureSetSpec {
  std::string name;
  bool agg_ch = false;
  bool agg_tm = false;
  bool hmm = false;
};

inline FeatureSetSpec parse_feature_set(const std::string& name) {
  FeatureSetSpec s;
  s.name = name;
  std::string base = name;
  const std::string hmm_suffix = "+HMM";
  if (base.size() >= hmm_suffix.size() &&
      base.compare(base.size() - hmm_suffix.size(), hmm_suffix.size(), hmm_suffix) == 0) {
    s.hmm = true;
    base = base.substr(0, base.size() - hmm_suffix.size());
  }
  if (base == "raw") {
  } else if (base == "raw+aggCH") {
    s.agg_ch = true;
  } else if (base == "raw+allagg") {
    s.agg_ch = true;
    s.agg_tm = true;
  } else {
    throw std::invalid_argument("unknown feature set name: '" + name + "'");
  }
  return s;
}

enum class MissingStrategy : std::uint8_t { default0, exclude, weighted_pr, stacked_rf };

inline MissingStrategy parse_missing_strategy(const std::string& s) {
  if (s == "default0") return MissingStrategy::default0;
  if (s == "exclude") return MissingStrategy::exclude;
  if (s == "weighted_pr") return MissingStrategy::weighted_pr;
  if (s == "stacked_rf") return MissingStrategy::stacked_rf;
  throw std::invalid_argument("unknown missing-value strategy: '" + s + "'");
}

// Structural-missing entries replaced by literal 0; present entries kept.
inline std::array<double, 8> apply_default0(const HmmFeatureSet& fs) {
  std::array<double, 8> out{};
  for (std::size_t i = 0; i < 8; ++i) out[i] = fs.present[i] ? fs.loglik[i] : 0.0;
  return out;
}

// Per-transaction precomputed material shared by every feature set:
// aggregates, HMM features per window size, and actor history counts.
struct TxFeatureRecord {
  AggregatedFeatures agg;
  std::map<std::size_t, HmmFeatureSet> hmm_by_window;
  std::size_t ch_history = 0;
  std::size_t tm_history = 0;
};

struct FeatureMatrix {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::size_t> tx_indices;  // into the source subset
};

inline std::vector<TxFeatureRecord> compute_feature_records(
    const std::vector<Transaction>& subset, const HistoryIndex& history,
    const std::map<std::size_t, ModelBank>& banks) {
  std::vector<TxFeatureRecord> records(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const Transaction& tx = subset[i];
    TxFeatureRecord& r = records[i];
    r.agg = compute_aggregates(tx, history);
    r.ch_history = history.history_count(tx, ActorKind::card_holder);
    r.tm_history = history.history_count(tx, ActorKind::terminal);
    for (const auto& [w, bank] : banks)
      r.hmm_by_window[w] = compute_hmm_features(tx, history, bank, w);
  }
  return records;
}

inline const std::array<const char*, 8> kHmmColumnNames = {
    "hmm1_ch_amount_genuine", "hmm2_ch_tdelta_genuine", "hmm3_tm_amount_genuine",
    "hmm4_tm_tdelta_genuine", "hmm5_ch_amount_fraud",   "hmm6_ch_tdelta_fraud",
    "hmm7_tm_amount_fraud",   "hmm8_tm_tdelta_fraud"};

// Assembles the feature matrix for one subset. The HMM block uses the given
// window size; under `exclude` rows with any missing HMM feature are
// dropped, under `default0` missing entries become 0.
inline FeatureMatrix assemble(const std::vector<Transaction>& subset,
                              const std::vector<TxFeatureRecord>& records,
                              const Encoders& encoders, const FeatureSetSpec& spec,
                              MissingStrategy strategy, std::size_t hmm_window = 3) {
  if (spec.hmm && strategy != MissingStrategy::default0 &&
      strategy != MissingStrategy::exclude)
    throw std::invalid_argument(
        "assemble handles default0/exclude only; ensemble strategies are models");
  FeatureMatrix m;
  m.column_names = {"amount", "hour", "day_of_week", "country", "mcc", "channel"};
  if (spec.agg_ch)
    m.column_names.insert(m.column_names.end(), {"aggch1", "aggch2", "aggch3", "aggch4"});
  if (spec.agg_tm)
    m.column_names.insert(m.column_names.end(), {"aggtm1", "aggtm2", "aggtm3", "aggtm4"});
  if (spec.hmm)
    m.column_names.insert(m.column_names.end(), kHmmColumnNames.begin(),
                          kHmmColumnNames.end());

  for (std::size_t i = 0; i < subset.size(); ++i) {
    const Transaction& tx = subset[i];
    const TxFeatureRecord& r = records[i];
    const HmmFeatureSet* fs = nullptr;
    if (spec.hmm) {
      auto it = r.hmm_by_window.find(hmm_window);
      if (it == r.hmm_by_window.end())
        throw std::invalid_argument("assemble: no HMM bank for window " +
                                    std::to_string(hmm_window));
      fs = &it->second;
      if (strategy == MissingStrategy::exclude) {
        bool all_present = true;
        for (bool p : fs->present) all_present = all_present && p;
        if (!all_present) continue;
      }
    }
    std::vector<double> row;
    row.reserve(m.column_names.size());
    row.push_back(tx.amount);
    row.push_back(static_cast<double>(hour_of_day(tx.timestamp)));
    row.push_back(static_cast<double>(day_of_week(tx.timestamp)));
    row.push_back(encoders.country.encode(tx.country));
    row.push_back(encoders.mcc.encode(tx.mcc));
    row.push_back(tx.channel == Channel::ecommerce ? 1.0 : 2.0);
    if (spec.agg_ch) {
      row.push_back(r.agg.aggch1);
      row.push_back(r.agg.aggch2);
      row.push_back(r.agg.aggch3);
      row.push_back(r.agg.aggch4);
    }
    if (spec.agg_tm) {
      row.push_back(r.agg.aggtm1);
      row.push_back(r.agg.aggtm2);
      row.push_back(r.agg.aggtm3);
      row.push_back(r.agg.aggtm4);
    }
    if (spec.hmm) {
      const auto vals = apply_default0(*fs);
      row.insert(row.end(), vals.begin(), vals.end());
    }
    m.rows.push_back(std::move(row));
    m.labels.push_back(tx.is_fraud() ? 1 : 0);
    m.tx_indices.push_back(i);
  }
  return m;
}

}  // namespace fraudseq
