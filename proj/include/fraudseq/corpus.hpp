#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fraudseq/transaction.hpp"

namespace fraudseq {

enum class ActorKind : std::uint8_t { card_holder, terminal };
enum class SignalKind : std::uint8_t { amount, time_delta };
enum class SeqStatus : std::uint8_t { genuine, compromised };

// One of the 8 (status x actor x signal) modeling perspectives.
struct Perspective {
  SeqStatus status;
  ActorKind actor;
  SignalKind signal;
};

// Feature ordering: 1..4 genuine (CH-amt, CH-td, TM-amt, TM-td), 5..8 the
// same four compromised.
inline int perspective_index(const Perspective& p) {
  return 4 * (p.status == SeqStatus::compromised ? 1 : 0) +
         2 * (p.actor == ActorKind::terminal ? 1 : 0) +
         (p.signal == SignalKind::time_delta ? 1 : 0);
}

inline std::array<Perspective, 8> all_perspectives() {
  std::array<Perspective, 8> out{};
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      for (int g = 0; g < 2; ++g) {
        Perspective p{s ? SeqStatus::compromised : SeqStatus::genuine,
                      a ? ActorKind::terminal : ActorKind::card_holder,
                      g ? SignalKind::time_delta : SignalKind::amount};
        out[static_cast<std::size_t>(perspective_index(p))] = p;
      }
  return out;
}

inline std::string perspective_name(const Perspective& p) {
  std::string s = p.actor == ActorKind::card_holder ? "ch" : "tm";
  s += p.signal == SignalKind::amount ? "_amount" : "_tdelta";
  s += p.status == SeqStatus::genuine ? "_genuine" : "_compromised";
  return s;
}

inline std::optional<Perspective> perspective_from_name(const std::string& name) {
  for (const auto& p : all_perspectives())
    if (perspective_name(p) == name) return p;
  return std::nullopt;
}

// The signal transform applied to amounts and time-deltas before modeling.
// Recorded in model metadata so scoring always matches training.
inline const char kSignalTransform[] = "log1p";

inline double transform_signal(double x) { return std::log1p(x); }

struct ActorObservation {
  std::int64_t timestamp;
  std::string tx_id;
  double amount;
  Label label;
};

struct ActorSequence {
  std::string actor_id;
  std::vector<ActorObservation> observations;  // ordered by (timestamp, tx_id)
  SeqStatus status = SeqStatus::genuine;
};

inline const std::string& actor_id_of(const Transaction& tx, ActorKind kind) {
  return kind == ActorKind::card_holder ? tx.card_id : tx.terminal_id;
}

// Groups training-period transactions into per-actor sequences; an actor is
// compromised iff it carries at least one fraud label.
inline std::vector<ActorSequence> group_by_actor(
    const std::vector<Transaction>& txs, ActorKind kind) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<ActorSequence> seqs;
  for (const auto& tx : txs) {
    const std::string& id = actor_id_of(tx, kind);
    auto [it, inserted] = slot.try_emplace(id, seqs.size());
    if (inserted) seqs.push_back(ActorSequence{id, {}, SeqStatus::genuine});
    ActorSequence& seq = seqs[it->second];
    seq.observations.push_back({tx.timestamp, tx.tx_id, tx.amount, tx.label});
    if (tx.label == Label::fraud) seq.status = SeqStatus::compromised;
  }
  for (auto& seq : seqs) {
    std::sort(seq.observations.begin(), seq.observations.end(),
              [](const ActorObservation& a, const ActorObservation& b) {
                if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                return a.tx_id < b.tx_id;
              });
  }
  std::sort(seqs.begin(), seqs.end(),
            [](const ActorSequence& a, const ActorSequence& b) {
              return a.actor_id < b.actor_id;
            });
  return seqs;
}

// amount -> |seq| transformed amounts; time_delta -> |seq|-1 transformed
// gaps between consecutive transactions (seconds).
inline std::vector<double> extract_signal(const ActorSequence& seq,
                                          SignalKind signal) {
  std::vector<double> out;
  if (signal == SignalKind::amount) {
    out.reserve(seq.observations.size());
    for (const auto& o : seq.observations) out.push_back(transform_signal(o.amount));
  } else {
    if (seq.observations.size() < 2) return out;
    out.reserve(seq.observations.size() - 1);
    for (std::size_t i = 1; i < seq.observations.size(); ++i)
      out.push_back(transform_signal(static_cast<double>(
          seq.observations[i].timestamp - seq.observations[i - 1].timestamp)));
  }
  return out;
}

struct PerspectiveCorpus {
  Perspective perspective;
  std::vector<std::vector<double>> sequences;

  std::size_t total_observations() const {
    std::size_t n = 0;
    for (const auto& s : sequences) n += s.size();
    return n;
  }
};

// Builds the 8 training corpora. A sequence enters a corpus only if its
// signal vector has at least `window` entries.
inline std::array<PerspectiveCorpus, 8> build_corpora(
    const std::vector<ActorSequence>& card_seqs,
    const std::vector<ActorSequence>& terminal_seqs, std::size_t window) {
  if (window < 2) throw std::invalid_argument("build_corpora: window must be >= 2");
  std::array<PerspectiveCorpus, 8> corpora;
  const auto perspectives = all_perspectives();
  for (std::size_t i = 0; i < 8; ++i) corpora[i].perspective = perspectives[i];
  for (const auto& p : perspectives) {
    const auto& seqs =
        p.actor == ActorKind::card_holder ? card_seqs : terminal_seqs;
    auto& corpus = corpora[static_cast<std::size_t>(perspective_index(p))];
    for (const auto& seq : seqs) {
      if (seq.status != p.status) continue;
      auto vec = extract_signal(seq, p.signal);
      if (vec.size() < window) continue;
      corpus.sequences.push_back(std::move(vec));
    }
  }
  for (const auto& c : corpora) {
    if (c.sequences.empty())
      throw std::runtime_error("empty training corpus for perspective " +
                               perspective_name(c.perspective) +
                               ": HMM untrainable");
  }
  return corpora;
}

inline void save_corpus(const std::string& path, const PerspectiveCorpus& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& seq : c.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out << ' ';
      out << format_double(seq[i]);
    }
    out << '\n';
  }
}

// Frozen per-actor chronological index over a transaction set. Supports the
// trailing-window lookups of the scoring stage and the 24h aggregates.
// Built once per featurization pass; concurrent reads are safe.
class HistoryIndex {
public:
  explicit HistoryIndex(std::vector<Transaction> txs) : txs_(std::move(txs)) {
    std::stable_sort(txs_.begin(), txs_.end(), tx_before);
    for (std::uint32_t i = 0; i < txs_.size(); ++i) {
      by_card_[txs_[i].card_id].push_back(i);
      by_terminal_[txs_[i].terminal_id].push_back(i);
    }
  }

  const std::vector<Transaction>& transactions() const { return txs_; }

  const char* transform_tag() const { return kSignalTransform; }

  // 1-based rank of the transaction within its actor's stream (count of the
  // actor's transactions up to and including this one); 0 if unknown.
  std::size_t history_count(const Transaction& tx, ActorKind kind) const {
    const std::vector<std::uint32_t>* list = actor_list(actor_id_of(tx, kind), kind);
    if (!list) return 0;
    const auto pos = position_of(*list, tx);
    return pos ? *pos + 1 : 0;
  }

  // Transformed signal vector for the w most recent transactions of the
  // actor ending at tx (w-1 deltas for time_delta). nullopt when fewer than
  // w transactions exist or the actor/transaction is unknown.
  std::optional<std::vector<double>> trailing_window(const Transaction& tx,
                                                     std::size_t w,
                                                     ActorKind kind,
                                                     SignalKind signal) const {
    const std::vector<std::uint32_t>* list = actor_list(actor_id_of(tx, kind), kind);
    if (!list) return std::nullopt;
    const auto pos = position_of(*list, tx);
    if (!pos || *pos + 1 < w) return std::nullopt;
    const std::size_t first = *pos + 1 - w;
    std::vector<double> out;
    if (signal == SignalKind::amount) {
      out.reserve(w);
      for (std::size_t i = first; i <= *pos; ++i)
        out.push_back(transform_signal(txs_[(*list)[i]].amount));
    } else {
      out.reserve(w - 1);
      for (std::size_t i = first + 1; i <= *pos; ++i)
        out.push_back(transform_signal(static_cast<double>(
            txs_[(*list)[i]].timestamp - txs_[(*list)[i - 1]].timestamp)));
    }
    return out;
  }

  // Indices of the actor's transactions in (t - 24h, t], ending at tx.
  std::vector<std::uint32_t> window_24h(const Transaction& tx, ActorKind kind) const {
    std::vector<std::uint32_t> out;
    const std::vector<std::uint32_t>* list = actor_list(actor_id_of(tx, kind), kind);
    if (!list) return out;
    const auto pos = position_of(*list, tx);
    if (!pos) return out;
    const std::int64_t cutoff = tx.timestamp - kSecondsPerDay;  // open lower bound
    std::size_t i = *pos + 1;
    while (i > 0 && txs_[(*list)[i - 1]].timestamp > cutoff) --i;
    for (; i <= *pos; ++i) out.push_back((*list)[i]);
    return out;
  }

private:
  const std::vector<std::uint32_t>* actor_list(const std::string& id,
                                               ActorKind kind) const {
    const auto& map = kind == ActorKind::card_holder ? by_card_ : by_terminal_;
    auto it = map.find(id);
    return it == map.end() ? nullptr : &it->second;
  }

  // Position of tx within an actor's chronological list, by (timestamp, tx_id).
  std::optional<std::size_t> position_of(const std::vector<std::uint32_t>& list,
                                         const Transaction& tx) const {
    auto it = std::lower_bound(list.begin(), list.end(), tx,
                               [this](std::uint32_t i, const Transaction& t) {
                                 return tx_before(txs_[i], t);
                               });
    while (it != list.end() && txs_[*it].timestamp == tx.timestamp) {
      if (txs_[*it].tx_id == tx.tx_id)
        return static_cast<std::size_t>(it - list.begin());
      ++it;
    }
    return std::nullopt;
  }

  std::vector<Transaction> txs_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_card_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_terminal_;
};

}  // namespace fraudseq
