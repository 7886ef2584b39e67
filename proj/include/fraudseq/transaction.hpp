#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "fraudseq/common.hpp"

namespace fraudseq {

enum class Channel : std::uint8_t { ecommerce, face_to_face };
enum class Label : std::uint8_t { genuine, fraud };

struct Transaction {
  std::string tx_id;
  std::string card_id;
  std::string terminal_id;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  double amount = 0.0;         // strictly positive
  std::string country;
  std::string mcc;
  Channel channel = Channel::ecommerce;
  Label label = Label::genuine;

  bool is_fraud() const { return label == Label::fraud; }
};

inline const char* channel_code(Channel c) {
  return c == Channel::ecommerce ? "EC" : "F2F";
}

inline Channel parse_channel(const std::string& s, bool* ok) {
  *ok = true;
  if (s == "EC") return Channel::ecommerce;
  if (s == "F2F") return Channel::face_to_face;
  *ok = false;
  return Channel::ecommerce;
}

inline const char kCsvHeader[] =
    "tx_id,card_id,terminal_id,timestamp,amount,country,mcc,channel,label";

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Orders by (timestamp, tx_id); the canonical transaction order everywhere.
inline bool tx_before(const Transaction& a, const Transaction& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.tx_id < b.tx_id;
}

inline std::optional<Transaction> parse_tx_row(const std::vector<std::string>& f,
                                               std::string* error) {
  if (f.size() != 9) {
    *error = "expected 9 fields, got " + std::to_string(f.size());
    return std::nullopt;
  }
  Transaction tx;
  tx.tx_id = f[0];
  tx.card_id = f[1];
  tx.terminal_id = f[2];
  bool ok = false;
  tx.timestamp = parse_int64(f[3], &ok);
  if (!ok) {
    *error = "unparseable timestamp '" + f[3] + "'";
    return std::nullopt;
  }
  tx.amount = parse_double(f[4], &ok);
  if (!ok) {
    *error = "unparseable amount '" + f[4] + "'";
    return std::nullopt;
  }
  if (!(tx.amount > 0.0)) {
    *error = "non-positive amount " + f[4];
    return std::nullopt;
  }
  tx.country = f[5];
  tx.mcc = f[6];
  tx.channel = parse_channel(f[7], &ok);
  if (!ok) {
    *error = "unknown channel '" + f[7] + "'";
    return std::nullopt;
  }
  if (f[8] == "0") {
    tx.label = Label::genuine;
  } else if (f[8] == "1") {
    tx.label = Label::fraud;
  } else {
    *error = "label must be 0 or 1, got '" + f[8] + "'";
    return std::nullopt;
  }
  if (tx.card_id.empty() || tx.terminal_id.empty()) {
    *error = "empty card_id or terminal_id";
    return std::nullopt;
  }
  return tx;
}

// Loads the canonical transaction CSV. Rows violating the contract abort the
// load with a message naming each bad line.
inline std::vector<Transaction> load_transactions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transaction file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw std::runtime_error(path + ": schema error, header must be '" +
                             std::string(kCsvHeader) + "'");
  std::vector<Transaction> txs;
  std::vector<std::string> errors;
  std::unordered_set<std::string> seen_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string err;
    auto tx = parse_tx_row(split_csv_line(line), &err);
    if (!tx) {
      errors.push_back("line " + std::to_string(line_no) + ": " + err);
      continue;
    }
    if (!seen_ids.insert(tx->tx_id).second) {
      errors.push_back("line " + std::to_string(line_no) + ": duplicate tx_id '" +
                       tx->tx_id + "'");
      continue;
    }
    txs.push_back(std::move(*tx));
  }
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << path << ": " << errors.size() << " bad row(s):";
    for (const auto& e : errors) msg << "\n  " << e;
    throw std::runtime_error(msg.str());
  }
  std::stable_sort(txs.begin(), txs.end(), tx_before);
  return txs;
}

inline void write_transaction_row(std::ostream& out, const Transaction& tx) {
  out << tx.tx_id << ',' << tx.card_id << ',' << tx.terminal_id << ','
      << tx.timestamp << ',' << format_double(tx.amount) << ',' << tx.country
      << ',' << tx.mcc << ',' << channel_code(tx.channel) << ','
      << (tx.label == Label::fraud ? '1' : '0') << '\n';
}

inline void save_transactions(const std::string& path,
                              const std::vector<Transaction>& txs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write transaction file: " + path);
  out << kCsvHeader << '\n';
  for (const auto& tx : txs) write_transaction_row(out, tx);
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Closed interval [begin, end] in epoch seconds.
struct TimeRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  bool contains(std::int64_t t) const { return begin <= t && t <= end; }
};

// Temporal split with a ground-truth delay gap between validation and test.
struct DatasetSplit {
  TimeRange train;
  TimeRange validation;
  TimeRange gap;
  TimeRange test;
  int gap_days = 7;

  void validate() const {
    if (!(train.begin <= train.end && validation.begin <= validation.end &&
          test.begin <= test.end))
      throw std::invalid_argument("split: range bounds out of order");
    if (!(train.end < validation.begin && validation.end < test.begin))
      throw std::invalid_argument("split: ranges must be ordered train < validation < test");
    if (test.begin - validation.end - 1 < gap_days * kSecondsPerDay)
      throw std::invalid_argument("split: gap between validation and test shorter than gap_days");
  }

  // Dates are inclusive; day boundaries at midnight UTC. The gap covers
  // everything strictly between validation end and test begin.
  static DatasetSplit from_dates(const std::string& train_begin,
                                 const std::string& train_end,
                                 const std::string& validation_end,
                                 const std::string& test_begin,
                                 const std::string& test_end, int gap_days = 7) {
    DatasetSplit s;
    s.gap_days = gap_days;
    s.train.begin = parse_date_utc(train_begin);
    s.train.end = parse_date_utc(train_end) + kSecondsPerDay - 1;
    s.validation.begin = s.train.end + 1;
    s.validation.end = parse_date_utc(validation_end) + kSecondsPerDay - 1;
    s.test.begin = parse_date_utc(test_begin);
    s.test.end = parse_date_utc(test_end) + kSecondsPerDay - 1;
    s.gap.begin = s.validation.end + 1;
    s.gap.end = s.test.begin - 1;
    s.validate();
    return s;
  }

  // The split used for the reference experiments (2015 Belgian period).
  static DatasetSplit reference_2015() {
    return from_dates("2015-03-01", "2015-04-26", "2015-04-30", "2015-05-08",
                      "2015-05-31", 7);
  }
};

struct Partition {
  std::vector<Transaction> train;
  std::vector<Transaction> validation;
  std::vector<Transaction> gap;  // feature history only, never for training
  std::vector<Transaction> test;
  std::size_t dropped = 0;  // outside every range
  std::vector<std::string> warnings;
};

inline Partition partition(const std::vector<Transaction>& txs,
                           const DatasetSplit& split) {
  split.validate();
  Partition p;
  for (const auto& tx : txs) {
    if (split.train.contains(tx.timestamp))
      p.train.push_back(tx);
    else if (split.validation.contains(tx.timestamp))
      p.validation.push_back(tx);
    else if (split.gap.contains(tx.timestamp))
      p.gap.push_back(tx);
    else if (split.test.contains(tx.timestamp))
      p.test.push_back(tx);
    else
      ++p.dropped;
  }
  if (p.train.empty()) p.warnings.push_back("train subset is empty");
  if (p.validation.empty()) p.warnings.push_back("validation subset is empty");
  if (p.gap.empty()) p.warnings.push_back("gap subset is empty");
  if (p.test.empty()) p.warnings.push_back("test subset is empty");
  return p;
}

}  // namespace fraudseq
