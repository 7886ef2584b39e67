#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fraudseq/features.hpp"
#include "fraudseq/syngen.hpp"

using namespace fraudseq;

namespace {

Transaction make_tx(const std::string& id, const std::string& card,
                    const std::string& term, std::int64_t ts, double amount,
                    const std::string& country = "BE", Channel ch = Channel::ecommerce) {
  Transaction tx;
  tx.tx_id = id;
  tx.card_id = card;
  tx.terminal_id = term;
  tx.timestamp = ts;
  tx.amount = amount;
  tx.country = country;
  tx.mcc = "5411";
  tx.channel = ch;
  return tx;
}

// O(n^2) oracle: rescan the full list for every aggregate of every tx.
AggregatedFeatures rescan_aggregates(const Transaction& tx,
                                     const std::vector<Transaction>& all) {
  AggregatedFeatures a;
  for (const auto& h : all) {
    const bool in_window = h.timestamp > tx.timestamp - kSecondsPerDay &&
                           (h.timestamp < tx.timestamp ||
                            (h.timestamp == tx.timestamp && !tx_before(tx, h)));
    if (!in_window) continue;
    if (h.card_id == tx.card_id) {
      a.aggch1 += 1;
      a.aggch2 += h.amount;
      if (h.country == tx.country) {
        a.aggch3 += 1;
        a.aggch4 += h.amount;
      }
    }
    if (h.terminal_id == tx.terminal_id) {
      a.aggtm1 += 1;
      a.aggtm2 += h.amount;
      if (h.channel == tx.channel) {
        a.aggtm3 += 1;
        a.aggtm4 += h.amount;
      }
    }
  }
  return a;
}

GaussianHmm unit_hmm() {
  GaussianHmm hmm;
  hmm.n_states = 1;
  hmm.pi = {1.0};
  hmm.trans = {1.0};
  hmm.means = {0.0};
  hmm.stds = {1.0};
  return hmm;
}

}  // namespace

TEST_CASE("hand-computed 24h aggregates") {
  std::vector<Transaction> txs = {
      make_tx("a", "c1", "m1", 0, 10.0, "BE"),
      make_tx("b", "c1", "m2", 3600, 20.0, "FR"),
      make_tx("c", "c2", "m1", 7200, 5.0, "BE"),
      make_tx("d", "c1", "m1", 80000, 40.0, "BE"),
      make_tx("e", "c1", "m1", 89999, 8.0, "BE"),  // "a" now out of window
  };
  const HistoryIndex idx(txs);
  const AggregatedFeatures d = compute_aggregates(txs[3], idx);
  CHECK(d.aggch1 == 3);            // a, b, d
  CHECK(d.aggch2 == 70.0);
  CHECK(d.aggch3 == 2);            // a, d in BE
  CHECK(d.aggch4 == 50.0);
  CHECK(d.aggtm1 == 3);            // a, c, d on m1
  CHECK(d.aggtm2 == 55.0);
  const AggregatedFeatures e = compute_aggregates(txs[4], idx);
  CHECK(e.aggch1 == 3);            // b, d, e: "a" fell out of the 24h window
  CHECK(e.aggch2 == 68.0);
}

TEST_CASE("aggregates match the quadratic rescan exactly on generated data") {
  GeneratorConfig cfg;
  cfg.n_cards = 50;
  cfg.n_terminals = 12;
  cfg.days = 20;
  cfg.fraud_rate = 5.0;
  cfg.channel_mix = 0.5;
  const auto txs = generate(cfg);
  REQUIRE(txs.size() > 500);
  const HistoryIndex idx(txs);
  for (std::size_t i = 0; i < txs.size(); i += 3) {
    const AggregatedFeatures fast = compute_aggregates(txs[i], idx);
    const AggregatedFeatures slow = rescan_aggregates(txs[i], txs);
    CHECK(fast.aggch1 == slow.aggch1);
    CHECK(fast.aggch2 == slow.aggch2);
    CHECK(fast.aggch3 == slow.aggch3);
    CHECK(fast.aggch4 == slow.aggch4);
    CHECK(fast.aggtm1 == slow.aggtm1);
    CHECK(fast.aggtm2 == slow.aggtm2);
    CHECK(fast.aggtm3 == slow.aggtm3);
    CHECK(fast.aggtm4 == slow.aggtm4);
  }
}

TEST_CASE("calendar features") {
  CHECK(hour_of_day(0) == 0);
  CHECK(hour_of_day(3600 * 13 + 59) == 13);
  CHECK(day_of_week(0) == 3);                       // 1970-01-01 was a Thursday
  CHECK(day_of_week(parse_date_utc("2015-03-01")) == 6);  // a Sunday
  CHECK(day_of_week(parse_date_utc("2015-03-02")) == 0);  // Monday
}

TEST_CASE("label encoder assigns first-appearance codes, 0 for unseen") {
  LabelEncoder enc;
  enc.fit_value("BE");
  enc.fit_value("FR");
  enc.fit_value("BE");
  enc.fit_value("NL");
  CHECK(enc.size() == 3);
  CHECK(enc.encode("BE") == 1.0);
  CHECK(enc.encode("FR") == 2.0);
  CHECK(enc.encode("NL") == 3.0);
  CHECK(enc.encode("US") == 0.0);
  const auto table = enc.table();
  REQUIRE(table.size() == 3);
  CHECK(table[0].first == "BE");
  CHECK(table[2].second == 3);
}

TEST_CASE("feature set names parse into the right blocks") {
  CHECK_FALSE(parse_feature_set("raw").agg_ch);
  CHECK_FALSE(parse_feature_set("raw").hmm);
  CHECK(parse_feature_set("raw+aggCH").agg_ch);
  CHECK_FALSE(parse_feature_set("raw+aggCH").agg_tm);
  CHECK(parse_feature_set("raw+allagg").agg_tm);
  CHECK(parse_feature_set("raw+HMM").hmm);
  CHECK(parse_feature_set("raw+allagg+HMM").hmm);
  CHECK(parse_feature_set("raw+allagg+HMM").agg_tm);
  CHECK_THROWS_AS(parse_feature_set("raw+aggTM"), std::invalid_argument);
  CHECK_THROWS_AS(parse_missing_strategy("drop"), std::invalid_argument);
  CHECK(parse_missing_strategy("stacked_rf") == MissingStrategy::stacked_rf);
}

TEST_CASE("hmm features flag structural missing and respect the transform tag") {
  std::vector<Transaction> txs;
  for (int i = 0; i < 5; ++i)
    txs.push_back(make_tx("t" + std::to_string(i), "c1", "m1", i * 1000, 10.0 + i));
  txs.push_back(make_tx("n", "c2", "m9", 10000, 3.0));  // newcomer
  const HistoryIndex idx(txs);
  ModelBank bank;
  for (auto& m : bank) m = unit_hmm();

  const HmmFeatureSet full = compute_hmm_features(txs[4], idx, bank, 3);
  for (bool p : full.present) CHECK(p);
  // oracle: 1-state unit HMM loglik is the sum of standard-normal log pdfs
  const auto w = idx.trailing_window(txs[4], 3, ActorKind::card_holder, SignalKind::amount);
  double expect = 0.0;
  for (double x : *w) expect += std::log(gaussian_pdf(x, 0.0, 1.0));
  CHECK_THAT(full.loglik[0], Catch::Matchers::WithinRel(expect, 1e-12));

  const HmmFeatureSet missing = compute_hmm_features(txs[5], idx, bank, 3);
  for (bool p : missing.present) CHECK_FALSE(p);
  const auto filled = apply_default0(missing);
  for (double v : filled) CHECK(v == 0.0);

  ModelBank bad = bank;
  bad[0].transform_tag = "identity";
  CHECK_THROWS_WITH(compute_hmm_features(txs[4], idx, bad, 3),
                    Catch::Matchers::ContainsSubstring("transform"));
}

TEST_CASE("assemble lays out columns per feature set and handles exclude") {
  std::vector<Transaction> txs;
  for (int i = 0; i < 6; ++i)
    txs.push_back(make_tx("t" + std::to_string(i), "c1", "m1", i * 1000, 10.0));
  txs.push_back(make_tx("n", "c2", "m2", 4500, 3.0));
  txs[2].label = Label::fraud;
  const HistoryIndex idx(txs);
  std::map<std::size_t, ModelBank> banks;
  for (auto& m : banks[3]) m = unit_hmm();
  const auto records = compute_feature_records(txs, idx, banks);
  const Encoders enc = Encoders::fit(txs);

  const FeatureMatrix raw =
      assemble(txs, records, enc, parse_feature_set("raw"), MissingStrategy::default0);
  CHECK(raw.column_names ==
        std::vector<std::string>{"amount", "hour", "day_of_week", "country", "mcc",
                                 "channel"});
  CHECK(raw.rows.size() == 7);
  CHECK(raw.labels[2] == 1);
  CHECK(raw.rows[0][0] == 10.0);
  CHECK(raw.rows[0][5] == 1.0);  // e-commerce encodes as 1

  const FeatureMatrix all = assemble(txs, records, enc,
                                     parse_feature_set("raw+allagg+HMM"),
                                     MissingStrategy::default0, 3);
  REQUIRE(all.column_names.size() == 6 + 8 + 8);
  CHECK(all.column_names[6] == "aggch1");
  CHECK(all.column_names[10] == "aggtm1");
  CHECK(all.column_names[14] == "hmm1_ch_amount_genuine");
  CHECK(all.rows.size() == 7);

  const FeatureMatrix excl = assemble(txs, records, enc,
                                      parse_feature_set("raw+HMM"),
                                      MissingStrategy::exclude, 3);
  // c1 rows gain full history from index 2 on (window 3); the c2 row and the
  // first two c1 rows are dropped
  CHECK(excl.rows.size() < 7);
  for (std::size_t r = 0; r < excl.rows.size(); ++r) {
    const auto& fs = records[excl.tx_indices[r]].hmm_by_window.at(3);
    for (bool p : fs.present) CHECK(p);
  }

  CHECK_THROWS_AS(assemble(txs, records, enc, parse_feature_set("raw+HMM"),
                           MissingStrategy::weighted_pr, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble(txs, records, enc, parse_feature_set("raw+HMM"),
                           MissingStrategy::default0, 4),
                  std::invalid_argument);  // no bank for window 4
}
