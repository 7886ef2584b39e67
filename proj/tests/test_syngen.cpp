#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <sstream>

#include "fraudseq/syngen.hpp"

using namespace fraudseq;

namespace {

GeneratorConfig small_config(std::uint64_t seed = 1) {
  GeneratorConfig cfg;
  cfg.n_cards = 120;
  cfg.n_terminals = 30;
  cfg.days = 60;
  cfg.fraud_rate = 5.0;
  cfg.seed = seed;
  return cfg;
}

std::string serialize(const std::vector<Transaction>& txs) {
  std::ostringstream out;
  for (const auto& tx : txs) write_transaction_row(out, tx);
  return out.str();
}

}  // namespace

TEST_CASE("generator is deterministic for a fixed config") {
  const auto a = generate(small_config());
  const auto b = generate(small_config());
  CHECK(serialize(a) == serialize(b));
  const auto c = generate(small_config(2));
  CHECK(serialize(a) != serialize(c));
}

TEST_CASE("generated stream satisfies the schema contract") {
  const auto cfg = small_config();
  const auto txs = generate(cfg);
  REQUIRE(txs.size() > 1000);
  const std::int64_t t0 = parse_date_utc(cfg.start_date);
  const std::int64_t t1 = t0 + cfg.days * kSecondsPerDay;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const auto& tx = txs[i];
    CHECK(ids.insert(tx.tx_id).second);
    CHECK(tx.amount > 0.0);
    CHECK(tx.timestamp >= t0);
    CHECK(tx.timestamp < t1 + kSecondsPerDay);  // episodes may run over slightly
    CHECK_FALSE(tx.card_id.empty());
    CHECK_FALSE(tx.terminal_id.empty());
    if (i > 0) CHECK_FALSE(tx_before(tx, txs[i - 1]));
  }
}

TEST_CASE("fraud prevalence lands near the configured rate") {
  auto check_rate = [](double per_mille) {
    auto cfg = small_config();
    cfg.fraud_rate = per_mille;
    const auto txs = generate(cfg);
    std::size_t frauds = 0;
    for (const auto& tx : txs) frauds += tx.is_fraud();
    const double observed = 1000.0 * static_cast<double>(frauds) / txs.size();
    INFO("target " << per_mille << " observed " << observed);
    CHECK(observed > 0.4 * per_mille);
    CHECK(observed < 2.5 * per_mille);
  };
  check_rate(3.7);
  check_rate(10.0);
}

TEST_CASE("channel mix is exact at the extremes") {
  auto cfg = small_config();
  cfg.channel_mix = 1.0;
  for (const auto& tx : generate(cfg)) CHECK(tx.channel == Channel::ecommerce);
  cfg.channel_mix = 0.0;
  for (const auto& tx : generate(cfg)) CHECK(tx.channel == Channel::face_to_face);
}

TEST_CASE("channel mix does not disturb amounts, times, or labels") {
  auto ec = small_config();
  ec.channel_mix = 1.0;
  auto f2f = small_config();
  f2f.channel_mix = 0.0;
  const auto a = generate(ec);
  const auto b = generate(f2f);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].timestamp == b[i].timestamp);
    CHECK(a[i].amount == b[i].amount);
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].card_id == b[i].card_id);
  }
}

TEST_CASE("fraud episodes concentrate on few terminals") {
  const auto txs = generate(small_config());
  std::set<std::string> fraud_terms, all_terms;
  std::size_t frauds = 0;
  for (const auto& tx : txs) {
    all_terms.insert(tx.terminal_id);
    if (tx.is_fraud()) {
      fraud_terms.insert(tx.terminal_id);
      ++frauds;
    }
  }
  REQUIRE(frauds > 20);
  // most episodes land on the small compromised pool, so fraud touches far
  // fewer terminals than the full population
  CHECK(fraud_terms.size() * 2 < all_terms.size());
}

TEST_CASE("fraud episodes look like probe-then-spend bursts") {
  auto cfg = small_config();
  const auto txs = generate(cfg);
  // group frauds per card and check the intra-episode gaps are short
  std::map<std::string, std::vector<const Transaction*>> by_card;
  for (const auto& tx : txs)
    if (tx.is_fraud()) by_card[tx.card_id].push_back(&tx);
  std::size_t short_gaps = 0, gaps = 0;
  for (const auto& [card, list] : by_card) {
    for (std::size_t i = 1; i < list.size(); ++i) {
      const std::int64_t dt = list[i]->timestamp - list[i - 1]->timestamp;
      ++gaps;
      short_gaps += dt < 3600;
    }
  }
  REQUIRE(gaps > 0);
  CHECK(static_cast<double>(short_gaps) / gaps > 0.7);
}

TEST_CASE("presets differ only where intended") {
  const auto ec = ecommerce_preset(9);
  CHECK(ec.fraud_rate == 3.7);
  CHECK(ec.channel_mix == 1.0);
  CHECK(ec.seed == 9);
  const auto f2f = face_to_face_preset(9);
  CHECK(f2f.fraud_rate == 0.2);
  CHECK(f2f.channel_mix == 0.0);
}

TEST_CASE("config validation catches bad values") {
  auto cfg = small_config();
  cfg.n_cards = 0;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.fraud_rate = -1;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.channel_mix = 1.5;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}
