#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fraudseq/transaction.hpp"

using namespace fraudseq;
namespace fs = std::filesystem;

namespace {

Transaction make_tx(const std::string& id, const std::string& card,
                    const std::string& term, std::int64_t ts, double amount,
                    Label label = Label::genuine) {
  Transaction tx;
  tx.tx_id = id;
  tx.card_id = card;
  tx.terminal_id = term;
  tx.timestamp = ts;
  tx.amount = amount;
  tx.country = "BE";
  tx.mcc = "5411";
  tx.channel = Channel::ecommerce;
  tx.label = label;
  return tx;
}

std::string temp_path(const char* stem) {
  return (fs::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("date arithmetic") {
  CHECK(days_from_civil(1970, 1, 1) == 0);
  CHECK(days_from_civil(1970, 1, 2) == 1);
  CHECK(days_from_civil(2000, 3, 1) == 11017);
  CHECK(parse_date_utc("1970-01-01") == 0);
  // hand check: 45 years of 365 days + 11 leap days to 2015-01-01, then
  // 31 + 28 days into March
  CHECK(parse_date_utc("2015-03-01") == (16436 + 59) * kSecondsPerDay);
  CHECK_THROWS_AS(parse_date_utc("2015/03/01"), std::invalid_argument);
  CHECK_THROWS_AS(parse_date_utc("bad"), std::invalid_argument);
}

TEST_CASE("float formatting round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17, 0.0}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK_THROWS_AS(parse_double("12,5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_int64("1.5"), std::invalid_argument);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}

TEST_CASE("transaction csv round trip preserves everything") {
  std::vector<Transaction> txs = {
      make_tx("a", "c1", "m1", 100, 12.34),
      make_tx("b", "c1", "m2", 50, 0.07, Label::fraud),
      make_tx("c", "c2", "m1", 100, 99999.99),
  };
  const std::string path = temp_path("fraudseq_txs.csv");
  save_transactions(path, txs);
  auto loaded = load_transactions(path);
  REQUIRE(loaded.size() == 3);
  // loader sorts by (timestamp, tx_id)
  CHECK(loaded[0].tx_id == "b");
  CHECK(loaded[1].tx_id == "a");
  CHECK(loaded[2].tx_id == "c");
  CHECK(loaded[0].amount == 0.07);
  CHECK(loaded[0].label == Label::fraud);
  CHECK(loaded[1].channel == Channel::ecommerce);
  CHECK(loaded[2].country == "BE");
  fs::remove(path);
}

TEST_CASE("loader output is sorted by (timestamp, tx_id)") {
  std::vector<Transaction> txs;
  Rng rng(5);
  for (int i = 0; i < 200; ++i)
    txs.push_back(make_tx("t" + std::to_string(i), "c", "m",
                          static_cast<std::int64_t>(rng.uniform_index(50)), 1.0));
  const std::string path = temp_path("fraudseq_sorted.csv");
  save_transactions(path, txs);
  auto loaded = load_transactions(path);
  for (std::size_t i = 1; i < loaded.size(); ++i)
    CHECK_FALSE(tx_before(loaded[i], loaded[i - 1]));
  fs::remove(path);
}

TEST_CASE("loader rejects schema violations with line numbers") {
  const std::string path = temp_path("fraudseq_bad.csv");
  {
    std::ofstream out(path);
    out << kCsvHeader << '\n';
    out << "t1,c1,m1,100,12.5,BE,5411,EC,0\n";
    out << "t2,c1,m1,abc,12.5,BE,5411,EC,0\n";   // bad timestamp
    out << "t3,c1,m1,100,-3,BE,5411,EC,0\n";     // non-positive amount
    out << "t4,c1,m1,100,5,BE,5411,POS,0\n";     // unknown channel
    out << "t1,c1,m1,100,5,BE,5411,EC,0\n";      // duplicate id
    out << "t5,c1,m1,100,5,BE,5411,EC,2\n";      // bad label
  }
  try {
    load_transactions(path);
    FAIL("expected a schema exception");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("5 bad row(s)") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("line 6") != std::string::npos);
    CHECK(msg.find("duplicate tx_id") != std::string::npos);
  }
  fs::remove(path);
}

TEST_CASE("loader rejects a wrong header") {
  const std::string path = temp_path("fraudseq_hdr.csv");
  {
    std::ofstream out(path);
    out << "id,card,terminal\n";
  }
  CHECK_THROWS_WITH(load_transactions(path),
                    Catch::Matchers::ContainsSubstring("schema error"));
  fs::remove(path);
}

TEST_CASE("reference split covers the documented date ranges") {
  const DatasetSplit s = DatasetSplit::reference_2015();
  CHECK(s.train.begin == parse_date_utc("2015-03-01"));
  CHECK(s.train.end == parse_date_utc("2015-04-27") - 1);
  CHECK(s.validation.begin == s.train.end + 1);
  CHECK(s.validation.end == parse_date_utc("2015-05-01") - 1);
  CHECK(s.gap.begin == parse_date_utc("2015-05-01"));
  CHECK(s.gap.end == parse_date_utc("2015-05-08") - 1);
  CHECK(s.test.begin == parse_date_utc("2015-05-08"));
  CHECK(s.test.end == parse_date_utc("2015-06-01") - 1);
  CHECK(s.gap.end - s.gap.begin + 1 == 7 * kSecondsPerDay);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("split validation rejects a short gap and disordered ranges") {
  CHECK_THROWS_AS(DatasetSplit::from_dates("2015-03-01", "2015-04-26", "2015-04-30",
                                           "2015-05-02", "2015-05-31", 7),
                  std::invalid_argument);
  CHECK_THROWS_AS(DatasetSplit::from_dates("2015-03-01", "2015-02-01", "2015-04-30",
                                           "2015-05-08", "2015-05-31", 7),
                  std::invalid_argument);
  // a 7-day gap passes exactly
  CHECK_NOTHROW(DatasetSplit::from_dates("2015-03-01", "2015-04-26", "2015-04-30",
                                         "2015-05-08", "2015-05-31", 7));
}

TEST_CASE("partition routes each transaction and counts drops") {
  const DatasetSplit s = DatasetSplit::reference_2015();
  std::vector<Transaction> txs = {
      make_tx("a", "c", "m", s.train.begin, 1.0),
      make_tx("b", "c", "m", s.train.end, 1.0),
      make_tx("c", "c", "m", s.validation.begin, 1.0),
      make_tx("d", "c", "m", s.gap.begin + 5, 1.0),
      make_tx("e", "c", "m", s.test.end, 1.0),
      make_tx("f", "c", "m", s.train.begin - 1, 1.0),  // before everything
      make_tx("g", "c", "m", s.test.end + 1, 1.0),     // after everything
  };
  const Partition p = partition(txs, s);
  CHECK(p.train.size() == 2);
  CHECK(p.validation.size() == 1);
  CHECK(p.gap.size() == 1);
  CHECK(p.test.size() == 1);
  CHECK(p.dropped == 2);
  CHECK(p.warnings.empty());
}

TEST_CASE("partition warns on empty subsets") {
  const DatasetSplit s = DatasetSplit::reference_2015();
  std::vector<Transaction> txs = {make_tx("a", "c", "m", s.train.begin, 1.0)};
  const Partition p = partition(txs, s);
  REQUIRE(p.warnings.size() == 3);
  CHECK(p.warnings[0] == "validation subset is empty");
}
