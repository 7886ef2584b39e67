#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "fraudseq/common.hpp"
#include "fraudseq/eval.hpp"

using namespace fraudseq;
namespace fs = std::filesystem;

TEST_CASE("pr curve matches a hand-computed table") {
  // scores sorted: 0.9(+), 0.8(-), 0.7(+), 0.6(+), 0.5(-), 0.4(-)
  const std::vector<double> scores = {0.7, 0.9, 0.4, 0.8, 0.6, 0.5};
  const std::vector<int> labels = {1, 1, 0, 0, 1, 0};
  const PrCurve c = pr_curve(scores, labels);
  REQUIRE(c.points.size() == 6);
  CHECK(c.prevalence == 0.5);
  // step-by-step: R,P pairs (1/3,1), (1/3,1/2), (2/3,2/3), (1,3/4), (1,3/5), (1,1/2)
  CHECK_THAT(c.points[0].recall, Catch::Matchers::WithinAbs(1.0 / 3, 1e-12));
  CHECK(c.points[0].precision == 1.0);
  CHECK(c.points[1].precision == 0.5);
  CHECK_THAT(c.points[3].precision, Catch::Matchers::WithinAbs(0.75, 1e-12));
  // AP = (1/3)*1 + 0*(1/2) + (1/3)*(2/3) + (1/3)*(3/4) + 0 + 0
  const double expect = (1.0 / 3) + (1.0 / 3) * (2.0 / 3) + (1.0 / 3) * 0.75;
  CHECK_THAT(c.auc, Catch::Matchers::WithinAbs(expect, 1e-12));
}

TEST_CASE("tied scores form a single threshold group") {
  const std::vector<double> scores = {0.5, 0.5, 0.5, 0.2};
  const std::vector<int> labels = {1, 0, 1, 0};
  const PrCurve c = pr_curve(scores, labels);
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].recall == 1.0);
  CHECK_THAT(c.points[0].precision, Catch::Matchers::WithinAbs(2.0 / 3, 1e-12));
  CHECK_THAT(c.auc, Catch::Matchers::WithinAbs(2.0 / 3, 1e-12));
}

TEST_CASE("a perfect ranking scores exactly 1") {
  const std::vector<double> scores = {0.9, 0.8, 0.3, 0.2, 0.1};
  const std::vector<int> labels = {1, 1, 0, 0, 0};
  CHECK(pr_auc(scores, labels) == 1.0);
}

TEST_CASE("a constant classifier scores exactly the prevalence") {
  std::vector<double> scores(1000, 0.5);
  std::vector<int> labels(1000, 0);
  for (int i = 0; i < 100; ++i) labels[i * 10] = 1;
  CHECK(pr_auc(scores, labels) == 0.1);
}

TEST_CASE("random scores land near the prevalence") {
  Rng rng(77);
  const std::size_t n = 10000;
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = rng.bernoulli(0.1) ? 1 : 0;
  }
  const double auc = pr_auc(scores, labels);
  CHECK(auc > 0.08);
  CHECK(auc < 0.12);
}

TEST_CASE("pr is undefined without positives") {
  CHECK_THROWS_AS(pr_auc({0.1, 0.2}, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(pr_auc({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(pr_auc({0.1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("run summaries use the population standard deviation") {
  const RunSummary s = summarize_runs("x", {0.2, 0.4, 0.6});
  CHECK_THAT(s.mean_auc, Catch::Matchers::WithinAbs(0.4, 1e-12));
  // population std of {0.2,0.4,0.6} = sqrt(0.08/3)
  CHECK_THAT(s.std_auc, Catch::Matchers::WithinAbs(std::sqrt(0.08 / 3.0), 1e-12));
  CHECK(s.n_runs == 3);
  CHECK_THROWS_AS(summarize_runs("x", {}), std::invalid_argument);
}

TEST_CASE("relative increase formats with one decimal") {
  RunSummary base{"raw", 0.343, 0.0, 3};
  RunSummary with{"raw+HMM", 0.375, 0.0, 3};
  const ComparisonRow row = compare_feature_set("raw", base, with);
  CHECK(format_percent(row.relative_increase) == "+9.3%");

  RunSummary low{"raw", 0.082, 0.0, 3};
  RunSummary high{"raw+HMM", 0.152, 0.0, 3};
  CHECK(format_percent(compare_feature_set("raw", low, high).relative_increase) ==
        "+85.4%");
  CHECK(format_percent(compare_feature_set("raw", with, base).relative_increase) ==
        "-8.5%");
}

TEST_CASE("comparison artifacts render and save") {
  RunSummary base{"raw", 0.343, 0.011, 3};
  RunSummary with{"raw+HMM", 0.375, 0.009, 3};
  const std::vector<ComparisonRow> rows = {compare_feature_set("raw", base, with)};
  const std::string text = render_comparison_text(rows);
  CHECK(text.find("raw") != std::string::npos);
  CHECK(text.find("+9.3%") != std::string::npos);
  CHECK(text.find("0.3750") != std::string::npos);

  const std::string path = (fs::temp_directory_path() / "fraudseq_cmp.csv").string();
  save_comparison_csv(path, rows);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header.find("relative_increase_pct") != std::string::npos);
  CHECK(line.find("9.3") != std::string::npos);
  fs::remove(path);
}

TEST_CASE("pr curve csv round trip") {
  const std::vector<double> scores = {0.9, 0.1, 0.5};
  const std::vector<int> labels = {1, 0, 1};
  const PrCurve c = pr_curve(scores, labels);
  const std::string path = (fs::temp_directory_path() / "fraudseq_pr.csv").string();
  save_pr_curve(path, c);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "threshold,precision,recall");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == c.points.size());
  fs::remove(path);
}
