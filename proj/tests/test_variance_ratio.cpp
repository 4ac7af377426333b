#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dnhst/errors.hpp"
#include "dnhst/variance_ratio.hpp"
#include "oracles.hpp"

using namespace dnhst;

namespace {

std::vector<MultiSiteRecord> synthetic(std::uint64_t seed, int sites, int measures, int values) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<MultiSiteRecord> out;
  for (int m = 0; m < measures; ++m) {
    for (int s = 0; s < sites; ++s) {
      const double mu = 3.0 * m + 0.4 * z(gen);
      const double sd = 0.5 + 0.25 * s;
      for (int i = 0; i < values; ++i) {
        out.push_back({"s" + std::to_string(s), "m" + std::to_string(m), mu + sd * z(gen)});
      }
    }
  }
  return out;
}

// q per (measure, site) by direct definition.
std::map<std::pair<std::string, std::string>, double> brute_q(
    const std::vector<MultiSiteRecord>& records) {
  std::map<std::string, std::map<std::string, std::vector<double>>> cells;
  for (const auto& r : records) cells[r.measure][r.site].push_back(r.value);
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [m, sites] : cells) {
    std::vector<double> means;
    for (const auto& [s, v] : sites) means.push_back(static_cast<double>(oracle::mean(v)));
    const double between = oracle::variance(means);
    for (const auto& [s, v] : sites) out[{m, s}] = between / oracle::variance(v);
  }
  return out;
}

const char* kCsv =
    "# comment\n"
    "value,site,measure\n"
    "1.0,A,x\n"
    "2.0,A,x\n"
    "4.0,A,x\n"
    "\n"
    "3.0,B,x\n"
    "5.0,B,x\n"
    "bad,B,x\n"
    "7.0,B\n"
    "9.0,C,x\n";

}  // namespace

TEST_CASE("csv ingest with header in any order") {
  std::istringstream in(kCsv);
  const auto ds = ingest_csv(in);
  CHECK(ds.measures() == std::vector<std::string>{"x"});
  CHECK(ds.sites("x") == std::vector<std::string>{"A", "B"});
  CHECK(ds.observation_count() == 5);
  REQUIRE(ds.rejected_rows().size() == 2);
  CHECK(ds.rejected_rows()[0].line == 9);
  CHECK(ds.rejected_rows()[1].line == 10);
  REQUIRE(ds.excluded_cells().size() == 1);
  CHECK(ds.excluded_cells()[0].site == "C");
}

TEST_CASE("ingest errors") {
  std::istringstream empty("");
  CHECK_THROWS_AS(ingest_csv(empty), DataError);
  std::istringstream header_only("site,measure,value\n");
  CHECK_THROWS_AS(ingest_csv(header_only), DataError);
  std::istringstream bad_header("site,item,value\nA,x,1\n");
  CHECK_THROWS_AS(ingest_csv(bad_header), DataError);
  std::istringstream one_site("site,measure,value\nA,x,1\nA,x,2\n");
  CHECK_THROWS_AS(ingest_csv(one_site), DataError);
  CHECK_THROWS_AS(ingest_csv_file("/nonexistent/file.csv"), DataError);
}

TEST_CASE("cell q matches brute force") {
  const auto records = synthetic(11, 5, 4, 20);
  const auto ds = ingest(records);
  const auto expect = brute_q(records);
  const auto table = all_cells(ds);
  REQUIRE(table.cells.size() == expect.size());
  for (const auto& c : table.cells) {
    CHECK(c.q == doctest::Approx(expect.at({c.measure, c.site})).epsilon(1e-12));
    CHECK(cell_q(ds, c.measure, c.site).q == c.q);
  }
  CHECK_THROWS_AS(cell_q(ds, "m0", "nowhere"), DataError);
  CHECK_THROWS_AS(cell_q(ds, "nothing", "s0"), DataError);
}

TEST_CASE("population denominator") {
  const std::vector<double> v{1.0, 2.0, 4.0, 7.0};
  CHECK(sample_variance(v) == doctest::Approx(oracle::variance(v)).epsilon(1e-15));
  CHECK(sample_variance(v, VarianceDenominator::kPopulation) ==
        doctest::Approx(oracle::variance(v, true)).epsilon(1e-15));
}

TEST_CASE("zero within-site variance") {
  std::vector<MultiSiteRecord> r{{"A", "x", 1.0}, {"A", "x", 1.0}, {"B", "x", 2.0}, {"B", "x", 3.0}};
  const auto ds = ingest(r);
  CHECK_THROWS_AS(cell_q(ds, "x", "A"), DegenerateSampleError);
  const auto table = all_cells(ds);
  CHECK(table.cells.size() == 1);
  CHECK(table.degenerate.size() == 1);
  const auto summary = summarize(ds, {});
  CHECK_FALSE(summary.warnings.empty());
}

TEST_CASE("type 7 quantiles") {
  const std::vector<double> v{5.0, 1.0, 3.0, 2.0, 4.0};
  CHECK(quantile_type7(v, 0.0) == 1.0);
  CHECK(quantile_type7(v, 1.0) == 5.0);
  CHECK(quantile_type7(v, 0.5) == 3.0);
  CHECK(quantile_type7(v, 0.1) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(quantile_type7(std::vector<double>{2.5}, 0.3) == 2.5);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u;
  std::vector<double> w(37);
  for (auto& x : w) x = u(gen);
  for (double p : {0.025, 0.33, 0.975}) {
    CHECK(quantile_type7(w, p) == doctest::Approx(oracle::quantile(w, p)).epsilon(1e-12));
  }
}

TEST_CASE("group spec parsing") {
  std::istringstream in(
      "# groups\n[a]\nset = 1\nmeasures = m0, m1\n\n[b]\nmeasures = m2\n");
  const auto groups = parse_group_spec(in);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].group == "a");
  CHECK(groups[0].measures == std::vector<std::string>{"m0", "m1"});
  CHECK(groups[0].set_label == std::optional<std::string>("1"));
  CHECK_FALSE(groups[1].set_label.has_value());

  std::istringstream dup("[a]\nmeasures = m0\n[b]\nmeasures = m0\n");
  CHECK_THROWS_AS(parse_group_spec(dup), DataError);
  std::istringstream empty_group("[a]\nset = 1\n");
  CHECK_THROWS_AS(parse_group_spec(empty_group), DataError);
  std::istringstream junk("measures = m0\n");
  CHECK_THROWS_AS(parse_group_spec(junk), DataError);
}

TEST_CASE("summary rows and pooling") {
  const auto records = synthetic(5, 4, 4, 10);
  const auto ds = ingest(records);
  const std::vector<MeasureGroupSpec> groups{
      {"g01", {"m0", "m1"}, "1"}, {"g2", {"m2"}, "1"}, {"g3", {"m3"}, "2"}};
  const auto result = summarize(ds, groups);
  REQUIRE(result.rows.size() == 6);
  const std::vector<std::string> names{"g01", "g2", "g3", "all 1", "all 2", "all"};
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(result.rows[i].group == names[i]);

  const auto expect = brute_q(records);
  std::vector<double> g01;
  std::vector<double> all;
  for (const auto& [key, q] : expect) {
    if (key.first == "m0" || key.first == "m1") g01.push_back(q);
    all.push_back(q);
  }
  CHECK(result.rows[0].datapoints == g01.size());
  CHECK(result.rows[0].mean_q == doctest::Approx(static_cast<double>(oracle::mean(g01))).epsilon(1e-12));
  CHECK(result.rows[0].q_lo == doctest::Approx(oracle::quantile(g01, 0.025)).epsilon(1e-12));
  CHECK(result.rows[5].datapoints == 16);
  CHECK(result.rows[5].q_hi == doctest::Approx(oracle::quantile(all, 0.975)).epsilon(1e-12));

  const std::vector<MeasureGroupSpec> unknown{{"g", {"m9"}, std::nullopt}};
  CHECK_THROWS_AS(summarize(ds, unknown), DataError);
}

TEST_CASE("site filter recomputes between-site variance") {
  const auto records = synthetic(8, 5, 2, 12);
  const auto ds = ingest(records);
  const auto keep = [](std::string_view s) { return s != "s4" && s != "s3"; };
  const auto result = summarize(ds, {}, keep);
  std::vector<MultiSiteRecord> kept;
  for (const auto& r : records) {
    if (keep(r.site)) kept.push_back(r);
  }
  const auto expect = brute_q(kept);
  REQUIRE(result.cells.size() == expect.size());
  for (const auto& c : result.cells) {
    CHECK(c.q == doctest::Approx(expect.at({c.measure, c.site})).epsilon(1e-12));
  }
  // a filter leaving one site drops the measure with a warning
  const auto single = summarize(ds, {}, [](std::string_view s) { return s == "s0"; });
  CHECK(single.rows.empty());
  CHECK(single.warnings.size() >= 2);
}

TEST_CASE("row order does not matter") {
  auto records = synthetic(21, 3, 2, 8);
  const auto a = all_cells(ingest(records));
  std::mt19937_64 gen(1);
  std::shuffle(records.begin(), records.end(), gen);
  const auto b = all_cells(ingest(records));
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i].q == b.cells[i].q);
}

TEST_CASE("histogram") {
  const std::vector<double> qs{0.0, 0.005, 0.01, 0.019, 0.035};
  const auto bins = histogram(qs);
  REQUIRE(bins.size() == 4);
  CHECK(bins[0].count == 2);
  CHECK(bins[1].count == 2);
  CHECK(bins[2].count == 0);
  CHECK(bins[3].count == 1);
  CHECK(bins[3].lo == doctest::Approx(0.03));
  CHECK_THROWS_AS(histogram(std::vector<double>{-1.0}), ArgumentError);
}

TEST_CASE("csv writers") {
  std::ostringstream out;
  const std::vector<GroupSummary> rows{{"all, set", 3, 0.5, 0.1, 0.9}};
  write_summary_csv(out, rows);
  CHECK(out.str() == "group,datapoints,mean_q,q025,q975\n\"all, set\",3,0.5,0.1,0.9\n");
}
