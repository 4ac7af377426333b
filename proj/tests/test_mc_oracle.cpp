#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "dnhst/dist_nhst.hpp"
#include "dnhst/errors.hpp"
#include "dnhst/mc_oracle.hpp"

using namespace dnhst;

TEST_CASE("splitmix64 reference sequence") {
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(state) == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("trial streams are reproducible and distinct") {
  TrialRng a(42, 7);
  TrialRng b(42, 7);
  TrialRng c(42, 8);
  const double x = a.normal();
  CHECK(x == b.normal());
  CHECK(x != c.normal());
}

TEST_CASE("uniform and normal moments") {
  TrialRng rng(1, 0);
  const int n = 200000;
  double su = 0.0;
  double sz = 0.0;
  double sz2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.normal();
    sz += z;
    sz2 += z * z;
  }
  CHECK(std::fabs(su / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::fabs(sz / n) < 4.0 / std::sqrt(n));
  CHECK(std::fabs(sz2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("chi-square moments on both paths") {
  for (double nu : {5.0, 2.5, 1500.0}) {
    TrialRng rng(9, static_cast<std::uint64_t>(nu * 10));
    const int n = 40000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.chi_square(nu);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::fabs(mean - nu) < 4.0 * std::sqrt(2.0 * nu / n));
    CHECK(var == doctest::Approx(2.0 * nu).epsilon(0.05));
  }
  TrialRng rng(0, 0);
  CHECK_THROWS_AS(rng.chi_square(0.0), ArgumentError);
}

TEST_CASE("counts do not depend on thread count") {
  SimConfig cfg;
  cfg.n = 10;
  cfg.q_true = 0.05;
  cfg.trials = 5000;
  cfg.seed = 123;
  cfg.threads = 1;
  const auto one = simulate_fpr_rules(cfg, 0.05, 0.05);
  cfg.threads = 3;
  const auto three = simulate_fpr_rules(cfg, 0.05, 0.05);
  CHECK(one.absolute.hits == three.absolute.hits);
  CHECK(one.upper_tail.hits == three.upper_tail.hits);
  cfg.seed = 124;
  CHECK(simulate_fpr_rules(cfg, 0.05, 0.05).absolute.hits != one.absolute.hits);
}

TEST_CASE("fpr calibration for each design") {
  for (auto design : {ExperimentDesign::kOneSample, ExperimentDesign::kPaired,
                      ExperimentDesign::kTwoSampleEqualN}) {
    SimConfig cfg;
    cfg.design = design;
    cfg.n = 8;
    cfg.q_true = 0.1;
    cfg.sigma = 2.0;
    cfg.trials = 40000;
    cfg.seed = 5;
    const auto r = simulate_fpr_rules(cfg, 0.05, 0.1);
    CHECK(r.upper_tail.nominal == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(r.absolute.nominal == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(r.upper_tail.within(0.05, 4.0));
    CHECK(r.absolute.within(0.10, 4.0));
  }
}

TEST_CASE("mismatched q_test changes the nominal rate") {
  SimConfig cfg;
  cfg.n = 50;
  cfg.q_true = 0.05;
  cfg.trials = 20000;
  const auto r = simulate_fpr(cfg, 0.05, 0.0);
  CHECK(r.nominal > 0.3);
  CHECK(r.within(r.nominal, 4.0));
  const std::vector<int> ns{10, 40};
  const auto rows = fpr_vs_n(cfg, 0.05, ns, 0.0);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 10);
  CHECK(rows[0].report.rate < rows[1].report.rate);
}

TEST_CASE("replication simulation") {
  SimConfig cfg;
  cfg.n = 20;
  cfg.q_true = 0.05;
  cfg.trials = 40000;
  cfg.seed = 77;
  const auto r = simulate_replication(4.0, cfg, 0.05, ReplicationVariant::kSharedS);
  CHECK(r.calibration.nominal == doctest::Approx(0.36007177496377170).epsilon(1e-12));
  CHECK(r.calibration.within(r.calibration.nominal, 4.0));
  const auto neg = simulate_replication(-4.0, cfg, 0.05, ReplicationVariant::kSharedS);
  CHECK(neg.calibration.within(r.calibration.nominal, 4.0));
  const auto ind = simulate_replication(4.0, cfg, 0.05, ReplicationVariant::kIndependentS2);
  CHECK(ind.calibration.rate > 0.3);
}

TEST_CASE("report and validation") {
  const auto r = make_report(25, 100, 0.2);
  CHECK(r.rate == 0.25);
  CHECK(r.mc_se == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
  CHECK(r.within(0.2, 2.0));
  CHECK_FALSE(r.within(0.1, 3.0));
  SimConfig bad;
  bad.n = 1;
  CHECK_THROWS_AS(validate(bad), ArgumentError);
  bad.n = 5;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(validate(bad), ArgumentError);
  bad.sigma = 1.0;
  bad.trials = 0;
  CHECK_THROWS_AS(validate(bad), ArgumentError);
}

TEST_CASE("csv output") {
  SimConfig cfg;
  cfg.trials = 100;
  const std::vector<FprCsvRow> rows{{cfg, 0.05, 0.0, RejectionRule::kUpperTail,
                                     make_report(5, 100, 0.05)}};
  std::ostringstream out;
  write_fpr_csv(out, rows);
  CHECK(out.str() ==
        "design,n,q_true,q_test,alpha,sigma,seed,rule,rate,mc_se,trials,nominal\n"
        "one-sample,20,0,0,0.05,1,0,upper-tail,0.05,0.02179449472,100,0.05\n");
}
