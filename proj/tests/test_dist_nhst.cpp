#include <doctest.h>

#include <cmath>
#include <vector>

#include "dnhst/dist_nhst.hpp"
#include "dnhst/errors.hpp"
#include "dnhst/point_nhst.hpp"
#include "dnhst/special_functions.hpp"

using namespace dnhst;

namespace {
const DegreesOfFreedom kNu19(19);
const DistributionalNull kQ05(0.05);
}  // namespace

TEST_CASE("design parsing") {
  CHECK(parse_design("one-sample") == ExperimentDesign::kOneSample);
  CHECK(parse_design("paired") == ExperimentDesign::kPaired);
  CHECK(parse_design("two_sample") == ExperimentDesign::kTwoSampleEqualN);
  CHECK(to_string(ExperimentDesign::kTwoSampleEqualN) == "two-sample");
  CHECK_THROWS_AS(parse_design("three-sample"), ArgumentError);
}

TEST_CASE("t statistic per design") {
  const auto paired = t_statistic({ExperimentDesign::kPaired, 10, 1.5, 2.0});
  CHECK(paired.t == doctest::Approx(2.3717082451262845).epsilon(1e-15));
  CHECK(paired.nu.value() == 9.0);

  const auto two = two_sample_summary(12, 5.0, 2.0, 12, 3.5, 1.0);
  CHECK(two.mean == 1.5);
  CHECK(two.sd == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
  const auto ts = t_statistic(two);
  CHECK(ts.nu.value() == 22.0);
  CHECK(ts.t == doctest::Approx(1.5 / (std::sqrt(2.5) * std::sqrt(2.0 / 12))).epsilon(1e-15));

  CHECK_THROWS_AS(two_sample_summary(12, 5.0, 2.0, 11, 3.5, 1.0), ArgumentError);
  CHECK_THROWS_AS(t_statistic({ExperimentDesign::kOneSample, 10, 1.0, 0.0}), DegenerateSampleError);

  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto one = one_sample_summary(xs);
  CHECK(one.n == 4);
  CHECK(one.mean == 2.5);
  CHECK(one.sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("distributional critical values and p") {
  CHECK(dist_t_crit(0.05, kNu19, 20, kQ05) == doctest::Approx(2.4453630731978415).epsilon(1e-14));
  CHECK(dist_z_crit(0.05, kNu19, 20, kQ05) ==
        doctest::Approx(2.4453630731978415 / std::sqrt(20.0)).epsilon(1e-14));
  CHECK(dist_p_value(2.445, kNu19, 20, kQ05) ==
        doctest::Approx(0.050023445989732967).epsilon(1e-13));
  CHECK(asymptotic_z_bound(0.05, DegreesOfFreedom(9), DistributionalNull(0.04)) ==
        doctest::Approx(0.36662258653124743).epsilon(1e-14));
  // p at t_crit is alpha
  const double tc = dist_t_crit(0.01, kNu19, 20, kQ05);
  CHECK(dist_p_value(tc, kNu19, 20, kQ05) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("z_crit tends to the asymptotic bound") {
  const DegreesOfFreedom nu(30);
  const double bound = asymptotic_z_bound(0.05, nu, kQ05);
  double previous = 1e300;
  for (double n : {10.0, 100.0, 1e4, 1e6}) {
    const double z = dist_z_crit(0.05, nu, n, kQ05);
    CHECK(z > bound);
    CHECK(z < previous);
    previous = z;
  }
  CHECK(previous == doctest::Approx(bound).epsilon(1e-4));
}

TEST_CASE("posterior update") {
  const auto post = posterior_update(0.8, 20, DistributionalNull(0.1));
  CHECK(post.shrinkage == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(post.mu_n == doctest::Approx(0.8 * 2.0 / 3.0).epsilon(1e-15));
  CHECK(post.var_n_over_sigma2 == doctest::Approx(2.0 / 3.0 / 20.0).epsilon(1e-15));
  const auto flat = posterior_update(0.8, 20, DistributionalNull(0.0));
  CHECK(flat.mu_n == 0.0);
  CHECK(flat.shrinkage == 0.0);
}

TEST_CASE("replication probability") {
  CHECK(replication_probability(0.0, 0.05, kNu19, 20, kQ05) ==
        doctest::Approx(0.030197934922971455).epsilon(1e-13));
  CHECK(replication_probability(4.0, 0.05, kNu19, 20, kQ05) ==
        doctest::Approx(0.36007177496377170).epsilon(1e-13));
  CHECK(replication_probability(-4.0, 0.05, kNu19, 20, kQ05) ==
        replication_probability(4.0, 0.05, kNu19, 20, kQ05));
  CHECK(replication_probability(3.0, 0.05, kNu19, 20, DistributionalNull(0.0)) ==
        doctest::Approx(0.05).epsilon(1e-14));
  // increasing in |t1|
  double previous = 0.0;
  for (double t = 0.0; t < 20.0; t += 0.5) {
    const double pr = replication_probability(t, 0.05, kNu19, 20, kQ05);
    CHECK(pr > previous);
    previous = pr;
  }
}

TEST_CASE("dist test report") {
  const auto r = dist_test(2.6832815729997476, kNu19, 20, 0.05, kQ05);
  CHECK(r.significant);
  CHECK(r.t_crit == doctest::Approx(2.4453630731978415).epsilon(1e-14));
  CHECK_FALSE(dist_test(2.4, kNu19, 20, 0.05, kQ05).significant);
  const auto from_summary =
      dist_test(ExperimentSummary{ExperimentDesign::kPaired, 10, 1.5, 2.0}, 0.05, kQ05);
  CHECK(from_summary.t_stat == doctest::Approx(2.3717082451262845).epsilon(1e-15));
  CHECK(from_summary.nu.value() == 9.0);
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(DistributionalNull(-0.1), ArgumentError);
  CHECK_THROWS_AS(dist_p_value(1.0, kNu19, 1, kQ05), ArgumentError);
  CHECK_THROWS_AS(dist_t_crit(0.6, kNu19, 20, kQ05), ArgumentError);
}
