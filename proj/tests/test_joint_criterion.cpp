#include <doctest.h>

#include <cmath>

#include "dnhst/errors.hpp"
#include "dnhst/joint_criterion.hpp"
#include "dnhst/special_functions.hpp"
#include "oracles.hpp"

using namespace dnhst;

namespace {
const DegreesOfFreedom kNu19(19);
const Criteria kHalf(0.05, 0.5);
}  // namespace

TEST_CASE("criteria validation") {
  CHECK_NOTHROW(Criteria(0.05, 0.06));
  CHECK_THROWS_AS(Criteria(0.05, 0.05), ArgumentError);
  CHECK_THROWS_AS(Criteria(0.05, 0.01), ArgumentError);
  CHECK_THROWS_AS(Criteria(0.05, 1.0), ArgumentError);
  CHECK_THROWS_AS(Criteria(0.0, 0.5), ArgumentError);
}

TEST_CASE("t_rep frozen value and divergence") {
  CHECK(t_rep(kHalf, kNu19, 20, 0.1) == doctest::Approx(4.4924188238841471).epsilon(1e-14));
  CHECK_THROWS_AS(t_rep(kHalf, kNu19, 20, 0.0), DivergenceError);
  CHECK_THROWS_AS(t_rep(kHalf, kNu19, 20, -1.0), ArgumentError);
}

TEST_CASE("R curve matches definition") {
  for (double beta : {0.1, 0.5, 0.8}) {
    const Criteria c(0.05, beta);
    const RCurve curve(c, kNu19, 20);
    const double ta = oracle::t_quantile_int(0.95, 19);
    const double tb = beta == 0.5 ? 0.0 : oracle::t_quantile_int(beta, 19);
    for (double q = 1e-4; q < 100.0; q *= 1.7) {
      CHECK(curve.r(q) == doctest::Approx(oracle::r_q(ta, tb, 20, q)).epsilon(1e-12));
      const auto at = r_crit(c, kNu19, 20, q);
      CHECK(at.r_q == std::max(at.t_rep, at.t_crit));
    }
  }
}

TEST_CASE("t_rep and t_crit crossover only for beta below one half") {
  const Criteria low(0.05, 0.3);
  const RCurve curve(low, kNu19, 20);
  CHECK(curve.t_rep(0.01) > curve.t_crit(0.01));
  CHECK(curve.t_rep(100.0) < curve.t_crit(100.0));
  CHECK(curve.r(100.0) == curve.t_crit(100.0));

  for (double beta : {0.5, 0.7, 0.95}) {
    const RCurve c(Criteria(0.05, beta), kNu19, 20);
    for (double q = 1e-5; q < 1e4; q *= 3.0) CHECK(c.t_rep(q) > c.t_crit(q));
  }
}

TEST_CASE("rule of thumb") {
  const auto ten = rule_of_thumb(0.05, DegreesOfFreedom(10));
  CHECK(ten.t_bound == doctest::Approx(4.7089121271797373).epsilon(1e-14));
  CHECK(ten.p_threshold == doctest::Approx(0.00041513493944591620).epsilon(1e-12));
  CHECK(ten.cdf_at_bound == doctest::Approx(1.0 - 0.00041513493944591620).epsilon(1e-15));
  const auto forty = rule_of_thumb(0.05, DegreesOfFreedom(40));
  CHECK(forty.t_bound == doctest::Approx(4.3747732612105343).epsilon(1e-14));
  CHECK(forty.p_threshold == doctest::Approx(4.2307081008889846e-5).epsilon(1e-12));
  CHECK(kRuleOfThumbFactor == doctest::Approx(1.5 * std::sqrt(3.0)).epsilon(1e-16));
}

TEST_CASE("minimum of R for beta one half") {
  for (double n : {5.0, 20.0, 300.0}) {
    const auto m = minimize_r(kHalf, DegreesOfFreedom(n - 1), n);
    CHECK(std::fabs(m.q_at_min * n - 2.0) < 1e-6);
    CHECK(m.r_min ==
          doctest::Approx(rule_of_thumb(0.05, DegreesOfFreedom(n - 1)).t_bound).epsilon(1e-12));
  }
}

TEST_CASE("minimum agrees with dense scan") {
  const RCurve curve(Criteria(0.01, 0.3), DegreesOfFreedom(12), 13);
  double best = 1e300;
  for (int i = 0; i <= 200000; ++i) {
    const double qn = std::exp(std::log(kMinQn) + i * (std::log(kMaxQn / kMinQn) / 200000));
    best = std::min(best, curve.r(qn / 13));
  }
  const auto m = minimize_r(curve);
  CHECK(m.r_min <= best * (1 + 1e-12));
  CHECK(m.r_min == doctest::Approx(best).epsilon(1e-7));
}

TEST_CASE("q interval solved") {
  const RCurve curve(kHalf, kNu19, 20);
  const auto iv = q_interval(5.0, curve);
  REQUIRE(iv.solved());
  CHECK(iv.q1 < iv.q_at_min);
  CHECK(iv.q2 > iv.q_at_min);
  CHECK(curve.r(iv.q1) == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(curve.r(iv.q2) == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(iv.gamma == iv.q2);
  CHECK_FALSE(iv.q1_left_censored);
  CHECK_FALSE(iv.q2_right_censored);
  // sign of t1 is irrelevant
  const auto neg = q_interval(-5.0, curve);
  CHECK(neg.q1 == iv.q1);
  CHECK(neg.q2 == iv.q2);
}

TEST_CASE("q interval no solution") {
  const auto iv = q_interval(2.0, kHalf, kNu19, 20);
  CHECK_FALSE(iv.solved());
  CHECK(iv.r_min == doctest::Approx(4.4924188238841471).epsilon(1e-12));
  CHECK(iv.q_at_min == doctest::Approx(0.1).epsilon(1e-7));
}

TEST_CASE("q interval censoring") {
  const RCurve curve(kHalf, kNu19, 20);
  const auto right = q_interval(5.0, curve, 0.15);
  REQUIRE(right.solved());
  CHECK(right.q2_right_censored);
  CHECK(right.q2 == 0.15);

  const auto left = q_interval(1e9, curve);
  REQUIRE(left.solved());
  CHECK(left.q1_left_censored);
  CHECK(left.q1 == doctest::Approx(kMinQn / 20).epsilon(1e-12));

  // ceiling below the left branch
  CHECK_FALSE(q_interval(5.0, curve, 0.01).solved());
  CHECK_THROWS_AS(q_interval(5.0, curve, 0.0), ArgumentError);
}
