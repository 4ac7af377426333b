#include "dnhst/joint_criterion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dnhst {

namespace {

constexpr double kRootRelTolerance = 1e-8;
constexpr double kMinimizerLogTolerance = 1e-10;

// Bisection on log q for R(q) = target, where R(lo) > target >= R(hi) or the
// reverse. Returns whichever endpoint has the smaller residual.
double bisect_log(const RCurve& curve, double lo, double hi, double target) {
  const bool decreasing = curve.r(lo) > target;
  double a = std::log(lo);
  double b = std::log(hi);
  for (int it = 0; it < 300 && b - a > 1e-15 * std::max(1.0, std::fabs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    const bool above = curve.r(std::exp(mid)) > target;
    if (above == decreasing) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double qa = std::exp(a);
  const double qb = std::exp(b);
  return std::fabs(curve.r(qa) - target) <= std::fabs(curve.r(qb) - target) ? qa : qb;
}

void check_root(const RCurve& curve, double q, double target, const char* which) {
  if (std::fabs(curve.r(q) - target) > kRootRelTolerance * target) {
    throw SolverFailure(std::string("q_interval: ") + which + " root missed tolerance");
  }
}

}  // namespace

Criteria::Criteria(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  require_alpha(alpha);
  if (!(beta > alpha && beta < 1.0)) {
    throw ArgumentError("beta must satisfy alpha < beta < 1, got alpha=" + std::to_string(alpha) +
                        " beta=" + std::to_string(beta));
  }
}

RCurve::RCurve(const Criteria& criteria, DegreesOfFreedom nu, double n)
    : n_(n),
      t_alpha_(t_quantile(1.0 - criteria.alpha(), nu)),
      t_beta_(criteria.beta() == 0.5 ? 0.0 : t_quantile(criteria.beta(), nu)) {
  if (!(n >= 2.0) || !std::isfinite(n)) throw ArgumentError("sample size must be >= 2");
}

double RCurve::t_crit(double q) const {
  if (!(q >= 0.0)) throw ArgumentError("q must be >= 0");
  return t_alpha_ * std::sqrt(1.0 + q * n_);
}

double RCurve::t_rep(double q) const {
  if (q == 0.0) throw DivergenceError("t_rep diverges at q = 0");
  if (!(q > 0.0)) throw ArgumentError("q must be > 0");
  const double qn = q * n_;
  return (1.0 + 1.0 / qn) * (t_crit(q) + t_beta_ * std::sqrt((1.0 + 2.0 * qn) / (1.0 + qn)));
}

double RCurve::r(double q) const { return std::max(t_rep(q), t_crit(q)); }

JointCriterionResult RCurve::at(double q) const {
  const double rep = t_rep(q);
  const double crit = t_crit(q);
  return {rep, crit, std::max(rep, crit), q};
}

double t_rep(const Criteria& criteria, DegreesOfFreedom nu, double n, double q) {
  return RCurve(criteria, nu, n).t_rep(q);
}

JointCriterionResult r_crit(const Criteria& criteria, DegreesOfFreedom nu, double n, double q) {
  return RCurve(criteria, nu, n).at(q);
}

RuleOfThumb rule_of_thumb(double alpha, DegreesOfFreedom nu) {
  require_alpha(alpha);
  const double bound = t_quantile(1.0 - alpha, nu) * kRuleOfThumbFactor;
  return RuleOfThumb{
      .t_bound = bound,
      .p_threshold = t_sf(bound, nu),
      .cdf_at_bound = t_cdf(bound, nu),
  };
}

MinimumR minimize_r(const RCurve& curve) {
  // R is unimodal in qN, hence in log(qN).
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double n = curve.n();
  auto f = [&](double u) { return curve.r(std::exp(u) / n); };

  double a = std::log(kMinQn);
  double b = std::log(kMaxQn);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > kMinimizerLogTolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double u = fc <= fd ? c : d;
  const double q = std::exp(u) / n;
  return MinimumR{q, curve.r(q)};
}

MinimumR minimize_r(const Criteria& criteria, DegreesOfFreedom nu, double n) {
  return minimize_r(RCurve(criteria, nu, n));
}

QInterval q_interval(double t1, const RCurve& curve, double q_ceiling) {
  if (!std::isfinite(t1)) throw ArgumentError("t1 must be finite");
  const double q_floor = kMinQn / curve.n();
  if (!(q_ceiling > q_floor) || !std::isfinite(q_ceiling)) {
    throw ArgumentError("q_ceiling must be finite and above the search floor");
  }
  const double target = std::fabs(t1);
  const MinimumR minimum = minimize_r(curve);

  QInterval out;
  out.r_min = minimum.r_min;
  out.q_at_min = minimum.q_at_min;
  if (target < minimum.r_min) return out;

  // The left branch ends at the minimum or at the ceiling, whichever is lower.
  const double left_end = std::min(minimum.q_at_min, q_ceiling);
  if (curve.r(left_end) > target) return out;

  if (curve.r(q_floor) <= target) {
    out.q1 = q_floor;
    out.q1_left_censored = true;
  } else {
    out.q1 = bisect_log(curve, q_floor, left_end, target);
    check_root(curve, out.q1, target, "lower");
  }

  if (curve.r(q_ceiling) <= target) {
    out.q2 = q_ceiling;
    out.q2_right_censored = true;
  } else {
    out.q2 = bisect_log(curve, minimum.q_at_min, q_ceiling, target);
    check_root(curve, out.q2, target, "upper");
  }
  out.q1 = std::min(out.q1, out.q2);
  out.gamma = out.q2;
  out.status = QIntervalStatus::kSolved;
  return out;
}

QInterval q_interval(double t1, const Criteria& criteria, DegreesOfFreedom nu, double n,
                     double q_ceiling) {
  return q_interval(t1, RCurve(criteria, nu, n), q_ceiling);
}

}  // namespace dnhst
