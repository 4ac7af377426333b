#pragma once

// Joint significance and replication criterion.
//
// A result t1 is treated as real under distributional null q when
//   |t1| >= R_q = max(t_rep, t_crit),
// where t_crit is the distributional significance bound and t_rep is the
// smallest |t1| whose replication probability reaches beta. R_q is convex
// and unimodal in qN, so the set of q at which a given |t1| passes is an
// interval [q1, q2] found by two bracketed root searches around the minimum.

#include "dnhst/dist_nhst.hpp"
#include "dnhst/special_functions.hpp"

namespace dnhst {

/// Significance level alpha in (0, 0.5) and replication level beta in (alpha, 1).
class Criteria {
 public:
  Criteria(double alpha, double beta);
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

 private:
  double alpha_;
  double beta_;
};

/// (1 + 1/(qN)) (t_crit + T_nu^-1(beta) sqrt((1 + 2qN)/(1 + qN))).
/// Throws DivergenceError at q = 0.
double t_rep(const Criteria& criteria, DegreesOfFreedom nu, double n, double q);

struct JointCriterionResult {
  double t_rep;
  double t_crit;
  double r_q;
  double q;
};

JointCriterionResult r_crit(const Criteria& criteria, DegreesOfFreedom nu, double n, double q);

/// R_q as a function of q for fixed (criteria, nu, n). Quantiles are computed
/// once on construction, so this is the type to use for scans.
class RCurve {
 public:
  RCurve(const Criteria& criteria, DegreesOfFreedom nu, double n);

  double t_crit(double q) const;
  double t_rep(double q) const;
  double r(double q) const;
  JointCriterionResult at(double q) const;

  double n() const noexcept { return n_; }
  double alpha_quantile() const noexcept { return t_alpha_; }  // T_nu^-1(1 - alpha)
  double beta_quantile() const noexcept { return t_beta_; }    // T_nu^-1(beta)

 private:
  double n_;
  double t_alpha_;
  double t_beta_;
};

/// With beta = 0.5 the minimum of R_q over q is (3 sqrt(3) / 2) T_nu^-1(1 - alpha).
struct RuleOfThumb {
  double t_bound;
  double p_threshold;   // 1 - T_nu(t_bound): results with p above this are rejected
  double cdf_at_bound;  // T_nu(t_bound), about 1 - p_threshold
};

inline constexpr double kRuleOfThumbFactor = 2.598076211353315940;  // 3 sqrt(3) / 2

RuleOfThumb rule_of_thumb(double alpha, DegreesOfFreedom nu);

struct MinimumR {
  double q_at_min;
  double r_min;
};

/// Bracket for the qN search.
inline constexpr double kMinQn = 1e-6;
inline constexpr double kMaxQn = 1e6;

/// Golden-section search over log(qN) in [kMinQn, kMaxQn].
MinimumR minimize_r(const Criteria& criteria, DegreesOfFreedom nu, double n);
MinimumR minimize_r(const RCurve& curve);

enum class QIntervalStatus { kSolved, kNoSolution };

struct QInterval {
  QIntervalStatus status = QIntervalStatus::kNoSolution;
  double q1 = 0.0;
  double q2 = 0.0;
  double gamma = 0.0;  // equals q2: a rough generalisability measure
  double r_min = 0.0;
  double q_at_min = 0.0;
  bool q1_left_censored = false;   // R at the search floor was still <= |t1|
  bool q2_right_censored = false;  // R at q_ceiling was still <= |t1|

  bool solved() const noexcept { return status == QIntervalStatus::kSolved; }
};

inline constexpr double kDefaultQCeiling = 1e3;

/// Interval of q over which |t1| >= R_q. Returns kNoSolution when |t1| is
/// below the minimum of R. Throws SolverFailure if a root misses the
/// 1e-8 relative tolerance.
QInterval q_interval(double t1, const Criteria& criteria, DegreesOfFreedom nu, double n,
                     double q_ceiling = kDefaultQCeiling);
QInterval q_interval(double t1, const RCurve& curve, double q_ceiling = kDefaultQCeiling);

}  // namespace dnhst
