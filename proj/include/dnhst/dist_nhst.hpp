#pragma once

// Testing against a distributional null: experiment means vary as
// mu ~ N(0, q sigma^2), so the observed t statistic scaled by 1/sqrt(1 + qN)
// is t-distributed. Everything is expressed in sigma-normalised units since
// sigma itself is never observed.

#include <span>
#include <string_view>
#include <utility>

#include "dnhst/point_nhst.hpp"
#include "dnhst/special_functions.hpp"

namespace dnhst {

enum class ExperimentDesign { kOneSample, kPaired, kTwoSampleEqualN };

std::string_view to_string(ExperimentDesign design);
/// Accepts "one-sample", "paired", "two-sample" (and underscore spellings).
ExperimentDesign parse_design(std::string_view text);

/// Sufficient statistics of one experiment. For paired designs mean/sd are of
/// the differences; for two-sample designs mean is xbar - ybar and sd is the
/// pooled s_p, with n the per-group size.
struct ExperimentSummary {
  ExperimentDesign design = ExperimentDesign::kOneSample;
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

/// Builds a two-sample summary from per-group statistics. Unequal group sizes
/// are rejected: the nu = 2N - 2 algebra assumes equal N.
ExperimentSummary two_sample_summary(int n1, double mean1, double sd1, int n2, double mean2,
                                     double sd2);

/// Summary of raw one-sample data (unbiased sd).
ExperimentSummary one_sample_summary(std::span<const double> values);

/// Variance ratio q = sigma_0^2 / sigma^2. q = 0 is the point-form null.
class DistributionalNull {
 public:
  explicit DistributionalNull(double q);
  double q() const noexcept { return q_; }

 private:
  double q_;
};

struct TStatistic {
  double t;
  DegreesOfFreedom nu;
};

/// t and nu for the summary's design. Throws DegenerateSampleError if sd == 0.
TStatistic t_statistic(const ExperimentSummary& summary);

/// 1 - T_nu(|t1| / sqrt(1 + q n)).
double dist_p_value(double t1, DegreesOfFreedom nu, int n, DistributionalNull null);

/// t_crit = T_nu^-1(1 - alpha) sqrt(1 + q n).
double dist_t_crit(double alpha, DegreesOfFreedom nu, double n, DistributionalNull null);

/// Z_crit = t_crit / sqrt(n).
double dist_z_crit(double alpha, DegreesOfFreedom nu, double n, DistributionalNull null);

/// T_nu^-1(1 - alpha) sqrt(q): the limit of Z_crit as n grows. |z| below this
/// never reaches significance at any sample size.
double asymptotic_z_bound(double alpha, DegreesOfFreedom nu, DistributionalNull null);

/// Posterior for mu after observing xbar_1, in sigma-normalised units.
struct PosteriorMean {
  double mu_n;               // shrinkage * xbar_1
  double shrinkage;          // qN / (1 + qN)
  double var_n_over_sigma2;  // shrinkage / N
};

PosteriorMean posterior_update(double x_bar_1, int n, DistributionalNull null);

/// Probability that an exact repeat (same N, sigma, q, alpha) is significant
/// with the same sign as t1:
///   T_nu((s |t1| - t_crit) / sqrt((1 + 2qN) / (1 + qN))),  s = qN / (1 + qN).
/// Equals alpha at q = 0.
double replication_probability(double t1, double alpha, DegreesOfFreedom nu, int n,
                               DistributionalNull null);

struct DistTestReport {
  double t_stat;
  DegreesOfFreedom nu;
  int n;
  double q;
  double alpha;
  double p_value;
  double t_crit;
  double z_crit;
  bool significant;
  double asymptotic_bound_z;
};

DistTestReport dist_test(double t_stat, DegreesOfFreedom nu, int n, double alpha,
                         DistributionalNull null);

/// Convenience: t_statistic followed by dist_test.
DistTestReport dist_test(const ExperimentSummary& summary, double alpha, DistributionalNull null);

}  // namespace dnhst
