#include "dnhst/dist_nhst.hpp"

#include <cmath>
#include <string>

namespace dnhst {

std::string_view to_string(ExperimentDesign design) {
  switch (design) {
    case ExperimentDesign::kOneSample:
      return "one-sample";
    case ExperimentDesign::kPaired:
      return "paired";
    case ExperimentDesign::kTwoSampleEqualN:
      return "two-sample";
  }
  return "unknown";
}

ExperimentDesign parse_design(std::string_view text) {
  if (text == "one-sample" || text == "one_sample") return ExperimentDesign::kOneSample;
  if (text == "paired") return ExperimentDesign::kPaired;
  if (text == "two-sample" || text == "two_sample" || text == "two_sample_equal_n") {
    return ExperimentDesign::kTwoSampleEqualN;
  }
  throw ArgumentError("unknown design '" + std::string(text) +
                      "' (expected one-sample, paired or two-sample)");
}

ExperimentSummary two_sample_summary(int n1, double mean1, double sd1, int n2, double mean2,
                                     double sd2) {
  if (n1 != n2) {
    throw ArgumentError("two-sample design requires equal group sizes, got " +
                        std::to_string(n1) + " and " + std::to_string(n2));
  }
  if (!(sd1 >= 0.0) || !(sd2 >= 0.0)) throw ArgumentError("standard deviations must be >= 0");
  return ExperimentSummary{
      .design = ExperimentDesign::kTwoSampleEqualN,
      .n = n1,
      .mean = mean1 - mean2,
      .sd = std::sqrt(0.5 * (sd1 * sd1 + sd2 * sd2)),
  };
}

ExperimentSummary one_sample_summary(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  require_sample_size(n);
  double mean = 0.0;
  double m2 = 0.0;
  int k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - mean;
    mean += delta / k;
    m2 += delta * (v - mean);
  }
  return ExperimentSummary{ExperimentDesign::kOneSample, n, mean, std::sqrt(m2 / (n - 1))};
}

DistributionalNull::DistributionalNull(double q) : q_(q) {
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw ArgumentError("variance ratio q must be finite and >= 0, got " + std::to_string(q));
  }
}

TStatistic t_statistic(const ExperimentSummary& summary) {
  require_sample_size(summary.n);
  if (!std::isfinite(summary.mean)) throw ArgumentError("mean must be finite");
  if (summary.sd == 0.0) {
    throw DegenerateSampleError("standard deviation is zero; t statistic undefined");
  }
  if (!(summary.sd > 0.0) || !std::isfinite(summary.sd)) {
    throw ArgumentError("standard deviation must be positive and finite");
  }
  const double n = summary.n;
  switch (summary.design) {
    case ExperimentDesign::kOneSample:
    case ExperimentDesign::kPaired:
      return {summary.mean / (summary.sd / std::sqrt(n)), DegreesOfFreedom(n - 1.0)};
    case ExperimentDesign::kTwoSampleEqualN:
      return {summary.mean / (summary.sd * std::sqrt(2.0 / n)), DegreesOfFreedom(2.0 * n - 2.0)};
  }
  throw ArgumentError("unknown design");
}

double dist_p_value(double t1, DegreesOfFreedom nu, int n, DistributionalNull null) {
  require_sample_size(n);
  return t_sf(std::fabs(t1) / std::sqrt(1.0 + null.q() * n), nu);
}

double dist_t_crit(double alpha, DegreesOfFreedom nu, double n, DistributionalNull null) {
  if (!(n >= 2.0)) throw ArgumentError("sample size must be >= 2");
  return point_t_crit(alpha, nu) * std::sqrt(1.0 + null.q() * n);
}

double dist_z_crit(double alpha, DegreesOfFreedom nu, double n, DistributionalNull null) {
  return dist_t_crit(alpha, nu, n, null) / std::sqrt(n);
}

double asymptotic_z_bound(double alpha, DegreesOfFreedom nu, DistributionalNull null) {
  return point_t_crit(alpha, nu) * std::sqrt(null.q());
}

PosteriorMean posterior_update(double x_bar_1, int n, DistributionalNull null) {
  require_sample_size(n);
  const double qn = null.q() * n;
  const double shrinkage = qn / (1.0 + qn);
  return PosteriorMean{
      .mu_n = shrinkage * x_bar_1,
      .shrinkage = shrinkage,
      .var_n_over_sigma2 = shrinkage / n,
  };
}

double replication_probability(double t1, double alpha, DegreesOfFreedom nu, int n,
                               DistributionalNull null) {
  require_sample_size(n);
  const double qn = null.q() * n;
  const double shrinkage = qn / (1.0 + qn);
  const double t_crit = dist_t_crit(alpha, nu, n, null);
  const double spread = std::sqrt((1.0 + 2.0 * qn) / (1.0 + qn));
  return t_cdf((shrinkage * std::fabs(t1) - t_crit) / spread, nu);
}

DistTestReport dist_test(double t_stat, DegreesOfFreedom nu, int n, double alpha,
                         DistributionalNull null) {
  require_sample_size(n);
  require_alpha(alpha);
  const double t_crit = dist_t_crit(alpha, nu, n, null);
  return DistTestReport{
      .t_stat = t_stat,
      .nu = nu,
      .n = n,
      .q = null.q(),
      .alpha = alpha,
      .p_value = dist_p_value(t_stat, nu, n, null),
      .t_crit = t_crit,
      .z_crit = t_crit / std::sqrt(static_cast<double>(n)),
      .significant = std::fabs(t_stat) >= t_crit,
      .asymptotic_bound_z = asymptotic_z_bound(alpha, nu, null),
  };
}

DistTestReport dist_test(const ExperimentSummary& summary, double alpha,
                         DistributionalNull null) {
  const TStatistic ts = t_statistic(summary);
  return dist_test(ts.t, ts.nu, summary.n, alpha, null);
}

}  // namespace dnhst
