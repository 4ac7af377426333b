#include "dnhst/point_nhst.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dnhst {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw ArgumentError("alpha must lie in (0, 0.5), got " + std::to_string(alpha));
  }
}

void require_sample_size(int n) {
  if (n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(n));
}

double point_p_value(double z, int n, DegreesOfFreedom nu, Sidedness sidedness) {
  require_sample_size(n);
  const double one_tail = t_sf(std::fabs(z) * std::sqrt(static_cast<double>(n)), nu);
  if (sidedness == Sidedness::kTwoSided) return std::min(1.0, 2.0 * one_tail);
  return one_tail;
}

double point_t_crit(double alpha, DegreesOfFreedom nu) {
  require_alpha(alpha);
  return t_quantile(1.0 - alpha, nu);
}

double point_z_crit(double alpha, double n, DegreesOfFreedom nu) {
  if (!(n >= 2.0)) throw ArgumentError("sample size must be >= 2");
  return point_t_crit(alpha, nu) / std::sqrt(n);
}

double power_replication_estimate(double t1, double alpha, DegreesOfFreedom nu,
                                  PowerQuantile quantile) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  const double c = quantile == PowerQuantile::kLower ? t_quantile(alpha, nu)
                                                         : t_quantile(1.0 - alpha, nu);
  const double scale = std::sqrt(1.0 + c * c / (2.0 * nu.value()));
  return 1.0 - normal_cdf((c - t1) / scale);
}

PointTestReport point_test(double t_stat, DegreesOfFreedom nu, int n, double alpha) {
  require_sample_size(n);
  require_alpha(alpha);
  const double t_crit = point_t_crit(alpha, nu);
  const double root_n = std::sqrt(static_cast<double>(n));
  return PointTestReport{
      .t_stat = t_stat,
      .nu = nu,
      .n = n,
      .alpha = alpha,
      .p_value = t_sf(std::fabs(t_stat), nu),
      .z_crit = t_crit / root_n,
      .t_crit = t_crit,
      .significant = std::fabs(t_stat) >= t_crit,
  };
}

}  // namespace dnhst
