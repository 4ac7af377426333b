#pragma once

// Point-form null hypothesis testing (mu = 0 in every experiment). Kept as the
// baseline that the distributional test reduces to at q = 0.

#include "dnhst/special_functions.hpp"

namespace dnhst {

enum class Sidedness {
  kAbsoluteOneTail,  // 1 - T(|t|), the convention used throughout this library
  kTwoSided,         // 2 * (1 - T(|t|)), capped at 1; an extension
};

/// p-value of the normalised mean z = xbar / s for a sample of size n:
/// 1 - T_nu(|z| sqrt(n)). Throws ArgumentError for n < 2.
double point_p_value(double z, int n, DegreesOfFreedom nu,
                     Sidedness sidedness = Sidedness::kAbsoluteOneTail);

/// Z_crit = T_nu^-1(1 - alpha) / sqrt(n). alpha must lie in (0, 0.5).
double point_z_crit(double alpha, double n, DegreesOfFreedom nu);

/// t_crit = T_nu^-1(1 - alpha).
double point_t_crit(double alpha, DegreesOfFreedom nu);

enum class PowerQuantile {
  kLower,  // T_nu^-1(alpha); the default
  kUpper,      // T_nu^-1(1 - alpha); opt-in alternative
};

/// Power-based replication approximation
///   1 - Phi((c - t1) / sqrt(1 + c^2 / (2 nu))),  c = T_nu^-1(alpha).
/// With the default quantile this returns about 0.95 at t1 = 0 for
/// alpha = 0.05, which is not a plausible replication probability; it is
/// provided for comparison only.
double power_replication_estimate(double t1, double alpha, DegreesOfFreedom nu,
                                  PowerQuantile quantile = PowerQuantile::kLower);

struct PointTestReport {
  double t_stat;
  DegreesOfFreedom nu;
  int n;
  double alpha;
  double p_value;
  double z_crit;
  double t_crit;
  bool significant;
};

/// Full point-form test of a t statistic from a sample of size n.
PointTestReport point_test(double t_stat, DegreesOfFreedom nu, int n, double alpha);

// Shared argument checks.
void require_alpha(double alpha);
void require_sample_size(int n);

}  // namespace dnhst
