#pragma once

// Student-t and normal distribution numerics.
//
// The t CDF is evaluated through the regularized incomplete beta function,
//   T_nu(x) = 1 - 0.5 * I_{nu/(nu+x^2)}(nu/2, 1/2),  x >= 0,
// with the lower half obtained by reflection so that T(x) + T(-x) == 1 up to
// a single rounding. Quantiles are found by bracketed root finding on the
// CDF; they are not called in hot loops.

#include "dnhst/errors.hpp"

namespace dnhst {

/// Degrees of freedom of a t distribution. Non-integer values are accepted;
/// the smallest allowed value is 0.5.
class DegreesOfFreedom {
 public:
  static constexpr double kMin = 0.5;

  explicit DegreesOfFreedom(double nu);

  double value() const noexcept { return nu_; }

  friend bool operator==(DegreesOfFreedom, DegreesOfFreedom) = default;

 private:
  double nu_;
};

/// Regularized incomplete beta I_x(a, b). Requires 0 <= x <= 1, a > 0, b > 0.
double reg_inc_beta(double x, double a, double b);

/// Lower tail T_nu(x). x may be +-infinity.
double t_cdf(double x, DegreesOfFreedom nu);

/// Upper tail 1 - T_nu(x), computed without cancellation for large x.
double t_sf(double x, DegreesOfFreedom nu);

/// Inverse of t_cdf. Throws UnboundedQuantileError for p in {0, 1} and
/// ArgumentError for p outside [0, 1].
double t_quantile(double p, DegreesOfFreedom nu);

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (rational approximation plus one Halley step).
double normal_quantile(double p);

}  // namespace dnhst
