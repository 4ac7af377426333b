#include "dnhst/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dnhst {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxCfIterations = 200000;

// I_x(a, b) together with its complement, each computed directly when it is
// the small one.
struct BetaPair {
  double lower;
  double upper;
};

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxCfIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw SolverFailure("incomplete beta continued fraction did not converge");
}

// sum_{n>=0} (1-b)_n x^n / (n! (a+n)); converges geometrically once x*b < 1.
double beta_series_sum(double x, double a, double b) {
  double coeff = 1.0;
  double power = 1.0;
  double sum = 1.0 / a;
  for (int n = 1; n < 10000; ++n) {
    coeff *= (n - b) / n;
    power *= x;
    const double term = coeff * power / (a + n);
    sum += term;
    if (std::fabs(term) <= kEps * std::fabs(sum)) return sum;
  }
  throw SolverFailure("incomplete beta series did not converge");
}

// Requires x <= (a+1)/(a+b+2), where the continued fraction converges fast.
BetaPair beta_direct(double x, double y, double a, double b) {
  const double lbeta = log_beta(a, b);
  double lower;
  if (x * std::max(b, 1.0) < 0.5) {
    lower = std::exp(a * std::log(x) - lbeta) * beta_series_sum(x, a, b);
  } else {
    const double front = std::exp(a * std::log(x) + b * std::log(y) - lbeta);
    lower = front * beta_continued_fraction(x, a, b) / a;
  }
  lower = std::clamp(lower, 0.0, 1.0);
  return {lower, 1.0 - lower};
}

// x and y = 1 - x are passed separately so callers that know 1 - x exactly
// do not lose it to cancellation.
BetaPair beta_pair(double x, double y, double a, double b) {
  if (x <= 0.0) return {0.0, 1.0};
  if (y <= 0.0) return {1.0, 0.0};
  if (x > (a + 1.0) / (a + b + 2.0)) {
    const BetaPair swapped = beta_direct(y, x, b, a);
    return {swapped.upper, swapped.lower};
  }
  return beta_direct(x, y, a, b);
}

// 0.5 * I_{nu/(nu+x^2)}(nu/2, 1/2) and its complement, for x >= 0.
BetaPair t_tail_pair(double x, double nu) {
  if (std::isinf(x)) return {0.0, 1.0};
  const double x2 = x * x;
  const double denom = nu + x2;
  const BetaPair ib = beta_pair(nu / denom, x2 / denom, 0.5 * nu, 0.5);
  return {0.5 * ib.lower, 0.5 + 0.5 * ib.upper};
}

void require_finite_or_inf(double x, const char* what) {
  if (std::isnan(x)) throw ArgumentError(std::string(what) + ": argument is NaN");
}

}  // namespace

DegreesOfFreedom::DegreesOfFreedom(double nu) : nu_(nu) {
  if (!std::isfinite(nu) || nu < kMin) {
    throw ArgumentError("degrees of freedom must be finite and >= 0.5, got " +
                        std::to_string(nu));
  }
}

double reg_inc_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("reg_inc_beta: x must lie in [0, 1]");
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ArgumentError("reg_inc_beta: a and b must be positive and finite");
  }
  return beta_pair(x, 1.0 - x, a, b).lower;
}

double t_sf(double x, DegreesOfFreedom nu) {
  require_finite_or_inf(x, "t_sf");
  if (x >= 0.0) return t_tail_pair(x, nu.value()).lower;
  return t_tail_pair(-x, nu.value()).upper;
}

double t_cdf(double x, DegreesOfFreedom nu) {
  require_finite_or_inf(x, "t_cdf");
  return t_sf(-x, nu);
}

double t_quantile(double p, DegreesOfFreedom nu) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("t_quantile: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) {
    throw UnboundedQuantileError("t_quantile: quantile at p = 0 or 1 is unbounded");
  }
  if (p == 0.5) return 0.0;

  // Solve upper_tail(x) = target for x > 0 and reflect.
  const double target = p < 0.5 ? p : 1.0 - p;
  const double sign = p < 0.5 ? -1.0 : 1.0;
  const double v = nu.value();
  auto tail = [v](double x) { return t_tail_pair(x, v).lower; };

  // Normal quantile with the first Cornish-Fisher correction as a starting point.
  const double z = -normal_quantile(target);
  double guess = z * (1.0 + (z * z + 1.0) / (4.0 * v));
  if (!(guess > 0.0) || !std::isfinite(guess)) guess = 1.0;

  double hi = guess;
  while (tail(hi) > target) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw SolverFailure("t_quantile: bracket expansion overflowed");
  }
  double lo = std::min(guess, hi);
  while (tail(lo) < target) {
    lo *= 0.5;
    if (lo == 0.0) throw SolverFailure("t_quantile: bracket contraction underflowed");
  }

  // Illinois regula falsi in (log x, log tail), where the tail is close to a
  // power law; tail is decreasing in x.
  const double log_target = std::log(target);
  double u_lo = std::log(lo);
  double u_hi = std::log(hi);
  double g_lo = std::log(tail(lo)) - log_target;  // >= 0
  double g_hi = std::log(tail(hi)) - log_target;  // <= 0
  if (g_lo == 0.0) return sign * lo;
  if (g_hi == 0.0) return sign * hi;
  int side = 0;
  double x = lo;
  for (int it = 0; it < 400; ++it) {
    double u = (u_lo * g_hi - u_hi * g_lo) / (g_hi - g_lo);
    if (!(u > u_lo && u < u_hi)) u = 0.5 * (u_lo + u_hi);
    x = std::exp(u);
    const double t = tail(x);
    if (std::fabs(t - target) <= 1e-15 * target) return sign * x;
    const double g = std::log(t) - log_target;
    if (g > 0.0) {
      u_lo = u;
      g_lo = g;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    } else {
      u_hi = u;
      g_hi = g;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    }
    if (u_hi - u_lo <= 4.0 * kEps * std::max(1.0, std::fabs(u))) break;
  }
  if (std::fabs(tail(x) - target) > 1e-13) {
    throw SolverFailure("t_quantile: probability tolerance not met");
  }
  return sign * x;
}

double normal_cdf(double x) {
  if (std::isnan(x)) throw ArgumentError("normal_cdf: argument is NaN");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("normal_quantile: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) {
    throw UnboundedQuantileError("normal_quantile: quantile at p = 0 or 1 is unbounded");
  }
  // Acklam's rational approximation.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against erfc; the lower tail is used on the left so
  // tiny p keeps its relative precision.
  const double e = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace dnhst
