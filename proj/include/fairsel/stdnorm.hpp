#pragma once

// Standard normal density, distribution and quantile functions.
//
// cdf goes through the C library erfc, which is accurate to a few ulp over
// the whole real line, so the absolute error stays below 1e-14. quantile
// starts from Acklam's rational approximation (relative error ~1.2e-9) and
// polishes it with Halley steps against cdf, which brings the round trip
// cdf(quantile(p)) to within a couple of ulp of p.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fairsel/errors.hpp"

namespace fairsel {

// A value in [0, 1].
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw domain_error("probability must lie in [0, 1], got " + std::to_string(value));
    }
  }
  [[nodiscard]] constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }  // NOLINT(google-explicit-constructor)

 private:
  double value_ = 0.0;
};

namespace stdnorm {

inline constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
inline constexpr double sqrt_2pi = 2.50662827463100050241576528481;

// Inputs to quantile are clamped no closer than this to {0, 1}.
inline constexpr double quantile_clamp = 1e-300;

[[nodiscard]] inline double pdf(double z) {
  if (!std::isfinite(z)) throw domain_error("stdnorm::pdf: non-finite argument");
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

[[nodiscard]] inline double cdf(double z) {
  if (std::isnan(z)) throw domain_error("stdnorm::cdf: NaN argument");
  if (z == std::numeric_limits<double>::infinity()) return 1.0;
  if (z == -std::numeric_limits<double>::infinity()) return 0.0;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// 1 - cdf(z) without cancellation for large positive z.
[[nodiscard]] inline double survival(double z) { return cdf(-z); }

namespace detail {

// Acklam's algorithm for the lower half, p in (0, 0.5].
inline double acklam_lower(double p) {
  constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                          1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                          6.680131188771972e+01,  -1.328068155288572e+01};
  constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                          -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                          3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

inline double refined_lower(double p) {
  double x = acklam_lower(p);
  for (int step = 0; step < 2; ++step) {
    const double e = cdf(x) - p;
    const double u = e * sqrt_2pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace detail

[[nodiscard]] inline double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw domain_error("stdnorm::quantile: argument must lie in (0, 1), got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  if (p < 0.5) return detail::refined_lower(std::max(p, quantile_clamp));
  // 1 - p is exact for p in [0.5, 1).
  return -detail::refined_lower(std::max(1.0 - p, quantile_clamp));
}

// quantile(1 - x), computed without forming 1 - x. Accepts the closed
// interval and returns -inf / +inf at x = 1 / x = 0.
[[nodiscard]] inline double upper_quantile(double x) {
  if (std::isnan(x) || x < 0.0 || x > 1.0) {
    throw domain_error("stdnorm::upper_quantile: argument must lie in [0, 1], got " +
                       std::to_string(x));
  }
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  if (x == 1.0) return -std::numeric_limits<double>::infinity();
  return -quantile(x);
}

// phi(quantile(x)): the density at a quantile, zero at the endpoints.
[[nodiscard]] inline double density_at_quantile(double x) {
  if (x <= 0.0 || x >= 1.0) {
    if (x == 0.0 || x == 1.0) return 0.0;
    throw domain_error("stdnorm::density_at_quantile: argument must lie in [0, 1]");
  }
  return pdf(quantile(x));
}

}  // namespace stdnorm
}  // namespace fairsel
