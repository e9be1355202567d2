#pragma once

#include <cmath>
#include <limits>

namespace pggibbs {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
// Catalan's constant; E(1/omega) = 8*kCatalan for PG(1,0).
inline constexpr double kCatalan = 0.915965594177219015054603514932384110774;

// log(1 + e^t) without overflow for large |t|.
inline double log1pexp(double t) {
  if (t > 35.0) return t + std::log1p(std::exp(-t));
  if (t < -35.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

// log cosh(t) without overflow.
inline double log_cosh(double t) {
  const double a = std::fabs(t);
  // cosh(a) = e^a (1 + e^{-2a}) / 2
  return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094;
}

// Standard normal CDF.
inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// log of the standard normal CDF, accurate into the deep lower tail.
inline double log_norm_cdf(double x) {
  if (x > -10.0) {
    return std::log(0.5 * std::erfc(-x * 0.7071067811865475244));
  }
  // Asymptotic expansion of Mills' ratio for x << 0.
  const double t = -x;
  const double t2 = t * t;
  const double series =
      1.0 - 1.0 / t2 + 3.0 / (t2 * t2) - 15.0 / (t2 * t2 * t2);
  return -0.5 * t2 - std::log(t) - 0.9189385332046727418 + std::log(series);
}

// Mean of |N(mu, sigma^2)|.
inline double folded_normal_mean(double mu, double sigma) {
  const double s2pi = 0.7978845608028653559;  // sqrt(2/pi)
  return sigma * s2pi * std::exp(-mu * mu / (2.0 * sigma * sigma)) +
         mu * (1.0 - 2.0 * norm_cdf(-mu / sigma));
}

}  // namespace pggibbs
