#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "pggibbs/errors.hpp"

namespace pggibbs {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;  // absolute
  double l1_norm = 0.0;
};

namespace detail {
inline void require_converged(const QuadResult& r, double rel_tol,
                              double l1_norm, const char* where) {
  const double scale = std::max(l1_norm, 1e-300);
  if (!std::isfinite(r.value) || r.error_estimate > 100.0 * rel_tol * scale) {
    throw NumericError(std::string(where) +
                       ": quadrature failed to converge (achieved error " +
                       std::to_string(r.error_estimate) + ", value " +
                       std::to_string(r.value) + ")");
  }
}
}  // namespace detail

// Adaptive Gauss-Kronrod on a finite interval; no convergence check, so
// callers stitching several segments can judge the aggregate instead.
template <typename F>
QuadResult integrate_finite_segment(F&& f, double a, double b,
                                    double rel_tol = 1e-10,
                                    int max_depth = 15) {
  namespace bq = boost::math::quadrature;
  QuadResult r;
  r.value = bq::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth,
                                                     rel_tol, &r.error_estimate,
                                                     &r.l1_norm);
  return r;
}

// Adaptive Gauss-Kronrod on a finite interval with a smooth integrand.
template <typename F>
QuadResult integrate_finite(F&& f, double a, double b, double rel_tol = 1e-10,
                            int max_depth = 15) {
  QuadResult r = integrate_finite_segment(f, a, b, rel_tol, max_depth);
  detail::require_converged(r, rel_tol, r.l1_norm, "integrate_finite");
  return r;
}

// tanh-sinh on a finite interval; tolerates integrable endpoint
// singularities such as t^{s-1} at the origin.
template <typename F>
QuadResult integrate_endpoint_singular(F&& f, double a, double b,
                                       double rel_tol = 1e-10) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  QuadResult r;
  r.value = integrator.integrate(f, a, b, rel_tol, &r.error_estimate,
                                 &r.l1_norm);
  detail::require_converged(r, rel_tol, r.l1_norm,
                            "integrate_endpoint_singular");
  return r;
}

// exp-sinh on (a, infinity) for integrands with exponential decay.
template <typename F>
QuadResult integrate_upper_tail(F&& f, double a, double rel_tol = 1e-10) {
  boost::math::quadrature::exp_sinh<double> integrator;
  QuadResult r;
  r.value = integrator.integrate(f, a, std::numeric_limits<double>::infinity(),
                                 rel_tol, &r.error_estimate, &r.l1_norm,
                                 nullptr);
  detail::require_converged(r, rel_tol, r.l1_norm, "integrate_upper_tail");
  return r;
}

}  // namespace pggibbs
