#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pggibbs/math_util.hpp"
#include "pggibbs/polya_gamma.hpp"

namespace pggibbs {

using Beta = Eigen::VectorXd;
using OmegaVec = Eigen::VectorXd;

// Binary-response design: X is n x p, y holds 0/1.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXi y;
  std::vector<std::string> coef_names;  // optional; sized p when present

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  void validate() const {
    if (X.rows() < 1 || X.cols() < 1)
      throw std::invalid_argument("Dataset: X must be at least 1x1");
    if (y.size() != X.rows())
      throw std::invalid_argument("Dataset: y length must match rows of X");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0 && y[i] != 1)
        throw std::invalid_argument("Dataset: y must be 0/1 (row " +
                                    std::to_string(i + 1) + ")");
    }
    if (!X.allFinite())
      throw std::invalid_argument("Dataset: X has non-finite entries");
    if (!coef_names.empty() &&
        coef_names.size() != static_cast<std::size_t>(X.cols()))
      throw std::invalid_argument("Dataset: coef_names size must equal p");
  }
};

// kappa_i = y_i - 1/2 and the sign-flipped design z_i = c_i x_i with
// c_i = +1 when y_i = 0 and -1 when y_i = 1. A positive vector in the
// null space of Z^T certifies a proper posterior, and Z drives the
// geometric-drift constants.
struct DerivedDesign {
  Eigen::VectorXd kappa;
  Eigen::MatrixXd Z;
};

inline DerivedDesign derive(const Dataset& data) {
  data.validate();
  DerivedDesign d;
  d.kappa = data.y.cast<double>().array() - 0.5;
  d.Z = data.X;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.y[i] == 1) d.Z.row(i) = -d.Z.row(i);
  }
  return d;
}

// Log of the unnormalized posterior under the flat prior,
// sum_i [ y_i x_i' beta - log(1 + exp(x_i' beta)) ],
// stable for |x_i' beta| up to 1e3 and beyond.
inline double log_posterior_unnorm(const Dataset& data, const Beta& beta) {
  if (beta.size() != data.p())
    throw std::invalid_argument("log_posterior_unnorm: beta has wrong length");
  const Eigen::VectorXd t = data.X * beta;
  double lp = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    lp += data.y[i] * t[i] - log1pexp(t[i]);
  }
  return lp;
}

// Log of the unnormalized augmented posterior over (beta, omega):
// sum_i [ kappa_i t_i - omega_i t_i^2 / 2 + log f(omega_i | 1, 0) ].
// Integrating exp of this over omega returns 2^n times the unnormalized
// beta posterior. Returns -inf when some omega_i sits below the density
// floor.
inline double log_complete_posterior_unnorm(
    const Dataset& data, const Beta& beta, const OmegaVec& omega,
    const SeriesPolicy& policy = SeriesPolicy{}) {
  if (beta.size() != data.p())
    throw std::invalid_argument("log_complete_posterior_unnorm: bad beta size");
  if (omega.size() != data.n())
    throw std::invalid_argument(
        "log_complete_posterior_unnorm: omega length must be n");
  const DerivedDesign d = derive(data);
  const Eigen::VectorXd t = data.X * beta;
  double lp = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (!(omega[i] > 0.0))
      throw std::invalid_argument(
          "log_complete_posterior_unnorm: omega must be positive");
    const double f = pg_density(omega[i], PGParams(1.0, 0.0), policy);
    lp += d.kappa[i] * t[i] - 0.5 * omega[i] * t[i] * t[i] + std::log(f);
  }
  return lp;
}

}  // namespace pggibbs
