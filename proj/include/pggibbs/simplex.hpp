#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pggibbs/errors.hpp"

namespace pggibbs {

// Phase-1 primal simplex for the feasibility program
//     find u >= 0 with A u = d        (A is m x k, dense)
// using Bland's rule throughout, so cycling cannot occur. Returns a basic
// feasible u, or nullopt when the program is infeasible. The iteration cap
// guards against numerical livelock and raises NumericError, which callers
// must keep distinct from infeasibility.
inline std::optional<Eigen::VectorXd> lp_feasible_point(
    const Eigen::MatrixXd& A, const Eigen::VectorXd& d,
    long max_iterations = 50000) {
  const Eigen::Index m = A.rows();
  const Eigen::Index k = A.cols();
  if (d.size() != m) throw std::invalid_argument("lp_feasible_point: size");

  constexpr double kPivotTol = 1e-11;

  // Tableau [A | I | rhs] with rows flipped so rhs >= 0; artificial i is
  // column k + i. Objective: minimize the sum of artificials.
  Eigen::MatrixXd T(m, k + m + 1);
  T.setZero();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = (d[i] < 0.0) ? -1.0 : 1.0;
    T.row(i).head(k) = sign * A.row(i);
    T(i, k + i) = 1.0;
    T(i, k + m) = sign * d[i];
  }
  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = k + i;

  // Reduced-cost row for c = [0_k, 1_m] with the all-artificial basis:
  // r_j = c_j - sum_i T(i, j).
  Eigen::RowVectorXd r(k + m);
  for (Eigen::Index j = 0; j < k + m; ++j) {
    const double cj = (j >= k) ? 1.0 : 0.0;
    r[j] = cj - T.col(j).head(m).sum();
  }
  double obj = T.col(k + m).head(m).sum();  // current sum of artificials

  for (long iter = 0; iter < max_iterations; ++iter) {
    // Bland: entering variable = smallest index with negative reduced cost.
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < k + m; ++j) {
      if (r[j] < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;  // optimal

    // Ratio test; ties broken by smallest basis variable index (Bland).
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = T(i, enter);
      if (a > kPivotTol) {
        const double ratio = T(i, k + m) / a;
        if (leave < 0 || ratio < best - 1e-14 ||
            (ratio < best + 1e-14 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) {
      // Unbounded direction in phase 1 cannot happen with bounded
      // objective; treat as numerical failure.
      throw NumericError("lp_feasible_point: phase-1 ratio test failed");
    }

    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != leave && T(i, enter) != 0.0) {
        T.row(i) -= T(i, enter) * T.row(leave);
      }
    }
    r -= r[enter] * T.row(leave).head(k + m);
    basis[leave] = enter;

    obj = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (basis[i] >= k) obj += T(i, k + m);
    }
    if (iter + 1 == max_iterations) {
      throw NumericError("lp_feasible_point: iteration cap exceeded");
    }
  }

  const double feas_tol = 1e-9 * (1.0 + d.cwiseAbs().maxCoeff());
  if (obj > feas_tol) return std::nullopt;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[i] < k) u[basis[i]] = std::max(T(i, k + m), 0.0);
  }
  return u;
}

}  // namespace pggibbs
