#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "pggibbs/model.hpp"
#include "pggibbs/simplex.hpp"

namespace pggibbs {

// Verdict of the two propriety conditions: full column rank of X, and a
// strictly positive e with Z'e = 0. The flat-prior posterior is proper
// exactly when both hold.
struct ProprietyReport {
  bool full_rank = false;
  Eigen::Index rank = 0;
  double rank_tolerance_used = 0.0;
  std::optional<Eigen::VectorXd> positive_null_vector;
  // max(e)/min(e) of the found certificate; propriety holding only with an
  // extreme e signals near-degeneracy, reported but not graded.
  double null_vector_condition = 0.0;
  bool proper = false;
  std::string note;
};

// Numerical column rank by SVD with tolerance max(n,p) * sigma_max * eps.
inline std::pair<bool, Eigen::Index> check_rank(const Eigen::MatrixXd& X,
                                                double* tolerance_out =
                                                    nullptr) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  if (svd.info() != Eigen::Success)
    throw NumericError("check_rank: SVD failed to converge");
  const auto& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  const double tol = std::max(X.rows(), X.cols()) * sigma_max *
                     std::numeric_limits<double>::epsilon();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol) ++rank;
  }
  if (tolerance_out) *tolerance_out = tol;
  return {rank == X.cols(), rank};
}

// Feasibility tolerance for declaring Z'e = 0 satisfied.
inline double null_vector_feasibility_tol(const Eigen::MatrixXd& Z,
                                          const Eigen::VectorXd& e) {
  const double z_inf = Z.size() ? Z.cwiseAbs().maxCoeff() : 0.0;
  const double e_inf = e.size() ? e.cwiseAbs().maxCoeff() : 0.0;
  return 1e-8 * (1.0 + z_inf * e_inf);
}

// Searches for e with e_i >= 1 and Z'e = 0. Any strictly positive null
// vector can be rescaled to satisfy e >= 1, so this loses no generality.
// Solved as phase-1 simplex on the substitution e = 1 + u, u >= 0.
inline std::optional<Eigen::VectorXd> find_positive_null_vector(
    const Eigen::MatrixXd& Z) {
  if (!Z.allFinite())
    throw std::invalid_argument("find_positive_null_vector: Z not finite");
  const Eigen::MatrixXd A = Z.transpose();
  const Eigen::VectorXd d = -Z.colwise().sum().transpose();
  const auto u = lp_feasible_point(A, d);
  if (!u) return std::nullopt;
  Eigen::VectorXd e = u->array() + 1.0;
  const double residual = (Z.transpose() * e).cwiseAbs().maxCoeff();
  if (residual > null_vector_feasibility_tol(Z, e)) {
    throw NumericError(
        "find_positive_null_vector: simplex reported feasible but the "
        "certificate fails the residual test (residual " +
        std::to_string(residual) + ")");
  }
  return e;
}

inline ProprietyReport check_propriety(const Dataset& data) {
  data.validate();
  const DerivedDesign dd = derive(data);
  ProprietyReport rep;
  auto [full, rank] = check_rank(data.X, &rep.rank_tolerance_used);
  rep.full_rank = full;
  rep.rank = rank;
  rep.positive_null_vector = find_positive_null_vector(dd.Z);
  if (rep.positive_null_vector) {
    const auto& e = *rep.positive_null_vector;
    rep.null_vector_condition = e.maxCoeff() / e.minCoeff();
  }
  rep.proper = rep.full_rank && rep.positive_null_vector.has_value();
  if (rep.proper) {
    rep.note = "posterior is proper";
  } else if (!rep.full_rank) {
    rep.note = "design matrix is not of full column rank";
  } else {
    rep.note =
        "no strictly positive e solves Z'e = 0: the responses are separated "
        "(some direction has c_i x_i'gamma >= 0 for every observation)";
  }
  return rep;
}

}  // namespace pggibbs
