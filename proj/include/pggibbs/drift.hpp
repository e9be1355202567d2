#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pggibbs/errors.hpp"
#include "pggibbs/gibbs.hpp"
#include "pggibbs/math_util.hpp"
#include "pggibbs/model.hpp"
#include "pggibbs/polya_gamma.hpp"
#include "pggibbs/quadrature.hpp"
#include "pggibbs/rng.hpp"

namespace pggibbs {

struct DriftFunctionParams {
  double alpha = 1.0;
  void validate() const {
    if (!(alpha > 0.0))
      throw std::invalid_argument("DriftFunctionParams: alpha must be positive");
  }
};

// V(omega) = alpha sum 1/w_i + sum 1/sqrt(w_i) + sum w_i.
inline double drift_V(const OmegaVec& omega, const DriftFunctionParams& params) {
  params.validate();
  if (omega.size() == 0 || (omega.array() <= 0.0).any())
    throw std::invalid_argument("drift_V: omega must be positive and nonempty");
  return params.alpha * omega.cwiseInverse().sum() +
         omega.cwiseSqrt().cwiseInverse().sum() + omega.sum();
}

namespace drift_detail {

// g(lambda) = v^T M(lambda)^{-1} v with M = sum lambda_i^{-2} z_i z_i^T and
// v = Z^T 1, evaluated through a QR factorization of diag(1/lambda) Z. The
// gradient d g / d lambda_i = 2 (z_i^T M^{-1} v)^2 / lambda_i^3 is nonnegative.
struct RatioObjective {
  const Eigen::MatrixXd& Z;
  Eigen::VectorXd v;

  explicit RatioObjective(const Eigen::MatrixXd& z)
      : Z(z), v(z.colwise().sum().transpose()) {}

  double value(const Eigen::VectorXd& lambda, Eigen::VectorXd* grad) const {
    const Eigen::MatrixXd scaled = lambda.cwiseInverse().asDiagonal() * Z;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(scaled);
    const Eigen::MatrixXd r =
        qr.matrixQR().topRows(Z.cols()).triangularView<Eigen::Upper>();
    const Eigen::VectorXd u =
        r.transpose().triangularView<Eigen::Lower>().solve(v);
    if (grad) {
      const Eigen::VectorXd w = r.triangularView<Eigen::Upper>().solve(u);
      const Eigen::VectorXd zw = Z * w;
      *grad = 2.0 * zw.array().square() / lambda.array().cube();
    }
    return u.squaredNorm();
  }
};

inline Eigen::VectorXd project_to_sphere(Eigen::VectorXd lambda, double floor) {
  lambda = lambda.cwiseMax(floor);
  return lambda / lambda.norm();
}

}  // namespace drift_detail

// Estimate of sup over omega of [1^T Z (Z^T Omega Z)^{-1} Z^T 1] / [sum 1/w_i],
// via multi-start projected gradient ascent over the positive unit sphere in
// lambda (lambda_i proportional to 1/sqrt(w_i)) plus random probing. Every
// evaluation is an exact ratio value, so the result is a lower bound of the
// supremum. The budget counts objective evaluations.
inline double rho1_estimate(const Eigen::MatrixXd& Z, const Eigen::VectorXd& e,
                            long budget = 20000) {
  const Eigen::Index n = Z.rows(), p = Z.cols();
  if (n == p)
    throw std::invalid_argument(
        "rho1_estimate: square full-rank Z admits no positive null vector");
  const auto [full_rank, rank] = check_rank(Z);
  if (!full_rank)
    throw std::invalid_argument("rho1_estimate: Z must have full column rank");
  if (e.size() != n || (e.array() <= 0.0).any())
    throw std::invalid_argument("rho1_estimate: e must be a positive n-vector");
  if ((Z.transpose() * e).cwiseAbs().maxCoeff() >
      null_vector_feasibility_tol(Z, e))
    throw std::invalid_argument("rho1_estimate: e is not a null vector of Z^T");
  if (budget < 100) throw std::invalid_argument("rho1_estimate: budget too small");

  drift_detail::RatioObjective objective(Z);
  if (objective.v.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  constexpr double kFloor = 1e-8;
  long evals = 0;
  double best = 0.0;

  auto ascend = [&](Eigen::VectorXd lambda, long max_evals) {
    lambda = drift_detail::project_to_sphere(std::move(lambda), kFloor);
    Eigen::VectorXd grad(n);
    double g = objective.value(lambda, &grad);
    ++evals;
    double step = 0.1;
    long used = 1;
    while (used < max_evals && evals < budget && step > 1e-14) {
      Eigen::VectorXd dir = grad - grad.dot(lambda) * lambda;
      const double dn = dir.norm();
      if (dn < 1e-15 * (1.0 + grad.norm())) break;
      const Eigen::VectorXd trial =
          drift_detail::project_to_sphere(lambda + (step / dn) * dir, kFloor);
      Eigen::VectorXd trial_grad(n);
      const double trial_g = objective.value(trial, &trial_grad);
      ++evals;
      ++used;
      if (trial_g > g) {
        if (trial_g < g * (1.0 + 1e-14)) {
          lambda = trial;
          g = trial_g;
          grad = trial_grad;
          break;
        }
        lambda = trial;
        g = trial_g;
        grad = trial_grad;
        step = std::min(step * 1.3, 1.0);
      } else {
        step *= 0.4;
      }
    }
    best = std::max(best, g);
  };

  RngStream rng(0x9E3779B9u, static_cast<std::uint64_t>(n * 131 + p));
  const long per_start = std::max<long>(50, budget / 8);

  // Deterministic starts: uniform, then each coordinate slightly favored.
  ascend(Eigen::VectorXd::Ones(n), per_start);
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n, 4); ++i) {
    Eigen::VectorXd lambda = Eigen::VectorXd::Ones(n);
    lambda[i] = 4.0;
    ascend(lambda, per_start);
  }

  // Random probes; the best probes seed further ascents.
  std::vector<std::pair<double, Eigen::VectorXd>> probes;
  const long n_probes = std::max<long>(8, budget / 4);
  for (long k = 0; k < n_probes && evals < budget; ++k) {
    Eigen::VectorXd lambda(n);
    for (Eigen::Index i = 0; i < n; ++i)
      lambda[i] = std::sqrt(rng.exponential());
    lambda = drift_detail::project_to_sphere(std::move(lambda), kFloor);
    const double g = objective.value(lambda, nullptr);
    ++evals;
    best = std::max(best, g);
    probes.emplace_back(g, std::move(lambda));
  }
  std::sort(probes.begin(), probes.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t k = 0; k < probes.size() && k < 4 && evals < budget; ++k)
    ascend(probes[k].second, per_start);

  if (best >= 1.0 - 1e-9)
    throw CertificateError(
        "rho1_estimate: ratio supremum estimate reached 1; the contraction "
        "argument does not certify this design numerically");
  return best;
}

// L(s) = max{ 2^{s+1} Gamma(2s+1) / Gamma(s+1) + f0, 8 C + 1 }.
inline double L_of_s(double s, double f0) {
  if (!(s > 0.0) || s > 1.0)
    throw std::invalid_argument("L_of_s: need 0 < s <= 1");
  if (!(f0 >= 0.0)) throw std::invalid_argument("L_of_s: f0 must be nonnegative");
  const double gamma_arm =
      std::pow(2.0, s + 1.0) * std::tgamma(2.0 * s + 1.0) / std::tgamma(s + 1.0) +
      f0;
  return std::max(gamma_arm, 8.0 * kCatalan + 1.0);
}

struct F0GridSpec {
  double b_max = 50.0;
  double step = 0.05;
  void validate() const {
    if (!(b_max > 1.0) || !(step > 0.0) || step > b_max)
      throw std::invalid_argument("F0GridSpec: need b_max > 1 and 0 < step <= b_max");
  }
};

struct F0Estimate {
  double value = 0.0;   // sup over the scanned grid of |f(b)|
  double b_at_max = 0.0;
  double tail_abs_f = 0.0;  // |f| at b_max, monitored for decay toward 0
};

namespace drift_detail {

// f(b) = (1+e^{-b}) (b^s / Gamma(s)) \int_0^inf t^{s-1} e^{-t/2} / (1+e^{-b-t}) dt
//        - 2^s b^s.
inline double f0_integrand_eval(double s, double b, double rel_tol) {
  auto h = [&](double t) {
    const double logistic = 1.0 / (1.0 + std::exp(-(b + t)));
    return std::pow(t, s - 1.0) * std::exp(-0.5 * t) * logistic;
  };
  // t^{s-1} is singular at 0 for s < 1; split at 1 and use the matching rules.
  const auto head = integrate_endpoint_singular(h, 0.0, 1.0, rel_tol);
  const auto tail = integrate_upper_tail(h, 1.0, rel_tol);
  const double integral = head.value + tail.value;
  return (1.0 + std::exp(-b)) * std::pow(b, s) / std::tgamma(s) * integral -
         std::pow(2.0, s) * std::pow(b, s);
}

}  // namespace drift_detail

// Numerically locate f0 = sup_b |f(b)|: scan a uniform grid, then refine
// around the grid maximizer by golden-section search. The tail beyond b_max
// is monitored (f decays to 0) but not scanned.
inline F0Estimate estimate_f0(double s, const F0GridSpec& grid = {}) {
  if (!(s > 0.0) || s > 1.0)
    throw std::invalid_argument("estimate_f0: need 0 < s <= 1");
  grid.validate();
  constexpr double kQuadTol = 1e-10;
  auto abs_f = [&](double b) {
    return std::fabs(drift_detail::f0_integrand_eval(s, b, kQuadTol));
  };

  F0Estimate out;
  for (double b = grid.step; b <= grid.b_max + 1e-12; b += grid.step) {
    const double value = abs_f(b);
    if (value > out.value) {
      out.value = value;
      out.b_at_max = b;
    }
  }
  // Golden-section refinement on the bracketing interval.
  double lo = std::max(grid.step * 0.5, out.b_at_max - grid.step);
  double hi = std::min(grid.b_max, out.b_at_max + grid.step);
  const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = abs_f(x1), f2 = abs_f(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = abs_f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = abs_f(x1);
    }
  }
  const double refined = std::max(f1, f2);
  if (refined > out.value) {
    out.value = refined;
    out.b_at_max = f1 > f2 ? x1 : x2;
  }
  out.tail_abs_f = abs_f(grid.b_max);
  return out;
}

enum class SelectionPolicy { midpoint, minimize_rho };

struct DriftCertificate {
  double rho1_hat = 0.0;
  double c1_sq = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  double L0 = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double f0 = 0.0;       // sup |f| for s = 1 (enters L1)
  double f0_half = 0.0;  // sup |f| for s = 1/2 (enters L2)
  double f0_grid_b_max = 0.0;
  double f0_grid_step = 0.0;
  std::string tail_caveat;
  long n_obs = 0;
  long verified_points = 0;
  long violations = 0;
};

namespace drift_detail {

inline double rho_of(double rho1_hat, double c1_sq, double alpha) {
  const double r = std::sqrt(rho1_hat);
  return std::max(r * (1.0 + c1_sq / (2.0 * alpha)),
                  std::sqrt(2.0 / kPi) * (2.0 * alpha + c1_sq));
}

}  // namespace drift_detail

// Assemble the geometric-drift constants. c1_sq must satisfy
// c1_sq < sqrt(pi/2) (1 - sqrt(rho1)); alpha lies in the open interval
// ( c1_sq sqrt(rho1) / (2 (1 - sqrt(rho1))), (sqrt(pi/2) - c1_sq) / 2 ).
// The midpoint policy takes the midpoint of each admissible interval; the
// minimize_rho policy grid-searches (c1_sq, alpha) for the smallest rho.
inline DriftCertificate build_certificate(const Dataset& dataset,
                                          double rho1_hat,
                                          SelectionPolicy policy =
                                              SelectionPolicy::midpoint,
                                          const F0GridSpec& f0_grid = {}) {
  dataset.validate();
  if (!(rho1_hat >= 0.0) || rho1_hat >= 1.0)
    throw CertificateError(
        "build_certificate: rho1 estimate must lie in [0, 1); the admissible "
        "(c1, alpha) interval is empty");
  const double sqrt_rho1 = std::sqrt(rho1_hat);
  const double half_pi_root = std::sqrt(kPi / 2.0);
  const double c1_cap = half_pi_root * (1.0 - sqrt_rho1);

  DriftCertificate cert;
  cert.rho1_hat = rho1_hat;
  cert.n_obs = dataset.n();

  auto alpha_window = [&](double c1_sq) {
    const double lo =
        sqrt_rho1 > 0.0 ? 0.5 * c1_sq * sqrt_rho1 / (1.0 - sqrt_rho1) : 0.0;
    const double hi = 0.5 * (half_pi_root - c1_sq);
    return std::pair<double, double>(lo, hi);
  };

  if (policy == SelectionPolicy::midpoint) {
    cert.c1_sq = 0.5 * c1_cap;
    const auto [lo, hi] = alpha_window(cert.c1_sq);
    if (!(lo < hi))
      throw CertificateError("build_certificate: empty alpha interval");
    cert.alpha = 0.5 * (lo + hi);
  } else {
    double best_rho = 2.0;
    for (int i = 1; i < 200; ++i) {
      const double c1_sq = c1_cap * double(i) / 200.0;
      const auto [lo, hi] = alpha_window(c1_sq);
      if (!(lo < hi)) continue;
      for (int j = 1; j < 200; ++j) {
        const double alpha = lo + (hi - lo) * double(j) / 200.0;
        const double rho = drift_detail::rho_of(rho1_hat, c1_sq, alpha);
        if (rho < best_rho) {
          best_rho = rho;
          cert.c1_sq = c1_sq;
          cert.alpha = alpha;
        }
      }
    }
    if (best_rho >= 1.0)
      throw CertificateError("build_certificate: no contractive (c1, alpha)");
  }

  cert.rho = drift_detail::rho_of(rho1_hat, cert.c1_sq, cert.alpha);
  if (!(cert.rho < 1.0))
    throw CertificateError("build_certificate: rho did not fall below 1");

  const auto f0_one = estimate_f0(1.0, f0_grid);
  const auto f0_half = estimate_f0(0.5, f0_grid);
  cert.f0 = f0_one.value;
  cert.f0_half = f0_half.value;
  cert.f0_grid_b_max = f0_grid.b_max;
  cert.f0_grid_step = f0_grid.step;
  cert.L1 = L_of_s(1.0, cert.f0);
  cert.L2 = L_of_s(0.5, cert.f0_half);
  const double n = double(dataset.n());
  cert.L0 = n / (2.0 * cert.c1_sq) + cert.alpha * n * cert.L1 + n * cert.L2 +
            n / 4.0;
  cert.tail_caveat =
      "f0 is a grid supremum over [0, " + std::to_string(f0_grid.b_max) +
      "]; |f(b_max)| = " + std::to_string(std::max(f0_one.tail_abs_f,
                                                   f0_half.tail_abs_f)) +
      " and f tends to 0 beyond, monitored but not scanned";
  return cert;
}

// Chebyshev-Lobatto barycentric interpolant of b -> E(omega^{-s}) for
// omega ~ PG(1, b) on [0, b_max]; falls back to direct quadrature beyond.
class InvMomentTable {
 public:
  InvMomentTable(double s, double b_max = 64.0, int n_nodes = 129)
      : s_(s), b_max_(b_max), nodes_(n_nodes), values_(n_nodes) {
    if (n_nodes < 8) throw std::invalid_argument("InvMomentTable: too few nodes");
    for (int j = 0; j < n_nodes; ++j) {
      const double x = std::cos(kPi * double(j) / double(n_nodes - 1));
      nodes_[j] = 0.5 * (x + 1.0) * b_max;
      values_[j] = pg_inv_moment(nodes_[j], s);
    }
    // Self-check at off-node points; the interpolant must agree with direct
    // quadrature or the table is unusable.
    RngStream rng(17, static_cast<std::uint64_t>(s * 1024));
    for (int k = 0; k < 9; ++k) {
      const double b = rng.uniform() * b_max;
      const double direct = pg_inv_moment(b, s);
      if (std::fabs(eval_interp(b) - direct) > 1e-7 * std::fabs(direct))
        throw NumericError("InvMomentTable: interpolant failed validation");
    }
  }

  double operator()(double b) const {
    if (b > b_max_) return pg_inv_moment(b, s_);
    return eval_interp(b);
  }

 private:
  double eval_interp(double b) const {
    const int n = static_cast<int>(nodes_.size());
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = b - nodes_[j];
      if (d == 0.0) return values_[j];
      double w = (j % 2 == 0) ? 1.0 : -1.0;
      if (j == 0 || j == n - 1) w *= 0.5;
      num += w / d * values_[j];
      den += w / d;
    }
    return num / den;
  }

  double s_;
  double b_max_;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

// E[V(omega) | beta] = sum_i alpha E(w_i^{-1}) + E(w_i^{-1/2}) + E(w_i),
// with w_i ~ PG(1, |x_i^T beta|); all three conditional moments are
// semi-analytic.
inline double drift_inner_expectation(const Eigen::VectorXd& t, double alpha,
                                      const InvMomentTable& inv_one,
                                      const InvMomentTable& inv_half) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double b = std::fabs(t[i]);
    total += alpha * inv_one(b) + inv_half(b) + pg_mean(b);
  }
  return total;
}

struct VerifyResult {
  long verified_points = 0;
  long violations = 0;
  std::vector<double> margins;  // (rho V + L0) - estimated E[V | omega'], per point
  double min_margin = 0.0;
};

// Constant test points with entries log-spaced over [lo, hi].
inline std::vector<OmegaVec> log_spaced_points(Eigen::Index n_obs, int count,
                                               double lo, double hi) {
  if (count < 1 || !(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("log_spaced_points: bad range");
  std::vector<OmegaVec> points;
  points.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : double(k) / double(count - 1);
    const double w = std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo)));
    points.push_back(OmegaVec::Constant(n_obs, w));
  }
  return points;
}

// Empirical check of the geometric-drift inequality
// E[V(omega) | omega'] <= rho V(omega') + L0 at each test point: draw beta
// from its conditional given omega', average the semi-analytic inner
// expectation, and flag a violation only when the estimate clears the bound
// by more than 3 Monte Carlo standard errors.
inline VerifyResult verify_drift(const Dataset& dataset,
                                 const DriftCertificate& cert,
                                 const std::vector<OmegaVec>& test_points,
                                 long mc_draws = 2000,
                                 std::uint64_t seed = 2026) {
  dataset.validate();
  if (mc_draws < 10)
    throw std::invalid_argument("verify_drift: mc_draws too small");
  if (!(cert.rho > 0.0) || !(cert.rho < 1.0) || !(cert.alpha > 0.0))
    throw std::invalid_argument("verify_drift: certificate is not valid");
  const InvMomentTable inv_one(1.0), inv_half(0.5);
  const DriftFunctionParams v_params{cert.alpha};

  VerifyResult result;
  result.min_margin = std::numeric_limits<double>::infinity();
  RngStream rng(seed, 0xD41F7u);
  for (const auto& point : test_points) {
    const auto params = beta_conditional_params(point, dataset);
    double sum = 0.0, sum_sq = 0.0;
    for (long d = 0; d < mc_draws; ++d) {
      const Beta beta = draw_beta_given_omega(params, rng);
      const double inner =
          drift_inner_expectation(dataset.X * beta, cert.alpha, inv_one,
                                  inv_half);
      sum += inner;
      sum_sq += inner * inner;
    }
    const double estimate = sum / double(mc_draws);
    const double var = std::max(0.0, sum_sq / double(mc_draws) - estimate * estimate);
    const double se = std::sqrt(var / double(mc_draws));
    const double bound = cert.rho * drift_V(point, v_params) + cert.L0;
    const double margin = bound - estimate;
    result.margins.push_back(margin);
    result.min_margin = std::min(result.min_margin, margin);
    ++result.verified_points;
    if (estimate - 3.0 * se > bound) ++result.violations;
  }
  return result;
}

}  // namespace pggibbs
