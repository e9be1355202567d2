#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pggibbs/errors.hpp"
#include "pggibbs/model.hpp"
#include "pggibbs/polya_gamma.hpp"
#include "pggibbs/propriety.hpp"
#include "pggibbs/rng.hpp"

namespace pggibbs {

struct ChainState {
  Beta beta;
  OmegaVec omega;
  long iteration = 0;
  RngStream rng;
};

struct SamplerConfig {
  long n_iterations = 0;
  long n_burnin = 0;
  long n_chains = 1;
  std::uint64_t seed = 0;
  std::optional<Beta> init_beta;  // absent means the zero vector
  long thin = 1;
  bool allow_improper = false;
  bool keep_omega = false;  // debug only; omega stays internal otherwise

  void validate(Eigen::Index p) const {
    if (n_iterations <= 0)
      throw std::invalid_argument("SamplerConfig: n_iterations must be positive");
    if (n_burnin < 0 || n_burnin >= n_iterations)
      throw std::invalid_argument("SamplerConfig: need 0 <= n_burnin < n_iterations");
    if (n_chains <= 0)
      throw std::invalid_argument("SamplerConfig: n_chains must be positive");
    if (thin < 1) throw std::invalid_argument("SamplerConfig: thin must be >= 1");
    if (init_beta && init_beta->size() != p)
      throw std::invalid_argument("SamplerConfig: init_beta length does not match the design");
  }

  long kept_per_chain() const { return (n_iterations - n_burnin + thin - 1) / thin; }
};

// Conditional Gaussian for beta: mean (X^T Omega X)^{-1} X^T kappa with the
// precision kept in factored form; no inverse is ever formed.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  Eigen::LLT<Eigen::MatrixXd> chol;
};

inline OmegaVec draw_omega_given_beta(const Beta& beta, const Dataset& dataset,
                                      RngStream& rng) {
  if (beta.size() != dataset.p())
    throw std::invalid_argument("draw_omega_given_beta: beta length mismatch");
  const Eigen::VectorXd t = dataset.X * beta;
  OmegaVec omega(dataset.n());
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    omega[i] = pg_sample(std::fabs(t[i]), rng);
    if (!(omega[i] > 0.0))
      throw NumericError("draw_omega_given_beta: nonpositive draw (underflow)");
  }
  return omega;
}

inline GaussianParams beta_conditional_params(const OmegaVec& omega,
                                              const Dataset& dataset) {
  if (omega.size() != dataset.n())
    throw std::invalid_argument("beta_conditional_params: omega length mismatch");
  if ((omega.array() <= 0.0).any())
    throw std::invalid_argument("beta_conditional_params: omega must be positive");
  GaussianParams params;
  params.precision = dataset.X.transpose() * omega.asDiagonal() * dataset.X;
  params.precision = 0.5 * (params.precision + params.precision.transpose()).eval();
  params.chol.compute(params.precision);
  if (params.chol.info() != Eigen::Success)
    throw NumericError(
        "beta_conditional_params: precision factorization failed; "
        "check that the design matrix has full column rank");
  const Eigen::VectorXd rhs =
      dataset.X.transpose() * (dataset.y.cast<double>().array() - 0.5).matrix();
  params.mean = params.chol.solve(rhs);
  // One refinement step keeps the solve accurate even for wide omega ranges.
  params.mean += params.chol.solve(rhs - params.precision * params.mean);
  const double resid = (params.precision * params.mean - rhs).cwiseAbs().maxCoeff();
  if (!(resid <= 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())))
    throw NumericError("beta_conditional_params: normal-equation residual too large");
  return params;
}

inline Beta draw_beta_given_omega(const GaussianParams& params, RngStream& rng) {
  Eigen::VectorXd xi(params.mean.size());
  for (Eigen::Index j = 0; j < xi.size(); ++j) xi[j] = rng.normal();
  // beta = m + L^{-T} xi has covariance (L L^T)^{-1} = precision^{-1}.
  return params.mean +
         params.chol.matrixU().solve(xi);
}

// Per-observation projections mu_i = x_i^T m and sigma_i^2 = x_i^T P^{-1} x_i.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> project_moments(
    const GaussianParams& params, const Eigen::MatrixXd& X) {
  Eigen::VectorXd mu = X * params.mean;
  Eigen::VectorXd sigma_sq(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd u = params.chol.matrixL().solve(X.row(i).transpose());
    sigma_sq[i] = u.squaredNorm();
  }
  return {std::move(mu), std::move(sigma_sq)};
}

inline ChainState gibbs_step(const ChainState& state, const Dataset& dataset) {
  ChainState next = state;
  next.omega = draw_omega_given_beta(state.beta, dataset, next.rng);
  next.beta = draw_beta_given_omega(beta_conditional_params(next.omega, dataset),
                                    next.rng);
  next.iteration = state.iteration + 1;
  return next;
}

struct RunResult {
  std::vector<Eigen::MatrixXd> beta_draws;   // one kept-by-p matrix per chain
  std::vector<Eigen::MatrixXd> omega_draws;  // filled only when keep_omega
};

inline RunResult run_chains(const Dataset& dataset, const SamplerConfig& config) {
  dataset.validate();
  config.validate(dataset.p());
  if (!config.allow_improper) {
    const auto report = check_propriety(dataset);
    if (!report.proper)
      throw ImproperPosteriorError(
          "run_chains: the posterior is improper (" + report.note +
          "); the chain would not converge, refusing to sample");
  }

  const long kept = config.kept_per_chain();
  RunResult result;
  result.beta_draws.assign(config.n_chains,
                           Eigen::MatrixXd(kept, dataset.p()));
  if (config.keep_omega)
    result.omega_draws.assign(config.n_chains,
                              Eigen::MatrixXd(kept, dataset.n()));

  std::vector<std::exception_ptr> failures(config.n_chains);
  auto worker = [&](long chain) {
    try {
      ChainState state;
      state.beta = config.init_beta ? *config.init_beta
                                    : Beta(Beta::Zero(dataset.p()));
      state.rng = RngStream(config.seed, static_cast<std::uint64_t>(chain));
      long row = 0;
      for (long idx = 1; idx <= config.n_iterations; ++idx) {
        state = gibbs_step(state, dataset);
        if (idx > config.n_burnin &&
            (idx - config.n_burnin - 1) % config.thin == 0) {
          result.beta_draws[chain].row(row) = state.beta.transpose();
          if (config.keep_omega)
            result.omega_draws[chain].row(row) = state.omega.transpose();
          ++row;
        }
      }
      if (row != kept)
        throw NumericError("run_chains: kept-draw bookkeeping mismatch");
    } catch (...) {
      failures[chain] = std::current_exception();
    }
  };

  if (config.n_chains == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(config.n_chains);
    for (long c = 0; c < config.n_chains; ++c) threads.emplace_back(worker, c);
    for (auto& t : threads) t.join();
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace pggibbs
