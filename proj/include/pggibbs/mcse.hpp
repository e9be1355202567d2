#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pggibbs/errors.hpp"

namespace pggibbs {

// Nonoverlapping batch means with batch size floor(sqrt(m)). Returns the
// asymptotic-variance estimate and the batch size used. Draws beyond the
// last full batch are ignored.
inline std::pair<double, long> batch_means(const std::vector<double>& draws) {
  const auto m = static_cast<long>(draws.size());
  if (m < 100)
    throw InsufficientDataError(
        "batch_means: need at least 100 draws, got " + std::to_string(m));
  const long b = static_cast<long>(std::floor(std::sqrt(double(m))));
  const long k = m / b;
  const long used = k * b;
  double grand = 0.0;
  for (long i = 0; i < used; ++i) grand += draws[i];
  grand /= double(used);
  double ss = 0.0;
  for (long j = 0; j < k; ++j) {
    double bm = 0.0;
    for (long i = j * b; i < (j + 1) * b; ++i) bm += draws[i];
    bm /= double(b);
    ss += (bm - grand) * (bm - grand);
  }
  return {double(b) * ss / double(k - 1), b};
}

struct FunctionMcse {
  std::string name;
  double estimate = 0.0;
  double sigma_h_sq_hat = 0.0;
  double mcse = 0.0;
  double ess = 0.0;
  long batch_size = 0;
  long n_batches = 0;
};

struct McseReport {
  long total_draws = 0;
  long n_chains = 0;
  std::vector<FunctionMcse> functions;
  std::string note;
};

namespace mcse_detail {

// One function of interest across chains: length-weighted mean, averaged
// per-chain batch-means variances, ESS from the pooled sample variance.
inline FunctionMcse combine(const std::vector<std::vector<double>>& chains,
                            std::string name) {
  FunctionMcse out;
  out.name = std::move(name);
  long m = 0;
  double sum = 0.0;
  double sigma_sq_sum = 0.0;
  for (const auto& chain : chains) {
    const auto [sigma_sq, b] = batch_means(chain);
    sigma_sq_sum += sigma_sq;
    out.batch_size = b;
    out.n_batches += static_cast<long>(chain.size()) / b;
    m += static_cast<long>(chain.size());
    double chain_sum = 0.0;
    for (double v : chain) chain_sum += v;
    sum += chain_sum;
  }
  out.estimate = sum / double(m);
  out.sigma_h_sq_hat = sigma_sq_sum / double(chains.size());
  out.mcse = std::sqrt(out.sigma_h_sq_hat / double(m));
  double ss = 0.0;
  for (const auto& chain : chains) {
    double chain_ss = 0.0;
    for (double v : chain) chain_ss += (v - out.estimate) * (v - out.estimate);
    ss += chain_ss;
  }
  const double sample_var = m > 1 ? ss / double(m - 1) : 0.0;
  out.ess = out.sigma_h_sq_hat > 0.0
                ? double(m) * sample_var / out.sigma_h_sq_hat
                : double(m);
  return out;
}

}  // namespace mcse_detail

// Posterior-mean report for the identity and the square of each coordinate.
// Each chain is a kept-by-p matrix of draws.
inline McseReport make_report(const std::vector<Eigen::MatrixXd>& chains,
                              const std::vector<std::string>& coef_names) {
  if (chains.empty()) throw std::invalid_argument("make_report: no chains");
  const Eigen::Index p = chains[0].cols();
  for (const auto& chain : chains)
    if (chain.cols() != p)
      throw std::invalid_argument("make_report: chains disagree on dimension");
  if (static_cast<Eigen::Index>(coef_names.size()) != p)
    throw std::invalid_argument("make_report: coefficient name count mismatch");

  McseReport report;
  report.n_chains = static_cast<long>(chains.size());
  for (const auto& chain : chains)
    report.total_draws += static_cast<long>(chain.rows());
  report.note =
      "all polynomial moments of the coefficients are finite when the "
      "posterior is proper, so means and squares admit CLT standard errors";

  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<std::vector<double>> id_chains, sq_chains;
    for (const auto& chain : chains) {
      std::vector<double> id(chain.rows()), sq(chain.rows());
      for (Eigen::Index i = 0; i < chain.rows(); ++i) {
        id[static_cast<size_t>(i)] = chain(i, j);
        sq[static_cast<size_t>(i)] = chain(i, j) * chain(i, j);
      }
      id_chains.push_back(std::move(id));
      sq_chains.push_back(std::move(sq));
    }
    report.functions.push_back(
        mcse_detail::combine(id_chains, coef_names[static_cast<size_t>(j)]));
    report.functions.push_back(mcse_detail::combine(
        sq_chains, coef_names[static_cast<size_t>(j)] + "^2"));
  }
  return report;
}

}  // namespace pggibbs
