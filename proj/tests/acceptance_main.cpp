// Acceptance gate: ten end-to-end checks covering distribution identities,
// propriety, conditional-moment algebra, stationarity, drift certificates,
// CLT coverage, and bit-exact reproducibility. Runs all checks by default;
// an index argument runs one. Exit status 0 only when every check passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "oracles.hpp"
#include "pggibbs.hpp"

using namespace pggibbs;

namespace {

namespace fs = std::filesystem;

std::string data_file(const std::string& name) {
  return std::string(PGGIBBS_DATA_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir =
      fs::temp_directory_path() / "pggibbs_acceptance" / tag;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  const double n = double(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  MeanSe out;
  out.mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

double posterior_logw(const Dataset& d, double beta) {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double t = d.X(i, 0) * beta;
    lp += d.y[i] * t - log1pexp(t);
  }
  return lp;
}

double posterior_mean_oracle(const Dataset& d) {
  const double z = oracle::quad(
      [&](double b) { return std::exp(posterior_logw(d, b)); }, -40.0, 40.0);
  const double num = oracle::quad(
      [&](double b) { return b * std::exp(posterior_logw(d, b)); }, -40.0,
      40.0);
  return num / z;
}

// 1. Empirical PG(1,b) means against the analytic tanh curve, and the
//    uniform 1/4 ceiling.
bool pg_moment_identity() {
  RngStream rng(2026, 1);
  for (double b : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    std::vector<double> draws(100000);
    for (double& w : draws) w = pg_sample(b, rng);
    const MeanSe ms = mean_se(draws);
    const double target = pg_mean(b);
    if (!(target <= 0.25 + 1e-15)) {
      std::printf("       pg_mean(%g) = %.12f exceeds 1/4\n", b, target);
      return false;
    }
    if (std::fabs(ms.mean - target) > 3.0 * ms.se) {
      std::printf("       b = %g: mean %.6f vs %.6f, se %.2e\n", b, ms.mean,
                  target, ms.se);
      return false;
    }
  }
  return true;
}

// 2. E(1/omega) at b = 0 equals eight Catalan constants, by quadrature and
//    by a million-draw Monte Carlo average.
bool catalan_identity() {
  const double by_quadrature = pg_inv_moment(0.0, 1.0);
  if (std::fabs(by_quadrature - 7.3277248) > 1e-4) {
    std::printf("       quadrature gave %.8f\n", by_quadrature);
    return false;
  }
  RngStream rng(2026, 2);
  std::vector<double> inv(1000000);
  for (double& v : inv) v = 1.0 / pg_sample(0.0, rng);
  const MeanSe ms = mean_se(inv);
  if (std::fabs(ms.mean - 8.0 * kCatalan) > 3.0 * ms.se) {
    std::printf("       MC mean %.6f vs %.6f, se %.2e\n", ms.mean,
                8.0 * kCatalan, ms.se);
    return false;
  }
  return true;
}

// 3. The inverse-moment envelope E(omega^{-s}) <= (2b)^s + L(s).
bool inverse_moment_bound() {
  const double f0_one = estimate_f0(1.0).value;
  const double f0_half = estimate_f0(0.5).value;
  for (double s : {0.5, 1.0}) {
    const double L = L_of_s(s, s == 1.0 ? f0_one : f0_half);
    for (double b : {0.0, 0.5, 1.0, 3.0, 10.0}) {
      const double moment = pg_inv_moment(b, s);
      const double envelope = std::pow(2.0 * b, s) + L;
      if (!(moment <= envelope + 1e-12)) {
        std::printf("       s = %g, b = %g: %.12f > %.12f\n", s, b, moment,
                    envelope);
        return false;
      }
    }
  }
  return true;
}

// 4. check_propriety against the exact integer oracle on every design with
//    n <= 6, p <= 2, X entries in {-1,0,1}, and every y. The answer depends
//    only on the multiset of sign-flipped rows, so each unique multiset is
//    evaluated once through both routes and cached; a random 0.1% of
//    instances bypass the cache entirely as a spot check.
bool propriety_oracle_equivalence() {
  RngStream spot_rng(2026, 4);
  long instances = 0, unique_keys = 0, spot_checks = 0;

  for (int p = 1; p <= 2; ++p) {
    const int n_codes = p == 1 ? 3 : 9;
    std::vector<int> flip(n_codes);
    for (int c = 0; c < n_codes; ++c) {
      const int lo = c % 3, hi = c / 3;
      flip[c] = (2 - lo) + (p == 2 ? 3 * (2 - hi) : 0);
    }

    for (int n = 1; n <= 6; ++n) {
      long n_designs = 1;
      for (int k = 0; k < n * p; ++k) n_designs *= 3;

      std::vector<int> trits(static_cast<size_t>(n * p));
      std::unordered_map<std::uint64_t, bool> cache;

      auto evaluate_both = [&](const std::vector<int>& tr, int mask,
                               bool* agree) {
        Dataset d;
        d.X.resize(n, p);
        d.y.resize(n);
        oracle::IntDesign xd;
        xd.p = p;
        std::vector<int> y(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          std::array<long long, 2> row{0, 0};
          for (int j = 0; j < p; ++j) {
            const int v = tr[static_cast<size_t>(i * p + j)] - 1;
            d.X(i, j) = v;
            row[static_cast<size_t>(j)] = v;
          }
          xd.z.push_back(row);
          y[static_cast<size_t>(i)] = (mask >> i) & 1;
          d.y[i] = y[static_cast<size_t>(i)];
        }
        const bool lp_route = check_propriety(d).proper;
        const bool exact_route = oracle::proper_exact(xd, y);
        *agree = lp_route == exact_route;
        return lp_route;
      };

      for (long design = 0; design < n_designs; ++design) {
        long rest = design;
        for (int k = 0; k < n * p; ++k) {
          trits[static_cast<size_t>(k)] = int(rest % 3);
          rest /= 3;
        }
        std::vector<int> codes(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
          codes[static_cast<size_t>(i)] =
              trits[static_cast<size_t>(i * p)] +
              (p == 2 ? 3 * trits[static_cast<size_t>(i * p + 1)] : 0);

        for (int mask = 0; mask < (1 << n); ++mask) {
          int counts[9] = {0};
          for (int i = 0; i < n; ++i) {
            const int c = codes[static_cast<size_t>(i)];
            ++counts[(mask >> i) & 1 ? flip[c] : c];
          }
          std::uint64_t key = std::uint64_t(p);
          for (int c = 0; c < n_codes; ++c)
            key = key * 8 + std::uint64_t(counts[c]);

          ++instances;
          bool agree = true;
          const auto hit = cache.find(key);
          if (hit == cache.end()) {
            const bool proper = evaluate_both(trits, mask, &agree);
            if (!agree) {
              std::printf("       disagreement at n=%d p=%d design=%ld "
                          "mask=%d\n", n, p, design, mask);
              return false;
            }
            cache.emplace(key, proper);
            ++unique_keys;
          } else if (spot_rng.uniform() < 0.001) {
            ++spot_checks;
            const bool proper = evaluate_both(trits, mask, &agree);
            if (!agree || proper != hit->second) {
              std::printf("       spot check failed at n=%d p=%d design=%ld "
                          "mask=%d\n", n, p, design, mask);
              return false;
            }
          }
        }
      }
    }
  }
  std::printf("       %ld instances, %ld unique row multisets, %ld spot "
              "checks\n", instances, unique_keys, spot_checks);
  return true;
}

// 5. Conditional-Gaussian algebra on random instances: the variance ceiling
//    sigma_i^2 <= 1/w_i, the Cauchy-Schwarz bound on sum |mu_i|, and the
//    quarter-identity between the kappa and Z quadratic forms.
bool conditional_moment_algebra() {
  RngStream rng(2026, 5);
  for (int rep = 0; rep < 10000; ++rep) {
    const int p = 1 + int(rng.next_u64() % 3);
    const int n = p + 1 + int(rng.next_u64() % 6);
    Dataset d;
    d.X.resize(n, p);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
      d.y[i] = rng.uniform() < 0.5 ? 0 : 1;
    }
    OmegaVec omega(n);
    for (int i = 0; i < n; ++i) omega[i] = std::exp(1.5 * rng.normal());

    const GaussianParams params = beta_conditional_params(omega, d);
    const auto [mu, sigma_sq] = project_moments(params, d.X);

    for (int i = 0; i < n; ++i) {
      if (!(sigma_sq[i] <= 1.0 / omega[i] + 1e-9 / omega[i])) {
        std::printf("       rep %d: sigma_%d^2 = %.12e > 1/w = %.12e\n", rep,
                    i, sigma_sq[i], 1.0 / omega[i]);
        return false;
      }
    }

    const DerivedDesign derived = derive(d);
    const Eigen::VectorXd rhs = d.X.transpose() * derived.kappa;
    const double quad_form = rhs.dot(params.chol.solve(rhs));
    const double bound =
        std::sqrt(omega.cwiseInverse().sum()) * std::sqrt(quad_form);
    if (!(mu.cwiseAbs().sum() <= bound * (1.0 + 1e-9) + 1e-12)) {
      std::printf("       rep %d: sum |mu| = %.12e > %.12e\n", rep,
                  mu.cwiseAbs().sum(), bound);
      return false;
    }

    const Eigen::VectorXd v = derived.Z.colwise().sum().transpose();
    const Eigen::MatrixXd m =
        derived.Z.transpose() * omega.asDiagonal() * derived.Z;
    const double z_form = 0.25 * v.dot(m.llt().solve(v));
    if (std::fabs(quad_form - z_form) > 1e-9 * std::max(1.0, quad_form)) {
      std::printf("       rep %d: kappa form %.12e vs Z form %.12e\n", rep,
                  quad_form, z_form);
      return false;
    }
  }
  return true;
}

// 6. Long-run Gibbs average against direct quadrature of the posterior.
bool stationarity() {
  const Dataset d =
      make_dataset(read_csv(data_file("proper_4x1.csv")), "y", {}, false);
  SamplerConfig config;
  config.n_iterations = 210000;
  config.n_burnin = 10000;
  config.seed = 2026;
  const RunResult result = run_chains(d, config);
  const McseReport report = make_report(result.beta_draws, d.coef_names);
  const double truth = posterior_mean_oracle(d);
  const double estimate = report.functions[0].estimate;
  const double mcse = report.functions[0].mcse;
  std::printf("       mean %.6f vs %.6f (mcse %.2e)\n", estimate, truth, mcse);
  return std::fabs(estimate - truth) <= 3.0 * mcse;
}

// 7. Certificates on every bundled proper dataset: internal algebra exact,
//    rho < 1, and an empirical drift check with zero violations.
bool certificate_validity() {
  struct Fixture {
    const char* file;
    bool intercept;
  };
  for (const Fixture fixture : {Fixture{"proper_2x1.csv", true},
                                Fixture{"proper_4x1.csv", false},
                                Fixture{"proper_10x2.csv", false}}) {
    const Dataset d = make_dataset(read_csv(data_file(fixture.file)), "y", {},
                                   fixture.intercept);
    const ProprietyReport propriety = check_propriety(d);
    if (!propriety.proper) {
      std::printf("       %s: expected proper\n", fixture.file);
      return false;
    }
    const DerivedDesign derived = derive(d);
    const double rho1 =
        rho1_estimate(derived.Z, *propriety.positive_null_vector);
    const DriftCertificate cert = build_certificate(d, rho1);

    const double cap = std::sqrt(kPi / 2.0) * (1.0 - std::sqrt(rho1));
    const double lo =
        cert.c1_sq * std::sqrt(rho1) / (2.0 * (1.0 - std::sqrt(rho1)));
    const double hi = (std::sqrt(kPi / 2.0) - cert.c1_sq) / 2.0;
    const double n = double(cert.n_obs);
    const double l0 = n / (2.0 * cert.c1_sq) + cert.alpha * n * cert.L1 +
                      n * cert.L2 + n / 4.0;
    const bool algebra =
        cert.rho < 1.0 && cert.c1_sq > 0.0 && cert.c1_sq < cap &&
        cert.alpha > lo && cert.alpha < hi &&
        std::fabs(cert.rho -
                  drift_detail::rho_of(rho1, cert.c1_sq, cert.alpha)) <
            1e-14 &&
        std::fabs(cert.L0 - l0) < 1e-12 * l0 &&
        cert.L1 == L_of_s(1.0, cert.f0) && cert.L2 == L_of_s(0.5, cert.f0_half);
    if (!algebra) {
      std::printf("       %s: certificate algebra failed\n", fixture.file);
      return false;
    }

    const auto points = log_spaced_points(d.n(), 50, 1e-3, 1e3);
    const VerifyResult verify = verify_drift(d, cert, points, 2000, 2026);
    std::printf("       %s: rho = %.6f, min margin %.3f\n", fixture.file,
                cert.rho, verify.min_margin);
    if (verify.violations != 0 || verify.verified_points != 50) return false;
  }
  return true;
}

// 8. The ratio-supremum estimate dominates 10^5 random-omega ratio probes
//    on 20 random proper designs.
bool ratio_estimator_soundness() {
  RngStream rng(2026, 8);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 1 + rep % 3;
    const int n = p + 2 + int(rng.next_u64() % 7);
    Eigen::VectorXd e(n);
    for (int i = 0; i < n; ++i) e[i] = 0.5 + 1.5 * rng.uniform();
    Eigen::MatrixXd g(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) g(i, j) = rng.normal();
    const Eigen::MatrixXd z =
        g - e * (e.transpose() * g) / e.squaredNorm();

    Dataset d;
    d.X = z;
    d.y = Eigen::VectorXi::Zero(n);
    if (!check_propriety(d).proper) {
      std::printf("       rep %d: constructed design not proper\n", rep);
      return false;
    }

    const double rho1 = rho1_estimate(z, e);
    if (!(rho1 >= 0.0 && rho1 < 1.0)) {
      std::printf("       rep %d: rho1 = %.12f out of range\n", rep, rho1);
      return false;
    }

    const Eigen::VectorXd v = z.colwise().sum().transpose();
    for (int probe = 0; probe < 100000; ++probe) {
      OmegaVec omega(n);
      for (int i = 0; i < n; ++i) omega[i] = std::exp(2.0 * rng.normal());
      const Eigen::MatrixXd m = z.transpose() * omega.asDiagonal() * z;
      const double ratio =
          v.dot(m.llt().solve(v)) / omega.cwiseInverse().sum();
      if (ratio > rho1 + 1e-6) {
        std::printf("       rep %d: probe ratio %.12f > %.12f\n", rep, ratio,
                    rho1);
        return false;
      }
    }
  }
  return true;
}

// 9. Coverage of nominal 95% batch-means intervals across 200 replicates.
bool clt_coverage() {
  const Dataset d =
      make_dataset(read_csv(data_file("proper_4x1.csv")), "y", {}, false);
  const double truth = posterior_mean_oracle(d);
  long covered = 0;
  for (int rep = 0; rep < 200; ++rep) {
    SamplerConfig config;
    config.n_iterations = 21000;
    config.n_burnin = 1000;
    config.seed = 9000 + std::uint64_t(rep);
    const RunResult result = run_chains(d, config);
    const McseReport report = make_report(result.beta_draws, d.coef_names);
    const double estimate = report.functions[0].estimate;
    const double half_width = 1.96 * report.functions[0].mcse;
    if (std::fabs(estimate - truth) <= half_width) ++covered;
  }
  std::printf("       %ld of 200 intervals covered the truth\n", covered);
  return covered >= 180;
}

// 10. Byte-identical outputs under identical seeds.
bool reproducibility() {
  auto run_all = [&](const std::string& tag) {
    const fs::path dir = fresh_dir(tag);
    RunConfig config;
    config.input_path = data_file("proper_4x1.csv");
    config.output_dir = dir.string();
    config.seed = 7;
    config.n_iterations = 2000;
    config.n_burnin = 200;
    config.n_chains = 2;
    config.test_points = 10;
    config.mc_draws = 200;
    std::ostringstream sink;
    if (cmd_check(config, sink) != kExitOk) return std::string();
    if (cmd_sample(config, sink) != kExitOk) return std::string();
    if (cmd_certify(config, sink) != kExitOk) return std::string();
    return slurp((dir / "propriety.json").string()) +
           slurp((dir / "draws.csv").string()) +
           slurp((dir / "mcse.json").string()) +
           slurp((dir / "certificate.json").string());
  };
  const std::string first = run_all("repro_a");
  const std::string second = run_all("repro_b");
  if (first.empty() || second.empty()) {
    std::printf("       a command exited nonzero\n");
    return false;
  }
  if (first != second) {
    std::printf("       outputs differ between identical runs\n");
    return false;
  }
  return true;
}

struct Criterion {
  int index;
  const char* name;
  bool (*run)();
};

constexpr Criterion kCriteria[] = {
    {1, "PG moment identity", pg_moment_identity},
    {2, "Catalan inverse-moment identity", catalan_identity},
    {3, "inverse-moment envelope", inverse_moment_bound},
    {4, "propriety oracle equivalence", propriety_oracle_equivalence},
    {5, "conditional-moment algebra", conditional_moment_algebra},
    {6, "stationarity against quadrature", stationarity},
    {7, "certificate validity", certificate_validity},
    {8, "ratio-estimator soundness", ratio_estimator_soundness},
    {9, "CLT interval coverage", clt_coverage},
    {10, "byte-identical reproducibility", reproducibility},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > 10) {
      std::fprintf(stderr, "usage: %s [1-10]\n", argv[0]);
      return 1;
    }
  }

  bool all_passed = true;
  for (const Criterion& criterion : kCriteria) {
    if (only != 0 && criterion.index != only) continue;
    const auto start = std::chrono::steady_clock::now();
    bool passed = false;
    try {
      passed = criterion.run();
    } catch (const std::exception& e) {
      std::printf("       exception: %s\n", e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %2d %s (%.1fs)\n", passed ? "PASS" : "FAIL",
                criterion.index, criterion.name, seconds);
    std::fflush(stdout);
    all_passed = all_passed && passed;
  }
  return all_passed ? 0 : 1;
}
