#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "pggibbs/mcse.hpp"
#include "pggibbs/rng.hpp"

using namespace pggibbs;

TEST_CASE("batch means recovers the iid variance") {
  RngStream rng(5, 0);
  std::vector<double> draws(100000);
  for (auto& v : draws) v = rng.normal();
  const auto [sigma_sq, b] = batch_means(draws);
  REQUIRE(b == 316);
  REQUIRE(std::fabs(sigma_sq - 1.0) < 0.1);
}

TEST_CASE("batch means recovers the AR(1) asymptotic variance") {
  // x_t = 0.5 x_{t-1} + eps_t has asymptotic variance 1/(1-0.5)^2 = 4.
  RngStream rng(6, 0);
  std::vector<double> draws(1000000);
  double x = 0.0;
  for (auto& v : draws) {
    x = 0.5 * x + rng.normal();
    v = x;
  }
  const auto [sigma_sq, b] = batch_means(draws);
  REQUIRE(b == 1000);
  REQUIRE(std::fabs(sigma_sq - 4.0) < 0.4);
}

TEST_CASE("batch means degenerate and error cases") {
  std::vector<double> flat(500, 3.25);
  REQUIRE(batch_means(flat).first == 0.0);

  std::vector<double> tiny(99, 0.0);
  REQUIRE_THROWS_AS(batch_means(tiny), InsufficientDataError);
}

TEST_CASE("batch means shift and scale behavior") {
  RngStream rng(7, 1);
  std::vector<double> draws(50000);
  double x = 0.0;
  for (auto& v : draws) {
    x = 0.3 * x + rng.normal();
    v = x;
  }
  const double base = batch_means(draws).first;
  std::vector<double> shifted = draws, scaled = draws;
  for (auto& v : shifted) v += 17.0;
  for (auto& v : scaled) v *= -2.5;
  REQUIRE_THAT(batch_means(shifted).first,
               Catch::Matchers::WithinRel(base, 1e-9));
  REQUIRE_THAT(batch_means(scaled).first,
               Catch::Matchers::WithinRel(6.25 * base, 1e-9));
}

TEST_CASE("report on iid draws: ess near m and tight mcse") {
  RngStream rng(8, 0);
  const long m = 100000;
  Eigen::MatrixXd chain(m, 1);
  for (long i = 0; i < m; ++i) chain(i, 0) = 2.0 + rng.normal();
  const auto report = make_report({chain}, {"beta[0]"});
  REQUIRE(report.total_draws == m);
  REQUIRE(report.functions.size() == 2);

  const auto& id = report.functions[0];
  REQUIRE(id.name == "beta[0]");
  REQUIRE(std::fabs(id.estimate - 2.0) < 3.0 * id.mcse);
  REQUIRE(id.mcse == std::sqrt(id.sigma_h_sq_hat / double(m)));
  REQUIRE(id.ess <= double(m) * 1.1);
  REQUIRE(id.ess >= double(m) * 0.9);
  REQUIRE(id.batch_size == 316);
  REQUIRE(id.n_batches == m / 316);

  // Square function: E[(2+Z)^2] = 5.
  const auto& sq = report.functions[1];
  REQUIRE(sq.name == "beta[0]^2");
  REQUIRE(std::fabs(sq.estimate - 5.0) < 3.0 * sq.mcse);
  REQUIRE(report.note.find("polynomial moments") != std::string::npos);
}

TEST_CASE("report pools chains by length-weighted mean") {
  RngStream r1(9, 0), r2(9, 1);
  Eigen::MatrixXd c1(400, 1), c2(400, 1);
  for (long i = 0; i < 400; ++i) {
    c1(i, 0) = r1.normal();
    c2(i, 0) = r2.normal();
  }
  const auto pooled = make_report({c1, c2}, {"b"});
  REQUIRE(pooled.total_draws == 800);
  REQUIRE(pooled.n_chains == 2);
  const double manual_mean = (c1.col(0).sum() + c2.col(0).sum()) / 800.0;
  REQUIRE_THAT(pooled.functions[0].estimate,
               Catch::Matchers::WithinAbs(manual_mean, 1e-14));
  const double manual_var =
      0.5 * (batch_means(std::vector<double>(c1.col(0).data(),
                                             c1.col(0).data() + 400))
                 .first +
             batch_means(std::vector<double>(c2.col(0).data(),
                                             c2.col(0).data() + 400))
                 .first);
  REQUIRE_THAT(pooled.functions[0].sigma_h_sq_hat,
               Catch::Matchers::WithinAbs(manual_var, 1e-14));

  // Identical chains give an identical report entry.
  const auto twin = make_report({c1, c1}, {"b"});
  const auto single = make_report({c1}, {"b"});
  REQUIRE(twin.functions[0].estimate == single.functions[0].estimate);
  REQUIRE(twin.functions[0].sigma_h_sq_hat ==
          single.functions[0].sigma_h_sq_hat);
}

TEST_CASE("report input validation") {
  REQUIRE_THROWS_AS(make_report({}, {}), std::invalid_argument);
  Eigen::MatrixXd c(200, 2);
  c.setZero();
  REQUIRE_THROWS_AS(make_report({c}, {"only_one"}), std::invalid_argument);
  Eigen::MatrixXd other(200, 1);
  other.setZero();
  REQUIRE_THROWS_AS(make_report({c, other}, {"a", "b"}),
                    std::invalid_argument);
  Eigen::MatrixXd tiny(50, 1);
  tiny.setZero();
  REQUIRE_THROWS_AS(make_report({tiny}, {"a"}), InsufficientDataError);
}
