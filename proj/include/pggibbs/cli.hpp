#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pggibbs/csv.hpp"
#include "pggibbs/drift.hpp"
#include "pggibbs/errors.hpp"
#include "pggibbs/gibbs.hpp"
#include "pggibbs/mcse.hpp"
#include "pggibbs/model.hpp"
#include "pggibbs/propriety.hpp"
#include "pggibbs/rng.hpp"

namespace pggibbs {

// Exit-code contract, stable across versions.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitImproper = 2;
inline constexpr int kExitCertificate = 3;

inline constexpr const char* kReportSchema = "pg-gibbs/1";

struct RunConfig {
  std::string input_path;
  std::string y_column = "y";
  std::vector<std::string> covariate_columns;  // empty means all others
  bool add_intercept = false;
  std::uint64_t seed = 0;
  long n_iterations = 10000;
  long n_burnin = 1000;
  long n_chains = 1;
  long thin = 1;
  std::string output_dir = ".";
  long budget = 20000;       // ratio-supremum optimizer evaluations
  int test_points = 50;      // drift verification grid size
  int mc_draws = 2000;       // Monte Carlo draws per verification point
  bool allow_improper = false;

  void validate() const {
    if (input_path.empty())
      throw std::invalid_argument("RunConfig: input path is required");
    if (output_dir.empty())
      throw std::invalid_argument("RunConfig: output directory is required");
    if (budget <= 0)
      throw std::invalid_argument("RunConfig: optimizer budget must be positive");
    if (test_points < 1)
      throw std::invalid_argument("RunConfig: need at least one test point");
    if (mc_draws < 10)
      throw std::invalid_argument("RunConfig: mc_draws must be at least 10");
  }
};

namespace cli_detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_names(const std::string& value) {
  std::vector<std::string> names;
  std::string cell;
  std::istringstream in(value);
  while (std::getline(in, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) names.push_back(cell);
  }
  return names;
}

inline bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError("config key '" + key + "': expected a boolean, got '" +
                   value + "'");
}

inline long parse_long(const std::string& value, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError("config key '" + key + "': expected an integer, got '" +
                     value + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& value,
                               const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError("config key '" + key + "': expected an integer, got '" +
                     value + "'");
  return v;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << body;
  if (!out) throw ParseError(path + ": write failed");
}

inline std::string output_path(const RunConfig& config,
                               const std::string& name) {
  std::filesystem::create_directories(config.output_dir);
  return (std::filesystem::path(config.output_dir) / name).string();
}

}  // namespace cli_detail

// Flat key = value overrides; '#' starts a comment. Keys match the long
// command-line flags, so a config file and a flag list are interchangeable.
inline void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = cli_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": expected key = value");
    const std::string key = cli_detail::trim(line.substr(0, eq));
    const std::string value = cli_detail::trim(line.substr(eq + 1));
    if (key == "input") {
      config.input_path = value;
    } else if (key == "y") {
      config.y_column = value;
    } else if (key == "covariates") {
      config.covariate_columns =
          value == "all-others" ? std::vector<std::string>{}
                                : cli_detail::split_names(value);
    } else if (key == "intercept") {
      config.add_intercept = cli_detail::parse_bool(value, key);
    } else if (key == "seed") {
      config.seed = cli_detail::parse_u64(value, key);
    } else if (key == "iters") {
      config.n_iterations = cli_detail::parse_long(value, key);
    } else if (key == "burnin") {
      config.n_burnin = cli_detail::parse_long(value, key);
    } else if (key == "chains") {
      config.n_chains = cli_detail::parse_long(value, key);
    } else if (key == "thin") {
      config.thin = cli_detail::parse_long(value, key);
    } else if (key == "out") {
      config.output_dir = value;
    } else if (key == "allow-improper") {
      config.allow_improper = cli_detail::parse_bool(value, key);
    } else if (key == "budget") {
      config.budget = cli_detail::parse_long(value, key);
    } else if (key == "test-points") {
      config.test_points = static_cast<int>(cli_detail::parse_long(value, key));
    } else if (key == "mc-draws") {
      config.mc_draws = static_cast<int>(cli_detail::parse_long(value, key));
    } else {
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": unknown key '" + key + "'");
    }
  }
}

// Environment fallback for the seed; config files and flags both override it.
inline void apply_seed_environment(RunConfig& config) {
  if (const char* env = std::getenv("PG_GIBBS_SEED"))
    config.seed = cli_detail::parse_u64(env, "PG_GIBBS_SEED");
}

namespace cli_detail {

inline Dataset load_dataset(const RunConfig& config) {
  const CsvTable table = read_csv(config.input_path);
  return make_dataset(table, config.y_column, config.covariate_columns,
                      config.add_intercept);
}

inline nlohmann::ordered_json propriety_json(const RunConfig& config,
                                             const Dataset& dataset,
                                             const ProprietyReport& report) {
  nlohmann::ordered_json doc;
  doc["schema"] = kReportSchema;
  doc["command"] = "check";
  doc["input"] = config.input_path;
  doc["n"] = dataset.n();
  doc["p"] = dataset.p();
  doc["full_rank"] = report.full_rank;
  doc["rank"] = report.rank;
  doc["rank_tolerance"] = report.rank_tolerance_used;
  if (report.positive_null_vector) {
    doc["positive_null_vector"] = std::vector<double>(
        report.positive_null_vector->begin(), report.positive_null_vector->end());
    doc["null_vector_condition"] = report.null_vector_condition;
  } else {
    doc["positive_null_vector"] = nullptr;
    doc["null_vector_condition"] = nullptr;
  }
  doc["proper"] = report.proper;
  doc["note"] = report.note;
  return doc;
}

inline nlohmann::ordered_json mcse_json(const RunConfig& config,
                                        const McseReport& report) {
  nlohmann::ordered_json doc;
  doc["schema"] = kReportSchema;
  doc["command"] = "sample";
  doc["input"] = config.input_path;
  doc["seed"] = config.seed;
  doc["n_iterations"] = config.n_iterations;
  doc["n_burnin"] = config.n_burnin;
  doc["n_chains"] = config.n_chains;
  doc["thin"] = config.thin;
  doc["total_draws"] = report.total_draws;
  doc["note"] = report.note;
  doc["functions"] = nlohmann::ordered_json::array();
  for (const auto& f : report.functions) {
    nlohmann::ordered_json entry;
    entry["name"] = f.name;
    entry["estimate"] = f.estimate;
    entry["sigma_h_sq_hat"] = f.sigma_h_sq_hat;
    entry["sigma_sq_hat_spectral"] = nullptr;  // reserved, not estimated
    entry["mcse"] = f.mcse;
    entry["ess"] = f.ess;
    entry["batch_size"] = f.batch_size;
    entry["n_batches"] = f.n_batches;
    doc["functions"].push_back(std::move(entry));
  }
  return doc;
}

inline nlohmann::ordered_json certificate_json(const RunConfig& config,
                                               const DriftCertificate& cert,
                                               const VerifyResult& verify) {
  nlohmann::ordered_json doc;
  doc["schema"] = kReportSchema;
  doc["command"] = "certify";
  doc["input"] = config.input_path;
  doc["rho1_hat"] = cert.rho1_hat;
  doc["c1_sq"] = cert.c1_sq;
  doc["alpha"] = cert.alpha;
  doc["rho"] = cert.rho;
  doc["L0"] = cert.L0;
  doc["L1"] = cert.L1;
  doc["L2"] = cert.L2;
  doc["f0"] = cert.f0;
  doc["f0_half"] = cert.f0_half;
  doc["f0_grid_b_max"] = cert.f0_grid_b_max;
  doc["f0_grid_step"] = cert.f0_grid_step;
  doc["tail_caveat"] = cert.tail_caveat;
  doc["n_obs"] = cert.n_obs;
  nlohmann::ordered_json verification;
  verification["test_points"] = config.test_points;
  verification["mc_draws"] = config.mc_draws;
  verification["seed"] = config.seed;
  verification["verified_points"] = verify.verified_points;
  verification["violations"] = verify.violations;
  verification["min_margin"] = verify.min_margin;
  doc["verification"] = std::move(verification);
  return doc;
}

}  // namespace cli_detail

// Propriety report to stdout and propriety.json; exit 0 when proper, 2 when
// improper, 1 on any input error.
inline int cmd_check(const RunConfig& config, std::ostream& out = std::cout) {
  try {
    config.validate();
    const Dataset dataset = cli_detail::load_dataset(config);
    const ProprietyReport report = check_propriety(dataset);
    const auto doc = cli_detail::propriety_json(config, dataset, report);
    const std::string body = doc.dump(2) + "\n";
    cli_detail::write_text_file(
        cli_detail::output_path(config, "propriety.json"), body);
    out << body;
    return report.proper ? kExitOk : kExitImproper;
  } catch (const std::exception& e) {
    std::cerr << "check: " << e.what() << '\n';
    return kExitUsage;
  }
}

// Gibbs draws to draws.csv plus an MCSE report to stdout and mcse.json.
// Improper posteriors are refused (exit 2) unless allow_improper is set:
// time averages of a nonconvergent chain estimate nothing.
inline int cmd_sample(const RunConfig& config, std::ostream& out = std::cout) {
  try {
    config.validate();
    const Dataset dataset = cli_detail::load_dataset(config);

    SamplerConfig sampler;
    sampler.n_iterations = config.n_iterations;
    sampler.n_burnin = config.n_burnin;
    sampler.n_chains = config.n_chains;
    sampler.seed = config.seed;
    sampler.thin = config.thin;
    sampler.allow_improper = config.allow_improper;
    sampler.validate(dataset.p());

    std::cerr << "sample: " << dataset.n() << " rows, " << dataset.p()
              << " coefficients, " << config.n_chains << " chain(s) x "
              << config.n_iterations << " iterations\n";
    const RunResult result = run_chains(dataset, sampler);
    write_draws_csv(cli_detail::output_path(config, "draws.csv"),
                    result.beta_draws, dataset.coef_names);

    const McseReport report = make_report(result.beta_draws, dataset.coef_names);
    const std::string body =
        cli_detail::mcse_json(config, report).dump(2) + "\n";
    cli_detail::write_text_file(cli_detail::output_path(config, "mcse.json"),
                                body);
    out << body;
    return kExitOk;
  } catch (const ImproperPosteriorError& e) {
    std::cerr << "sample: " << e.what() << '\n';
    return kExitImproper;
  } catch (const std::exception& e) {
    std::cerr << "sample: " << e.what() << '\n';
    return kExitUsage;
  }
}

// Drift certificate to stdout and certificate.json; requires a proper
// posterior (exit 2 otherwise) and exits 3 when no certificate can be built
// or the empirical verification finds a violation.
inline int cmd_certify(const RunConfig& config, std::ostream& out = std::cout) {
  try {
    config.validate();
    const Dataset dataset = cli_detail::load_dataset(config);
    const ProprietyReport propriety = check_propriety(dataset);
    if (!propriety.proper) {
      std::cerr << "certify: the posterior is improper (" << propriety.note
                << "); no drift certificate exists\n";
      return kExitImproper;
    }

    const DerivedDesign derived = derive(dataset);
    std::cerr << "certify: estimating the ratio supremum (budget "
              << config.budget << ")\n";
    const double rho1 = rho1_estimate(derived.Z, *propriety.positive_null_vector,
                                      config.budget);
    const DriftCertificate cert = build_certificate(dataset, rho1);
    std::cerr << "certify: verifying at " << config.test_points
              << " test points, " << config.mc_draws << " draws each\n";
    const auto points =
        log_spaced_points(dataset.n(), config.test_points, 1e-3, 1e3);
    const VerifyResult verify =
        verify_drift(dataset, cert, points, config.mc_draws, config.seed);

    const std::string body =
        cli_detail::certificate_json(config, cert, verify).dump(2) + "\n";
    cli_detail::write_text_file(
        cli_detail::output_path(config, "certificate.json"), body);
    out << body;
    return verify.violations == 0 ? kExitOk : kExitCertificate;
  } catch (const CertificateError& e) {
    std::cerr << "certify: " << e.what() << '\n';
    return kExitCertificate;
  } catch (const std::exception& e) {
    std::cerr << "certify: " << e.what() << '\n';
    return kExitUsage;
  }
}

// Raw PG(1,b) draws, one per line.
inline int cmd_pg_sample(double b, long count, std::uint64_t seed,
                         std::ostream& out = std::cout) {
  try {
    if (!(b >= 0.0))
      throw std::invalid_argument("b must be nonnegative");
    if (count < 1)
      throw std::invalid_argument("count must be at least 1");
    RngStream rng(seed, 0);
    for (long i = 0; i < count; ++i)
      out << csv_detail::format_double(pg_sample(b, rng)) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "pg-sample: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace pggibbs
