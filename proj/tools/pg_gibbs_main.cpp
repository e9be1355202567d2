#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pggibbs/cli.hpp"

namespace {

// Dataset-facing flags shared by check / sample / certify. Flags override the
// config file, which overrides PG_GIBBS_SEED, which overrides defaults; the
// override order is resolved after parsing via per-flag presence counts.
struct FlagSet {
  std::string config_path;
  std::string input;
  std::string y = "y";
  std::string covariates;
  bool intercept = false;
  std::uint64_t seed = 0;
  long iters = 0;
  long burnin = 0;
  long chains = 0;
  long thin = 0;
  std::string out;
  bool allow_improper = false;
  long budget = 0;
  int test_points = 0;
  int mc_draws = 0;
};

void add_common_flags(CLI::App* cmd, FlagSet& flags) {
  cmd->add_option("--config", flags.config_path,
                  "flat key = value configuration file");
  cmd->add_option("--input", flags.input, "input CSV path");
  cmd->add_option("--y", flags.y, "response column name (default y)");
  cmd->add_option("--covariates", flags.covariates,
                  "comma-separated covariate columns, or all-others");
  cmd->add_flag("--intercept", flags.intercept, "prepend a column of ones");
  cmd->add_option("--seed", flags.seed, "RNG seed");
  cmd->add_option("--out", flags.out, "output directory (default .)");
}

void add_sampler_flags(CLI::App* cmd, FlagSet& flags) {
  cmd->add_option("--iters", flags.iters, "total iterations per chain");
  cmd->add_option("--burnin", flags.burnin, "discarded initial iterations");
  cmd->add_option("--chains", flags.chains, "number of independent chains");
  cmd->add_option("--thin", flags.thin, "keep every k-th post-burn-in draw");
  cmd->add_flag("--allow-improper", flags.allow_improper,
                "sample even when the posterior is improper");
}

void add_drift_flags(CLI::App* cmd, FlagSet& flags) {
  cmd->add_option("--budget", flags.budget,
                  "ratio-supremum optimizer evaluation budget");
  cmd->add_option("--test-points", flags.test_points,
                  "drift verification test points");
  cmd->add_option("--mc-draws", flags.mc_draws,
                  "Monte Carlo draws per verification point");
}

bool given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

pggibbs::RunConfig resolve(const CLI::App* cmd, const FlagSet& flags) {
  pggibbs::RunConfig config;
  pggibbs::apply_seed_environment(config);
  if (given(cmd, "--config"))
    pggibbs::apply_config_file(config, flags.config_path);
  if (given(cmd, "--input")) config.input_path = flags.input;
  if (given(cmd, "--y")) config.y_column = flags.y;
  if (given(cmd, "--covariates"))
    config.covariate_columns =
        flags.covariates == "all-others"
            ? std::vector<std::string>{}
            : pggibbs::cli_detail::split_names(flags.covariates);
  if (given(cmd, "--intercept")) config.add_intercept = flags.intercept;
  if (given(cmd, "--seed")) config.seed = flags.seed;
  if (given(cmd, "--out")) config.output_dir = flags.out;
  if (given(cmd, "--iters")) config.n_iterations = flags.iters;
  if (given(cmd, "--burnin")) config.n_burnin = flags.burnin;
  if (given(cmd, "--chains")) config.n_chains = flags.chains;
  if (given(cmd, "--thin")) config.thin = flags.thin;
  if (given(cmd, "--allow-improper"))
    config.allow_improper = flags.allow_improper;
  if (given(cmd, "--budget")) config.budget = flags.budget;
  if (given(cmd, "--test-points")) config.test_points = flags.test_points;
  if (given(cmd, "--mc-draws")) config.mc_draws = flags.mc_draws;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Polya-Gamma Gibbs sampler for Bayesian logistic regression under a "
      "flat prior: propriety checks, posterior sampling with CLT standard "
      "errors, and geometric-drift certificates"};
  app.require_subcommand(1);

  FlagSet flags;
  CLI::App* check = app.add_subcommand(
      "check", "decide whether the posterior is proper");
  add_common_flags(check, flags);

  CLI::App* sample = app.add_subcommand(
      "sample", "run the Gibbs sampler and report MCSEs");
  add_common_flags(sample, flags);
  add_sampler_flags(sample, flags);

  CLI::App* certify = app.add_subcommand(
      "certify", "build and verify a geometric-drift certificate");
  add_common_flags(certify, flags);
  add_drift_flags(certify, flags);

  double pg_b = 0.0;
  long pg_count = 1;
  std::uint64_t pg_seed = 0;
  CLI::App* pg = app.add_subcommand(
      "pg-sample", "write raw PG(1,b) draws, one per line");
  pg->add_option("--b", pg_b, "tilting parameter, must be nonnegative");
  pg->add_option("--count", pg_count, "number of draws");
  pg->add_option("--seed", pg_seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? pggibbs::kExitOk : pggibbs::kExitUsage;
  }

  try {
    if (check->parsed()) return pggibbs::cmd_check(resolve(check, flags));
    if (sample->parsed()) return pggibbs::cmd_sample(resolve(sample, flags));
    if (certify->parsed()) return pggibbs::cmd_certify(resolve(certify, flags));
    if (pg->parsed()) {
      if (pg->count("--seed") == 0) {
        pggibbs::RunConfig env_only;
        pggibbs::apply_seed_environment(env_only);
        pg_seed = env_only.seed;
      }
      return pggibbs::cmd_pg_sample(pg_b, pg_count, pg_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "pg-gibbs: " << e.what() << '\n';
    return pggibbs::kExitUsage;
  }
  return pggibbs::kExitUsage;
}
