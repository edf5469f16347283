#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "nrlangevin/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

void apply_overrides(nrlangevin::ExperimentConfig& cfg, const std::string& out, int threads,
                     std::int64_t seed) {
  if (!out.empty()) {
    cfg.out = out;
    cfg.raw["out"] = out;
  }
  if (threads > 0) {
    cfg.threads = threads;
    cfg.raw["threads"] = threads;
  }
  if (seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.raw["seed"] = cfg.seed;
  }
}

int run_gaussian_analysis(const std::string& config_path, const std::string& out, int threads,
                          std::int64_t seed) {
  auto cfg = nrlangevin::load_config(config_path);
  apply_overrides(cfg, out, threads, seed);
  if (cfg.experiment != "gaussian_analysis")
    throw nrlangevin::ConfigError("config experiment must be 'gaussian_analysis'");
  const auto result = nrlangevin::cmd_gaussian_analysis(cfg);
  nrlangevin::write_gaussian_analysis(cfg, result);
  std::cout << "wrote " << cfg.out << "/gaussian_analysis.csv (" << result.rows.size()
            << " rows)\n";
  return 0;
}

int run_experiment(const std::string& config_path, const std::string& out, int threads,
                   std::int64_t seed) {
  auto cfg = nrlangevin::load_config(config_path);
  apply_overrides(cfg, out, threads, seed);
  if (cfg.experiment == "warped") {
    const auto result = nrlangevin::cmd_experiment_warped(cfg);
    nrlangevin::write_sweep_points(cfg, result, "warped");
    std::cout << "wrote " << cfg.out << "/warped_points.csv (f_ref=" << result.f_ref << ")\n";
  } else if (cfg.experiment == "logistic") {
    const auto result = nrlangevin::cmd_experiment_logistic(cfg);
    nrlangevin::write_sweep_points(cfg, result, "logistic");
    nrlangevin::write_logistic_covariates(cfg, result);
    std::cout << "wrote " << cfg.out << "/logistic_points.csv and logistic_covariates.csv\n";
  } else if (cfg.experiment == "cox") {
    const auto result = nrlangevin::cmd_experiment_cox(cfg);
    nrlangevin::write_cox_results(cfg, result);
    std::cout << "wrote " << cfg.out << "/cox_points.csv and cox_cell_ess.csv\n";
  } else if (cfg.experiment == "sample") {
    const auto result = nrlangevin::cmd_experiment_sample(cfg);
    nrlangevin::write_sample_chains(cfg, result);
    std::cout << "wrote " << result.chains.size() << " chain file(s) under " << cfg.out
              << "\n";
  } else if (cfg.experiment == "gaussian_analysis") {
    return run_gaussian_analysis(config_path, out, threads, seed);
  } else {
    throw nrlangevin::ConfigError("unknown experiment '" + cfg.experiment + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonreversible Langevin sampling harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  std::int64_t seed = -1;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--threads", threads, "worker threads (overrides config)");
    sub->add_option("--seed", seed, "base seed (overrides config)");
  };

  auto* analysis = app.add_subcommand("gaussian-analysis",
                                      "deterministic linear-model bias/variance tables");
  add_common(analysis, true);

  auto* experiment = app.add_subcommand("experiment", "run a sampling experiment sweep");
  add_common(experiment, true);

  auto* ingest = app.add_subcommand("ingest", "validate and normalize a data file");
  std::string kind, data_path;
  int grid = 64;
  ingest->add_option("kind", kind, "pima|pine")->required();
  ingest->add_option("path", data_path, "input file")->required();
  ingest->add_option("--out", out_dir, "output directory");
  ingest->add_option("--grid", grid, "grid side for pine binning");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analysis->parsed()) return run_gaussian_analysis(config_path, out_dir, threads, seed);
    if (experiment->parsed()) return run_experiment(config_path, out_dir, threads, seed);
    if (ingest->parsed()) {
      nrlangevin::cmd_ingest(kind, data_path, out_dir.empty() ? "." : out_dir, grid);
      std::cout << "ingested " << kind << " data from " << data_path << "\n";
      return 0;
    }
  } catch (const nrlangevin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nrlangevin::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const nrlangevin::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
