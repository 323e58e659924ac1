// Command-line front end: synthetic data generation, single solver runs,
// the full repeated-split experiment, the lambda-beta sweep, and the
// self-check battery. Every artifact embeds the resolved configuration and
// seed it was produced with, and all writes are atomic.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glrr/config.hpp"
#include "glrr/dataset.hpp"
#include "glrr/error.hpp"
#include "glrr/pipeline.hpp"
#include "glrr/report.hpp"
#include "glrr/synthetic.hpp"
#include "glrr/validate.hpp"

namespace {

namespace fs = std::filesystem;

struct CliOptions {
  std::string config_path;
  std::string data_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool quiet = false;
  double train_fraction = 0.5;
};

void log_line(const CliOptions& opts, const std::string& message) {
  if (!opts.quiet) std::cerr << message << "\n";
}

// Dataset source shared by solve/experiment/sweep: an explicit CSV wins;
// otherwise the configured synthetic generator supplies the samples.
glrr::RetrievalDataset resolve_dataset(const CliOptions& opts,
                                       const glrr::Config& config) {
  if (!opts.data_path.empty()) {
    const auto ds = glrr::load_csv(opts.data_path);
    if (ds.dropped_rows > 0)
      log_line(opts, "dropped " + std::to_string(ds.dropped_rows) +
                         " malformed row(s) from " + opts.data_path);
    log_line(opts, "loaded " + std::to_string(ds.n()) + " samples x " +
                       std::to_string(ds.d()) + " bands");
    return ds;
  }
  log_line(opts, "no --data given; generating the configured synthetic set");
  return glrr::generate_synthetic(config.synthetic).dataset;
}

void write_text_artifact(const CliOptions& opts, const fs::path& path,
                         const std::string& text) {
  glrr::atomic_write_text(path, text);
  log_line(opts, "wrote " + path.string());
}

void write_json_artifact(const CliOptions& opts, const fs::path& path,
                         const glrr::Json& j) {
  glrr::write_json(j, path);
  log_line(opts, "wrote " + path.string());
}

int run_synth(const CliOptions& opts, const glrr::Config& config) {
  const auto data = glrr::generate_synthetic(config.synthetic);
  const fs::path out(opts.out_dir);
  glrr::save_csv(data.dataset, out / "synthetic.csv",
                 glrr::config_lines(config));
  log_line(opts, "wrote " + (out / "synthetic.csv").string());
  write_json_artifact(opts, out / "synthetic_truth.json",
                      glrr::synthetic_truth_json(data, config));
  return 0;
}

int run_solve(const CliOptions& opts, const glrr::Config& config) {
  const auto ds = resolve_dataset(opts, config);
  const auto solution = glrr::learn_features_full(ds, config.experiment.glrr,
                                                  config.experiment.graph);
  log_line(opts,
           "solver finished after " + std::to_string(solution.iterations) +
               " iteration(s), converged: " +
               (solution.converged ? "yes" : "no"));
  const auto comments = glrr::config_lines(config);
  const fs::path out(opts.out_dir);
  write_text_artifact(opts, out / "z.csv",
                      glrr::matrix_csv(solution.Z, comments));
  write_text_artifact(opts, out / "e.csv",
                      glrr::matrix_csv(solution.E, comments));
  write_text_artifact(opts, out / "residual_history.csv",
                      glrr::residual_history_csv(solution, comments));
  write_json_artifact(opts, out / "solve.json",
                      glrr::solve_json(solution, config, ds));
  return 0;
}

int run_experiment_command(const CliOptions& opts,
                           const glrr::Config& config) {
  const auto ds = resolve_dataset(opts, config);
  const auto report = glrr::run_experiment(ds, config.experiment);
  int failed_cells = 0;
  for (const auto& cell : report.cells)
    for (const auto& outcome : cell.outcomes) failed_cells += !outcome.ok;
  log_line(opts, "experiment: " + std::to_string(report.cells.size()) +
                     " cells, " + std::to_string(report.feature_solves) +
                     " feature solve(s), " + std::to_string(failed_cells) +
                     " annotated failure(s)");
  const fs::path out(opts.out_dir);
  write_json_artifact(opts, out / "report.json",
                      glrr::report_json(report, config, ds));
  write_text_artifact(opts, out / "report.csv",
                      glrr::report_csv(report, config));
  return 0;
}

int run_sweep(const CliOptions& opts, const glrr::Config& config) {
  const auto ds = resolve_dataset(opts, config);
  const auto sweep =
      glrr::sweep_lambda_beta(ds, config.experiment, opts.train_fraction);
  int failed_cells = 0;
  for (const auto& cell : sweep.cells) failed_cells += !cell.ok;
  log_line(opts, "sweep: " + std::to_string(sweep.cells.size()) +
                     " cells, " + std::to_string(failed_cells) +
                     " annotated failure(s)");
  const fs::path out(opts.out_dir);
  write_text_artifact(opts, out / "sweep.csv",
                      glrr::sweep_csv(sweep, config));
  write_json_artifact(opts, out / "sweep.json",
                      glrr::sweep_json(sweep, config));
  return 0;
}

int run_validate(const CliOptions& opts) {
  const auto checks = glrr::run_validation();
  bool all_ok = true;
  for (const auto& check : checks) {
    all_ok = all_ok && check.passed;
    std::cout << (check.passed ? "ok   - " : "FAIL - ") << check.name;
    if (!opts.quiet || !check.passed) std::cout << " (" << check.detail << ")";
    std::cout << "\n";
  }
  std::cout << (all_ok ? "all checks passed" : "VALIDATION FAILED") << "\n";
  return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Learn graph-regularized low-rank features from spectral retrievals "
      "and evaluate downstream regressors"};
  app.require_subcommand(1);

  CliOptions opts;
  app.add_option("--config", opts.config_path,
                 "configuration file (flat key = value with sections)")
      ->check(CLI::ExistingFile);
  auto* seed_opt =
      app.add_option("--seed", opts.seed,
                     "seed overriding the configured one (env: GLRR_SEED)")
          ->envname("GLRR_SEED");
  app.add_option("--out", opts.out_dir, "output directory for artifacts");
  app.add_flag("--quiet", opts.quiet, "suppress informational logging");

  auto* synth = app.add_subcommand(
      "synth", "generate the configured synthetic dataset and ground truth");
  auto* solve = app.add_subcommand(
      "solve", "run the feature-learning solver once and export Z, E, and "
               "the residual history");
  auto* experiment = app.add_subcommand(
      "experiment", "run the full repeated-split evaluation and export the "
                    "report");
  auto* sweep = app.add_subcommand(
      "sweep", "score the (lambda, beta) lattice on one fixed split");
  auto* validate_cmd = app.add_subcommand(
      "validate", "run the internal oracle and invariant battery");

  for (auto* sub : {solve, experiment, sweep})
    sub->add_option("--data", opts.data_path,
                    "input dataset CSV (default: configured synthetic data)")
        ->check(CLI::ExistingFile);
  sweep->add_option("--train-fraction", opts.train_fraction,
                    "training fraction for the sweep split")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage error
    return 1;
  }
  opts.seed_given = seed_opt->count() > 0;

  try {
    glrr::Config config;
    if (!opts.config_path.empty()) config = glrr::load_config(opts.config_path);
    if (opts.seed_given) {
      config.experiment.seed = opts.seed;
      config.synthetic.seed = opts.seed;
    }
    std::filesystem::create_directories(opts.out_dir);

    if (*synth) return run_synth(opts, config);
    if (*solve) return run_solve(opts, config);
    if (*experiment) return run_experiment_command(opts, config);
    if (*sweep) return run_sweep(opts, config);
    return run_validate(opts);
  } catch (const glrr::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const glrr::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
