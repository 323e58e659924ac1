#pragma once

// Evaluation pipeline: features are learned transductively (one solver run
// over all samples per (lambda, beta); labels never enter feature learning),
// then each method is scored over repeated random train/test splits with
// hyperparameters chosen by k-fold cross-validation on the training portion
// only. Means and stds aggregate across repeats.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "glrr/cross_validation.hpp"
#include "glrr/dataset.hpp"
#include "glrr/graph.hpp"
#include "glrr/metrics.hpp"
#include "glrr/regression.hpp"
#include "glrr/rng.hpp"
#include "glrr/solver.hpp"

namespace glrr {

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods = {"ols", "ridge", "svr",
                                                   "lrr_svr", "glrr_svr"};
  return methods;
}

struct ExperimentConfig {
  std::vector<double> train_percentages = {0.1, 0.2, 0.3, 0.4, 0.5,
                                           0.6, 0.7, 0.8, 0.9};
  int repeats = 10;
  std::uint64_t seed = 0;
  GlrrConfig glrr;    // solver settings; lambda and beta come from the grids
  GraphConfig graph;  // affinity graph over baseline retrievals
  std::vector<std::string> methods = known_methods();
  std::vector<double> lambda_grid = log_lattice();
  std::vector<double> beta_grid = log_lattice();
  std::vector<double> gamma_grid = log_lattice();
  std::vector<double> c_grid = log_lattice();
  std::vector<double> alpha_grid = log_lattice();
  double epsilon_tube = 0.01;
  int cv_folds = 5;
  int svr_max_updates = 100000;
};

inline void validate(const ExperimentConfig& config) {
  require(!config.train_percentages.empty(),
          "experiment: no train percentages configured");
  for (double f : config.train_percentages)
    require(f > 0.0 && f < 1.0,
            "experiment: train fractions must lie in (0, 1)");
  require(config.repeats >= 1, "experiment: repeats must be at least 1");
  require(config.cv_folds >= 2, "experiment: cv_folds must be at least 2");
  require(config.epsilon_tube >= 0.0,
          "experiment: epsilon_tube must be nonnegative");
  require(config.svr_max_updates >= 1,
          "experiment: svr_max_updates must be positive");
  validate(config.glrr);
  require(!config.methods.empty(), "experiment: no methods configured");
  const auto& known = known_methods();
  for (const auto& m : config.methods)
    require(std::find(known.begin(), known.end(), m) != known.end(),
            "experiment: unknown method '" + m + "'");
  const std::pair<const std::vector<double>*, const char*> grids[] = {
      {&config.lambda_grid, "lambda"}, {&config.beta_grid, "beta"},
      {&config.gamma_grid, "gamma"},   {&config.c_grid, "C"},
      {&config.alpha_grid, "alpha"}};
  for (const auto& [grid, name] : grids) {
    require(!grid->empty(),
            std::string("experiment: empty ") + name + " grid");
    for (size_t i = 0; i < grid->size(); ++i) {
      require(std::isfinite((*grid)[i]) && (*grid)[i] >= 0.0,
              std::string("experiment: ") + name +
                  " grid values must be finite and nonnegative");
      require(i == 0 || (*grid)[i - 1] < (*grid)[i],
              std::string("experiment: ") + name +
                  " grid must be strictly increasing");
    }
  }
  for (double v : config.gamma_grid)
    require(v > 0.0, "experiment: gamma grid values must be positive");
  for (double v : config.c_grid)
    require(v > 0.0, "experiment: C grid values must be positive");
  for (double v : config.alpha_grid)
    require(v > 0.0, "experiment: alpha grid values must be positive");
}

// Feature learning: affinity graph over the baseline retrievals, Laplacian
// smoothing in the solver, Z's column i is sample i's feature vector.
inline GlrrSolution learn_features_full(const RetrievalDataset& ds,
                                        const GlrrConfig& glrr,
                                        const GraphConfig& graph) {
  validate(ds);
  const AffinityGraph affinity = build_knn_graph(ds.baseline, graph);
  return solve(ds.spectra, laplacian(affinity), glrr);
}

inline Matrix learn_features(const RetrievalDataset& ds,
                             const GlrrConfig& glrr,
                             const GraphConfig& graph) {
  return learn_features_full(ds, glrr, graph).Z;
}

struct Split {
  std::vector<int> train;  // sorted; size = round(fraction * n)
  std::vector<int> test;   // sorted complement
};

inline Split random_split(int n, double fraction, std::uint64_t seed) {
  require(n >= 2, "random_split: need at least two samples");
  require(fraction > 0.0 && fraction < 1.0,
          "random_split: fraction must lie in (0, 1)");
  const int train_size = static_cast<int>(std::llround(fraction * n));
  require(train_size >= 1 && train_size <= n - 1,
          "random_split: split would leave one side empty");
  Rng rng(seed);
  const auto perm = rng.permutation(n);
  Split split;
  split.train.assign(perm.begin(), perm.begin() + train_size);
  split.test.assign(perm.begin() + train_size, perm.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

struct RepeatOutcome {
  bool ok = false;
  std::string error;  // failure annotation when !ok
  double rmse = 0.0;
  double r = 0.0;
  bool has_r = false;  // false when the correlation is undefined
  bool features_converged = true;  // solver flag; raw methods keep true
  std::vector<std::pair<std::string, double>> params;  // chosen by CV
};

struct Aggregate {
  int rmse_count = 0;  // repeats that produced a score
  double mean_rmse = 0.0;
  double std_rmse = 0.0;  // population std over successful repeats
  int r_count = 0;        // repeats with a defined correlation
  double mean_r = 0.0;
  double std_r = 0.0;
};

inline Aggregate aggregate_outcomes(const std::vector<RepeatOutcome>& outcomes) {
  Aggregate agg;
  double rmse_sum = 0.0, r_sum = 0.0;
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    rmse_sum += o.rmse;
    ++agg.rmse_count;
    if (o.has_r) {
      r_sum += o.r;
      ++agg.r_count;
    }
  }
  if (agg.rmse_count > 0) {
    agg.mean_rmse = rmse_sum / agg.rmse_count;
    double ss = 0.0;
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      const double dv = o.rmse - agg.mean_rmse;
      ss += dv * dv;
    }
    agg.std_rmse = std::sqrt(ss / agg.rmse_count);
  }
  if (agg.r_count > 0) {
    agg.mean_r = r_sum / agg.r_count;
    double ss = 0.0;
    for (const auto& o : outcomes) {
      if (!(o.ok && o.has_r)) continue;
      const double dv = o.r - agg.mean_r;
      ss += dv * dv;
    }
    agg.std_r = std::sqrt(ss / agg.r_count);
  }
  return agg;
}

struct ReportCell {
  std::string method;
  double train_fraction = 0.0;
  std::vector<RepeatOutcome> outcomes;  // index = repeat
  Aggregate aggregate;
};

struct SplitRecord {
  int repeat = 0;
  double train_fraction = 0.0;
  std::uint64_t split_seed = 0;  // regenerates the split via random_split
  std::uint64_t folds_seed = 0;  // shared by every method's CV in this cell
};

struct EvaluationReport {
  std::vector<ReportCell> cells;    // configured methods in order, then the
                                    // untrained "baseline" row; percentage-
                                    // minor within each method
  std::vector<SplitRecord> splits;  // (repeat, percentage) order
  int feature_solves = 0;           // distinct (lambda, beta) solver runs
};

// Solves once per (lambda, beta) over all samples; repeats and percentages
// reuse the entry. Failures are cached too, so a bad cell does not pay the
// solver cost again on the next repeat.
class FeatureCache {
 public:
  FeatureCache(const Matrix& spectra, const Laplacian& laplacian,
               const GlrrConfig& base)
      : spectra_(spectra), laplacian_(laplacian), base_(base) {}

  const GlrrSolution& get(double lambda, double beta) {
    const auto key = std::make_pair(lambda, beta);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      Entry entry;
      try {
        GlrrConfig config = base_;
        config.lambda = lambda;
        config.beta = beta;
        entry.solution = solve(spectra_, laplacian_, config);
      } catch (...) {
        entry.failure = std::current_exception();
      }
      it = entries_.emplace(key, std::move(entry)).first;
    }
    if (it->second.failure) std::rethrow_exception(it->second.failure);
    return it->second.solution;
  }

  int solve_count() const { return static_cast<int>(entries_.size()); }

 private:
  struct Entry {
    GlrrSolution solution;
    std::exception_ptr failure;
  };

  const Matrix& spectra_;
  const Laplacian& laplacian_;
  GlrrConfig base_;
  std::map<std::pair<double, double>, Entry> entries_;
};

namespace detail {

// Per-band affine normalization with statistics taken from fit_rows only
// (the training split), applied to every row. A constant band gets unit
// scale so it stays harmless instead of dividing by zero.
inline Matrix standardize_columns(const Matrix& rows,
                                  const std::vector<int>& fit_rows) {
  require(!fit_rows.empty(), "standardize: no rows to fit statistics on");
  Matrix out(rows.rows(), rows.cols());
  const double k = static_cast<double>(fit_rows.size());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    double sum = 0.0;
    for (int i : fit_rows) sum += rows(i, j);
    const double mean = sum / k;
    double ss = 0.0;
    for (int i : fit_rows) {
      const double dv = rows(i, j) - mean;
      ss += dv * dv;
    }
    double sd = std::sqrt(ss / k);
    if (sd == 0.0) sd = 1.0;
    out.col(j) = (rows.col(j).array() - mean) / sd;
  }
  return out;
}

struct MethodJob {
  const RetrievalDataset& ds;
  const ExperimentConfig& config;
  FeatureCache& cache;
  const Split& split;
  std::uint64_t folds_seed;
  const Matrix& raw;  // standardized raw features, row per sample
};

inline RepeatOutcome score_predictions(const Vector& pred,
                                       const Vector& truth) {
  RepeatOutcome out;
  out.rmse = rmse(pred, truth);
  try {
    out.r = pearson_r(pred, truth);
    out.has_r = true;
  } catch (const UndefinedCorrelation&) {
    out.has_r = false;  // reported as a missing value, never as 0
  }
  out.ok = true;
  return out;
}

inline RepeatOutcome run_ols(const MethodJob& job) {
  const FeatureSet train_set{take_rows(job.raw, job.split.train),
                             take(job.ds.aeronet, job.split.train)};
  const LinearModel model = fit_ols(train_set);
  const Vector pred = predict(model, take_rows(job.raw, job.split.test));
  return score_predictions(pred, take(job.ds.aeronet, job.split.test));
}

inline RepeatOutcome run_ridge(const MethodJob& job) {
  const Matrix train_rows = take_rows(job.raw, job.split.train);
  const Vector train_targets = take(job.ds.aeronet, job.split.train);
  const auto score_fold = [&](const std::vector<double>& params,
                              const std::vector<int>& fit_pos,
                              const std::vector<int>& val_pos) {
    const FeatureSet fold_set{take_rows(train_rows, fit_pos),
                              take(train_targets, fit_pos)};
    const LinearModel model = fit_ridge(fold_set, params[0]);
    const Vector pred = predict(model, take_rows(train_rows, val_pos));
    return rmse(pred, take(train_targets, val_pos));
  };
  const auto best = grid_search_cv(
      {job.config.alpha_grid}, static_cast<int>(job.split.train.size()),
      job.config.cv_folds, job.folds_seed, score_fold);
  const FeatureSet train_set{train_rows, train_targets};
  const LinearModel model = fit_ridge(train_set, best.params[0]);
  const Vector pred = predict(model, take_rows(job.raw, job.split.test));
  RepeatOutcome out =
      score_predictions(pred, take(job.ds.aeronet, job.split.test));
  out.params = {{"alpha", best.params[0]}};
  return out;
}

inline RepeatOutcome run_svr(const MethodJob& job) {
  const FeatureSet train_set{take_rows(job.raw, job.split.train),
                             take(job.ds.aeronet, job.split.train)};
  const auto best = svr_grid_search_cv(
      train_set, job.config.gamma_grid, job.config.c_grid,
      job.config.cv_folds, job.folds_seed, job.config.epsilon_tube,
      job.config.svr_max_updates);
  const SvrModel model =
      fit_svr(train_set, best.params[1], KernelSpec{best.params[0]},
              job.config.epsilon_tube, job.config.svr_max_updates);
  const Vector pred = predict(model, take_rows(job.raw, job.split.test));
  RepeatOutcome out =
      score_predictions(pred, take(job.ds.aeronet, job.split.test));
  out.params = {{"gamma", best.params[0]}, {"C", best.params[1]}};
  return out;
}

// Shared by the lrr_svr (beta pinned to 0) and glrr_svr (beta searched)
// rows. The (lambda, beta) loop runs ascending, and ties keep the first
// winner, so the chosen tuple is the lexicographically smallest argmin of
// the CV score over (lambda, beta, gamma, C).
inline RepeatOutcome run_feature_svr(const MethodJob& job, bool with_graph) {
  const std::vector<double> zero_beta = {0.0};
  const auto& betas = with_graph ? job.config.beta_grid : zero_beta;
  const Vector train_targets = take(job.ds.aeronet, job.split.train);

  GridSearchResult best_kernel;
  double best_lambda = 0.0, best_beta = 0.0;
  bool have = false;
  std::exception_ptr first_failure;
  for (double lambda : job.config.lambda_grid) {
    for (double beta : betas) {
      try {
        const GlrrSolution& sol = job.cache.get(lambda, beta);
        const FeatureSet train_set{
            take_rows(sol.Z.transpose(), job.split.train), train_targets};
        const auto res = svr_grid_search_cv(
            train_set, job.config.gamma_grid, job.config.c_grid,
            job.config.cv_folds, job.folds_seed, job.config.epsilon_tube,
            job.config.svr_max_updates);
        if (!have || res.score < best_kernel.score) {
          best_kernel = res;
          best_lambda = lambda;
          best_beta = beta;
          have = true;
        }
      } catch (...) {
        if (!first_failure) first_failure = std::current_exception();
      }
    }
  }
  if (!have) {
    if (first_failure) std::rethrow_exception(first_failure);
    throw InvalidInput("feature search: empty hyperparameter lattice");
  }

  const GlrrSolution& sol = job.cache.get(best_lambda, best_beta);
  const Matrix features = sol.Z.transpose();
  const FeatureSet train_set{take_rows(features, job.split.train),
                             train_targets};
  const SvrModel model = fit_svr(train_set, best_kernel.params[1],
                                 KernelSpec{best_kernel.params[0]},
                                 job.config.epsilon_tube,
                                 job.config.svr_max_updates);
  const Vector pred = predict(model, take_rows(features, job.split.test));
  RepeatOutcome out =
      score_predictions(pred, take(job.ds.aeronet, job.split.test));
  out.features_converged = sol.converged;
  out.params = {{"lambda", best_lambda}};
  if (with_graph) out.params.emplace_back("beta", best_beta);
  out.params.emplace_back("gamma", best_kernel.params[0]);
  out.params.emplace_back("C", best_kernel.params[1]);
  return out;
}

inline RepeatOutcome run_method(const MethodJob& job,
                                const std::string& name) {
  if (name == "ols") return run_ols(job);
  if (name == "ridge") return run_ridge(job);
  if (name == "svr") return run_svr(job);
  if (name == "lrr_svr") return run_feature_svr(job, false);
  if (name == "glrr_svr") return run_feature_svr(job, true);
  throw InvalidInput("experiment: unknown method '" + name + "'");
}

inline RepeatOutcome run_baseline(const RetrievalDataset& ds,
                                  const Split& split) {
  return score_predictions(take(ds.baseline, split.test),
                           take(ds.aeronet, split.test));
}

}  // namespace detail

// Full protocol against a caller-supplied Laplacian. Per-cell failures are
// annotated in the report instead of aborting the run.
inline EvaluationReport run_experiment(const RetrievalDataset& ds,
                                       const ExperimentConfig& config,
                                       const Laplacian& laplacian_matrix) {
  validate(ds);
  validate(config);
  const int n = ds.n();
  FeatureCache cache(ds.spectra, laplacian_matrix, config.glrr);

  const size_t method_count = config.methods.size();
  const size_t pct_count = config.train_percentages.size();
  EvaluationReport report;
  report.cells.resize((method_count + 1) * pct_count);
  for (size_t m = 0; m <= method_count; ++m) {
    for (size_t p = 0; p < pct_count; ++p) {
      auto& cell = report.cells[m * pct_count + p];
      cell.method = m < method_count ? config.methods[m] : "baseline";
      cell.train_fraction = config.train_percentages[p];
      cell.outcomes.resize(static_cast<size_t>(config.repeats));
    }
  }

  const Rng root(config.seed);
  const Rng split_root = root.substream("split");
  const Rng folds_root = root.substream("folds");
  for (int rep = 0; rep < config.repeats; ++rep) {
    for (size_t p = 0; p < pct_count; ++p) {
      const double fraction = config.train_percentages[p];
      const std::uint64_t split_seed = split_root
                                           .substream(std::uint64_t(rep))
                                           .substream(std::uint64_t(p))
                                           .seed();
      const std::uint64_t folds_seed = folds_root
                                           .substream(std::uint64_t(rep))
                                           .substream(std::uint64_t(p))
                                           .seed();
      report.splits.push_back({rep, fraction, split_seed, folds_seed});

      Split split;
      try {
        split = random_split(n, fraction, split_seed);
      } catch (const std::exception& e) {
        for (size_t m = 0; m <= method_count; ++m) {
          auto& outcome = report.cells[m * pct_count + p].outcomes[rep];
          outcome.ok = false;
          outcome.error = e.what();
        }
        continue;
      }

      const Matrix raw =
          detail::standardize_columns(ds.spectra.transpose(), split.train);
      detail::MethodJob job{ds, config, cache, split, folds_seed, raw};
      for (size_t m = 0; m < method_count; ++m) {
        auto& outcome = report.cells[m * pct_count + p].outcomes[rep];
        try {
          outcome = detail::run_method(job, config.methods[m]);
        } catch (const std::exception& e) {
          outcome = RepeatOutcome{};
          outcome.ok = false;
          outcome.error = e.what();
        }
      }
      auto& baseline_outcome =
          report.cells[method_count * pct_count + p].outcomes[rep];
      try {
        baseline_outcome = detail::run_baseline(ds, split);
      } catch (const std::exception& e) {
        baseline_outcome.ok = false;
        baseline_outcome.error = e.what();
      }
    }
  }
  for (auto& cell : report.cells)
    cell.aggregate = aggregate_outcomes(cell.outcomes);
  report.feature_solves = cache.solve_count();
  return report;
}

inline EvaluationReport run_experiment(const RetrievalDataset& ds,
                                       const ExperimentConfig& config) {
  validate(ds);
  const AffinityGraph affinity = build_knn_graph(ds.baseline, config.graph);
  return run_experiment(ds, config, laplacian(affinity));
}

struct SweepCell {
  double lambda = 0.0;
  double beta = 0.0;
  bool ok = false;
  std::string error;
  double rmse = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // lambda-major, beta-minor, grids ascending
  int argmin = -1;  // first strict minimum among ok cells; -1 if none
  double gamma = 0.0;  // kernel width fixed by CV at the lattice center
  double c = 0.0;      // box constraint fixed alongside gamma
  double train_fraction = 0.0;
  Split split;
};

// RMSE surface over (lambda, beta) on one fixed split. The kernel
// hyperparameters are chosen once, by CV at the center of the lattice, and
// held fixed so cells differ only through (lambda, beta).
inline SweepResult sweep_lambda_beta(const RetrievalDataset& ds,
                                     const ExperimentConfig& config,
                                     const Laplacian& laplacian_matrix,
                                     double train_fraction = 0.5) {
  validate(ds);
  validate(config);
  SweepResult result;
  result.train_fraction = train_fraction;
  const Rng root(config.seed);
  result.split = random_split(ds.n(), train_fraction,
                              root.substream("sweep-split").seed());
  const std::uint64_t folds_seed = root.substream("sweep-folds").seed();

  FeatureCache cache(ds.spectra, laplacian_matrix, config.glrr);
  const Vector train_targets = detail::take(ds.aeronet, result.split.train);
  const Vector test_targets = detail::take(ds.aeronet, result.split.test);

  const double center_lambda =
      config.lambda_grid[config.lambda_grid.size() / 2];
  const double center_beta = config.beta_grid[config.beta_grid.size() / 2];
  {
    const GlrrSolution& sol = cache.get(center_lambda, center_beta);
    const FeatureSet train_set{
        detail::take_rows(sol.Z.transpose(), result.split.train),
        train_targets};
    const auto best = svr_grid_search_cv(
        train_set, config.gamma_grid, config.c_grid, config.cv_folds,
        folds_seed, config.epsilon_tube, config.svr_max_updates);
    result.gamma = best.params[0];
    result.c = best.params[1];
  }

  for (double lambda : config.lambda_grid) {
    for (double beta : config.beta_grid) {
      SweepCell cell;
      cell.lambda = lambda;
      cell.beta = beta;
      try {
        const GlrrSolution& sol = cache.get(lambda, beta);
        const Matrix features = sol.Z.transpose();
        const FeatureSet train_set{
            detail::take_rows(features, result.split.train), train_targets};
        const SvrModel model =
            fit_svr(train_set, result.c, KernelSpec{result.gamma},
                    config.epsilon_tube, config.svr_max_updates);
        const Vector pred =
            predict(model, detail::take_rows(features, result.split.test));
        cell.rmse = rmse(pred, test_targets);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      if (cell.ok && (result.argmin < 0 ||
                      cell.rmse < result.cells[result.argmin].rmse))
        result.argmin = static_cast<int>(result.cells.size());
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

inline SweepResult sweep_lambda_beta(const RetrievalDataset& ds,
                                     const ExperimentConfig& config,
                                     double train_fraction = 0.5) {
  validate(ds);
  const AffinityGraph affinity = build_knn_graph(ds.baseline, config.graph);
  return sweep_lambda_beta(ds, config, laplacian(affinity), train_fraction);
}

}  // namespace glrr
