#pragma once

// Artifact serialization. JSON keys keep insertion order and numbers use
// shortest round-trip formatting, so a rerun with the same seed and config
// produces byte-identical files. Every artifact embeds the resolved
// configuration and the seed it was produced with.

#include <string>
#include <vector>

#include <json.hpp>

#include "glrr/config.hpp"
#include "glrr/io.hpp"
#include "glrr/pipeline.hpp"
#include "glrr/solver.hpp"
#include "glrr/synthetic.hpp"

namespace glrr {

using Json = nlohmann::ordered_json;

inline Json config_json(const Config& config) {
  const auto& e = config.experiment;
  const auto& s = config.synthetic;
  Json j;
  j["solver"] = {{"lambda", e.glrr.lambda}, {"beta", e.glrr.beta},
                 {"mu0", e.glrr.mu0},       {"mu_max", e.glrr.mu_max},
                 {"rho", e.glrr.rho},       {"eps", e.glrr.eps},
                 {"max_iter", e.glrr.max_iter}};
  j["graph"] = {{"k", e.graph.k}, {"sigma", e.graph.sigma}};
  j["experiment"] = {{"train_percentages", e.train_percentages},
                     {"repeats", e.repeats},
                     {"seed", e.seed},
                     {"methods", e.methods},
                     {"lambda_grid", e.lambda_grid},
                     {"beta_grid", e.beta_grid},
                     {"gamma_grid", e.gamma_grid},
                     {"c_grid", e.c_grid},
                     {"alpha_grid", e.alpha_grid},
                     {"epsilon_tube", e.epsilon_tube},
                     {"cv_folds", e.cv_folds},
                     {"svr_max_updates", e.svr_max_updates}};
  j["synthetic"] = {{"n", s.n},
                    {"d", s.d},
                    {"r", s.r},
                    {"corrupt_fraction", s.corrupt_fraction},
                    {"noise_scale", s.noise_scale},
                    {"nonlinear_warp", s.nonlinear_warp},
                    {"target_map", s.target_map},
                    {"baseline_noise", s.baseline_noise},
                    {"seed", s.seed}};
  return j;
}

inline Json json_matrix(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json dataset_json(const RetrievalDataset& ds) {
  return {{"samples", ds.n()},
          {"bands", ds.d()},
          {"dropped_rows", ds.dropped_rows}};
}

inline Json report_json(const EvaluationReport& report, const Config& config,
                        const RetrievalDataset& ds) {
  Json j;
  j["schema"] = "glrr-report-v1";
  j["seed"] = config.experiment.seed;
  j["config"] = config_json(config);
  j["dataset"] = dataset_json(ds);
  j["feature_solves"] = report.feature_solves;
  Json splits = Json::array();
  for (const auto& s : report.splits)
    splits.push_back({{"repeat", s.repeat},
                      {"train_fraction", s.train_fraction},
                      {"split_seed", s.split_seed},
                      {"folds_seed", s.folds_seed}});
  j["splits"] = std::move(splits);
  Json cells = Json::array();
  for (const auto& cell : report.cells) {
    Json c;
    c["method"] = cell.method;
    c["train_fraction"] = cell.train_fraction;
    c["rmse_count"] = cell.aggregate.rmse_count;
    if (cell.aggregate.rmse_count > 0) {
      c["mean_rmse"] = cell.aggregate.mean_rmse;
      c["std_rmse"] = cell.aggregate.std_rmse;
    }
    c["r_count"] = cell.aggregate.r_count;
    if (cell.aggregate.r_count > 0) {
      c["mean_r"] = cell.aggregate.mean_r;
      c["std_r"] = cell.aggregate.std_r;
    }
    Json reps = Json::array();
    for (const auto& o : cell.outcomes) {
      Json ro;
      ro["ok"] = o.ok;
      if (o.ok) {
        ro["rmse"] = o.rmse;
        if (o.has_r) ro["r"] = o.r;  // omitted when undefined, never 0
        ro["features_converged"] = o.features_converged;
        if (!o.params.empty()) {
          Json params;
          for (const auto& [name, value] : o.params) params[name] = value;
          ro["params"] = std::move(params);
        }
      } else {
        ro["error"] = o.error;
      }
      reps.push_back(std::move(ro));
    }
    c["repeats"] = std::move(reps);
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

// Flat mirror for plotting: one row per (method, percentage) cell; blank
// fields where an aggregate is undefined.
inline std::string report_csv(const EvaluationReport& report,
                              const Config& config) {
  std::string out;
  for (const auto& line : config_lines(config)) out += "# " + line + "\n";
  out +=
      "method,train_fraction,rmse_count,mean_rmse,std_rmse,r_count,mean_r,"
      "std_r\n";
  for (const auto& cell : report.cells) {
    const auto& agg = cell.aggregate;
    out += cell.method + "," + format_double(cell.train_fraction) + ",";
    out += std::to_string(agg.rmse_count) + ",";
    if (agg.rmse_count > 0)
      out += format_double(agg.mean_rmse) + "," + format_double(agg.std_rmse);
    else
      out += ",";
    out += "," + std::to_string(agg.r_count) + ",";
    if (agg.r_count > 0)
      out += format_double(agg.mean_r) + "," + format_double(agg.std_r);
    else
      out += ",";
    out += "\n";
  }
  return out;
}

inline std::string matrix_csv(const Matrix& m,
                              const std::vector<std::string>& comment_lines =
                                  {}) {
  std::string out;
  for (const auto& c : comment_lines) out += "# " + c + "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += format_double(m(i, j));
    }
    out += "\n";
  }
  return out;
}

inline std::string residual_history_csv(
    const GlrrSolution& solution,
    const std::vector<std::string>& comment_lines = {}) {
  std::string out;
  for (const auto& c : comment_lines) out += "# " + c + "\n";
  out += "iteration,residual1,residual2,mu\n";
  for (size_t i = 0; i < solution.history.size(); ++i) {
    const auto& h = solution.history[i];
    out += std::to_string(i + 1) + "," +
           format_double(h.constraint_residual) + "," +
           format_double(h.coupling_residual) + "," + format_double(h.mu) +
           "\n";
  }
  return out;
}

inline Json solve_json(const GlrrSolution& solution, const Config& config,
                       const RetrievalDataset& ds) {
  Json j;
  j["schema"] = "glrr-solve-v1";
  j["seed"] = config.experiment.seed;
  j["config"] = config_json(config);
  j["dataset"] = dataset_json(ds);
  j["iterations"] = solution.iterations;
  j["converged"] = solution.converged;
  if (!solution.history.empty()) {
    j["final_residual1"] = solution.history.back().constraint_residual;
    j["final_residual2"] = solution.history.back().coupling_residual;
  }
  return j;
}

inline std::string sweep_csv(const SweepResult& sweep, const Config& config) {
  std::string out;
  for (const auto& line : config_lines(config)) out += "# " + line + "\n";
  out += "# train_fraction = " + format_double(sweep.train_fraction) + "\n";
  out += "# gamma = " + format_double(sweep.gamma) + "\n";
  out += "# c = " + format_double(sweep.c) + "\n";
  if (sweep.argmin >= 0) {
    const auto& best = sweep.cells[sweep.argmin];
    out += "# argmin: lambda = " + format_double(best.lambda) +
           ", beta = " + format_double(best.beta) + "\n";
  }
  out += "lambda,beta,rmse\n";
  for (const auto& cell : sweep.cells) {
    out += format_double(cell.lambda) + "," + format_double(cell.beta) + ",";
    if (cell.ok) out += format_double(cell.rmse);
    out += "\n";
  }
  return out;
}

inline Json sweep_json(const SweepResult& sweep, const Config& config) {
  Json j;
  j["schema"] = "glrr-sweep-v1";
  j["seed"] = config.experiment.seed;
  j["config"] = config_json(config);
  j["train_fraction"] = sweep.train_fraction;
  j["gamma"] = sweep.gamma;
  j["c"] = sweep.c;
  j["split"] = {{"train", sweep.split.train}, {"test", sweep.split.test}};
  if (sweep.argmin >= 0) {
    const auto& best = sweep.cells[sweep.argmin];
    j["argmin"] = {{"index", sweep.argmin},
                   {"lambda", best.lambda},
                   {"beta", best.beta},
                   {"rmse", best.rmse}};
  } else {
    j["argmin"] = nullptr;
  }
  Json cells = Json::array();
  for (const auto& cell : sweep.cells) {
    Json c;
    c["lambda"] = cell.lambda;
    c["beta"] = cell.beta;
    if (cell.ok)
      c["rmse"] = cell.rmse;
    else
      c["error"] = cell.error;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline Json synthetic_truth_json(const SyntheticData& data,
                                 const Config& config) {
  Json j;
  j["schema"] = "glrr-synthetic-truth-v1";
  j["seed"] = config.synthetic.seed;
  j["config"] = config_json(config);
  j["corrupted_columns"] = data.corrupted_columns;
  j["clean"] = json_matrix(data.clean);
  return j;
}

inline void write_json(const Json& j, const std::filesystem::path& path) {
  atomic_write_text(path, j.dump(2) + "\n");
}

}  // namespace glrr
