#pragma once

// Flat key = value configuration with [section] headers mirroring the
// config structs. Unknown sections or keys are schema errors, so a typo
// cannot silently fall back to a default. config_lines() emits the same
// format back, which is how artifacts embed their resolved configuration.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "glrr/dataset.hpp"
#include "glrr/error.hpp"
#include "glrr/io.hpp"
#include "glrr/pipeline.hpp"
#include "glrr/synthetic.hpp"

namespace glrr {

struct Config {
  ExperimentConfig experiment;  // carries the solver and graph settings
  SyntheticSpec synthetic;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream stream(value);
  while (std::getline(stream, item, ',')) items.push_back(trim(item));
  if (!value.empty() && value.back() == ',') items.push_back("");
  return items;
}

inline std::vector<double> parse_double_list(const std::string& value,
                                             const char* context) {
  std::vector<double> out;
  for (const auto& item : split_list(value))
    out.push_back(parse_double(item, context));
  return out;
}

template <typename Int>
inline Int parse_integer(const std::string& text, const char* context) {
  const std::string t = trim(text);
  Int value{};
  const char* begin = t.data();
  const char* end = begin + t.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw InvalidInput(std::string(context) + ": expected an integer, got '" +
                       text + "'");
  return value;
}

inline bool parse_bool(const std::string& text, const char* context) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InvalidInput(std::string(context) + ": expected true or false, got '" +
                     text + "'");
}

inline void apply_config_key(Config& config, const std::string& section,
                             const std::string& key, const std::string& value,
                             const std::string& where) {
  const char* ctx = where.c_str();
  auto& exp = config.experiment;
  if (section == "solver") {
    GlrrConfig& s = exp.glrr;
    if (key == "lambda") s.lambda = parse_double(value, ctx);
    else if (key == "beta") s.beta = parse_double(value, ctx);
    else if (key == "mu0") s.mu0 = parse_double(value, ctx);
    else if (key == "mu_max") s.mu_max = parse_double(value, ctx);
    else if (key == "rho") s.rho = parse_double(value, ctx);
    else if (key == "eps") s.eps = parse_double(value, ctx);
    else if (key == "max_iter") s.max_iter = parse_integer<int>(value, ctx);
    else
      throw SchemaError(where + ": unknown key '" + key + "' in [solver]");
    return;
  }
  if (section == "graph") {
    if (key == "k") exp.graph.k = parse_integer<int>(value, ctx);
    else if (key == "sigma") exp.graph.sigma = parse_double(value, ctx);
    else
      throw SchemaError(where + ": unknown key '" + key + "' in [graph]");
    return;
  }
  if (section == "experiment") {
    if (key == "train_percentages")
      exp.train_percentages = parse_double_list(value, ctx);
    else if (key == "repeats") exp.repeats = parse_integer<int>(value, ctx);
    else if (key == "seed")
      exp.seed = parse_integer<std::uint64_t>(value, ctx);
    else if (key == "methods") exp.methods = split_list(value);
    else if (key == "lambda_grid")
      exp.lambda_grid = parse_double_list(value, ctx);
    else if (key == "beta_grid") exp.beta_grid = parse_double_list(value, ctx);
    else if (key == "gamma_grid")
      exp.gamma_grid = parse_double_list(value, ctx);
    else if (key == "c_grid") exp.c_grid = parse_double_list(value, ctx);
    else if (key == "alpha_grid")
      exp.alpha_grid = parse_double_list(value, ctx);
    else if (key == "epsilon_tube") exp.epsilon_tube = parse_double(value, ctx);
    else if (key == "cv_folds") exp.cv_folds = parse_integer<int>(value, ctx);
    else if (key == "svr_max_updates")
      exp.svr_max_updates = parse_integer<int>(value, ctx);
    else
      throw SchemaError(where + ": unknown key '" + key + "' in [experiment]");
    return;
  }
  if (section == "synthetic") {
    SyntheticSpec& s = config.synthetic;
    if (key == "n") s.n = parse_integer<int>(value, ctx);
    else if (key == "d") s.d = parse_integer<int>(value, ctx);
    else if (key == "r") s.r = parse_integer<int>(value, ctx);
    else if (key == "corrupt_fraction")
      s.corrupt_fraction = parse_double(value, ctx);
    else if (key == "noise_scale") s.noise_scale = parse_double(value, ctx);
    else if (key == "nonlinear_warp") s.nonlinear_warp = parse_bool(value, ctx);
    else if (key == "target_map") s.target_map = value;
    else if (key == "baseline_noise")
      s.baseline_noise = parse_double(value, ctx);
    else if (key == "seed")
      s.seed = parse_integer<std::uint64_t>(value, ctx);
    else
      throw SchemaError(where + ": unknown key '" + key + "' in [synthetic]");
    return;
  }
  throw SchemaError(where + ": unknown section '" + section + "'");
}

}  // namespace detail

inline Config parse_config(const std::string& text,
                           const std::string& origin = "config") {
  Config config;
  std::istringstream lines(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (t.front() == '[') {
      if (t.back() != ']')
        throw SchemaError(where + ": unterminated section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      static const char* const known[] = {"solver", "graph", "experiment",
                                          "synthetic"};
      if (std::find_if(std::begin(known), std::end(known),
                       [&](const char* s) { return section == s; }) ==
          std::end(known))
        throw SchemaError(where + ": unknown section '" + section + "'");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw SchemaError(where + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (section.empty())
      throw SchemaError(where + ": key '" + key + "' outside any section");
    if (key.empty()) throw SchemaError(where + ": empty key");
    detail::apply_config_key(config, section, key, value, where);
  }
  return config;
}

inline Config load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.string());
}

namespace detail {

inline std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

inline std::string join_strings(const std::vector<std::string>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += values[i];
  }
  return out;
}

}  // namespace detail

// Emits the configuration in the same format parse_config reads, with every
// value resolved. parse_config(join(config_lines(c))) reproduces c exactly.
inline std::vector<std::string> config_lines(const Config& config) {
  const auto& e = config.experiment;
  const auto& s = config.synthetic;
  std::vector<std::string> out;
  out.push_back("[solver]");
  out.push_back("lambda = " + format_double(e.glrr.lambda));
  out.push_back("beta = " + format_double(e.glrr.beta));
  out.push_back("mu0 = " + format_double(e.glrr.mu0));
  out.push_back("mu_max = " + format_double(e.glrr.mu_max));
  out.push_back("rho = " + format_double(e.glrr.rho));
  out.push_back("eps = " + format_double(e.glrr.eps));
  out.push_back("max_iter = " + std::to_string(e.glrr.max_iter));
  out.push_back("[graph]");
  out.push_back("k = " + std::to_string(e.graph.k));
  out.push_back("sigma = " + format_double(e.graph.sigma));
  out.push_back("[experiment]");
  out.push_back("train_percentages = " +
                detail::join_doubles(e.train_percentages));
  out.push_back("repeats = " + std::to_string(e.repeats));
  out.push_back("seed = " + std::to_string(e.seed));
  out.push_back("methods = " + detail::join_strings(e.methods));
  out.push_back("lambda_grid = " + detail::join_doubles(e.lambda_grid));
  out.push_back("beta_grid = " + detail::join_doubles(e.beta_grid));
  out.push_back("gamma_grid = " + detail::join_doubles(e.gamma_grid));
  out.push_back("c_grid = " + detail::join_doubles(e.c_grid));
  out.push_back("alpha_grid = " + detail::join_doubles(e.alpha_grid));
  out.push_back("epsilon_tube = " + format_double(e.epsilon_tube));
  out.push_back("cv_folds = " + std::to_string(e.cv_folds));
  out.push_back("svr_max_updates = " + std::to_string(e.svr_max_updates));
  out.push_back("[synthetic]");
  out.push_back("n = " + std::to_string(s.n));
  out.push_back("d = " + std::to_string(s.d));
  out.push_back("r = " + std::to_string(s.r));
  out.push_back("corrupt_fraction = " + format_double(s.corrupt_fraction));
  out.push_back("noise_scale = " + format_double(s.noise_scale));
  out.push_back(std::string("nonlinear_warp = ") +
                (s.nonlinear_warp ? "true" : "false"));
  out.push_back("target_map = " + s.target_map);
  out.push_back("baseline_noise = " + format_double(s.baseline_noise));
  out.push_back("seed = " + std::to_string(s.seed));
  return out;
}

inline std::string config_text(const Config& config) {
  std::string out;
  for (const auto& line : config_lines(config)) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace glrr
