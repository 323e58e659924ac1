#pragma once

// Retrieval dataset container and its CSV schema:
//   id, band_1 ... band_d, aeronet_aod, baseline_aod
// One sample per row. Malformed rows are dropped and counted, never
// silently repaired.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "glrr/error.hpp"
#include "glrr/io.hpp"
#include "glrr/matrix.hpp"

namespace glrr {

struct RetrievalDataset {
  Matrix spectra;  // d x n, column per sample
  Vector aeronet;  // ground-truth AOD, length n
  Vector baseline; // physical-model AOD, length n
  std::vector<std::string> ids;
  int dropped_rows = 0;

  int n() const { return static_cast<int>(spectra.cols()); }
  int d() const { return static_cast<int>(spectra.rows()); }
};

inline void validate(const RetrievalDataset& ds) {
  const auto n = ds.spectra.cols();
  require(n >= 2, "dataset: need at least two samples");
  require(ds.spectra.rows() >= 1, "dataset: need at least one band");
  require(ds.aeronet.size() == n && ds.baseline.size() == n &&
              static_cast<Eigen::Index>(ds.ids.size()) == n,
          "dataset: column counts disagree across fields");
  require_finite(ds.spectra, "dataset spectra");
  require_finite(ds.aeronet, "dataset aeronet");
  require_finite(ds.baseline, "dataset baseline");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r'))
    --b;
  return s.substr(a, b - a);
}

inline bool parse_field(const std::string& raw, double& out) {
  const std::string text = trim(raw);
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

}  // namespace detail

// Parses the documented schema. Lines starting with '#' are comments.
// Rows with missing or non-numeric fields are dropped (counted in
// dropped_rows); a missing required column is a schema error naming it.
inline RetrievalDataset load_csv(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::istringstream lines(text);
  std::string line;

  std::string header_line;
  while (std::getline(lines, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    header_line = t;
    break;
  }
  if (header_line.empty()) {
    throw SchemaError(path.string() + ": missing header row");
  }

  auto header = detail::split_csv_line(header_line);
  for (auto& h : header) h = detail::trim(h);

  const auto find_column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw SchemaError(path.string() + ": missing required column '" +
                        name + "'");
    }
    return static_cast<int>(it - header.begin());
  };

  const int id_col = find_column("id");
  const int aeronet_col = find_column("aeronet_aod");
  const int baseline_col = find_column("baseline_aod");
  std::vector<int> band_cols;
  while (true) {
    const std::string name = "band_" + std::to_string(band_cols.size() + 1);
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) break;
    band_cols.push_back(static_cast<int>(it - header.begin()));
  }
  if (band_cols.empty()) {
    throw SchemaError(path.string() + ": missing required column 'band_1'");
  }
  for (const auto& h : header) {
    if (h.rfind("band_", 0) == 0) {
      const std::string tail = h.substr(5);
      bool numbered = !tail.empty() &&
                      std::all_of(tail.begin(), tail.end(),
                                  [](char c) { return c >= '0' && c <= '9'; });
      if (numbered) {
        const int num = std::stoi(tail);
        if (num < 1 || num > static_cast<int>(band_cols.size())) {
          throw SchemaError(path.string() + ": band columns must be band_1.." +
                            "band_d without gaps; found '" + h + "'");
        }
      }
    }
  }

  const int d = static_cast<int>(band_cols.size());
  std::vector<std::string> ids;
  std::vector<double> aeronet, baseline;
  std::vector<double> spectra;  // column-major staging, d per sample
  int dropped = 0;
  while (std::getline(lines, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = detail::split_csv_line(t);
    if (fields.size() != header.size()) {
      ++dropped;
      continue;
    }
    double a = 0.0, b = 0.0;
    std::vector<double> bands(d);
    bool ok = detail::parse_field(fields[aeronet_col], a) &&
              detail::parse_field(fields[baseline_col], b);
    for (int k = 0; ok && k < d; ++k)
      ok = detail::parse_field(fields[band_cols[k]], bands[k]);
    const std::string id = detail::trim(fields[id_col]);
    if (!ok || id.empty()) {
      ++dropped;
      continue;
    }
    ids.push_back(id);
    aeronet.push_back(a);
    baseline.push_back(b);
    spectra.insert(spectra.end(), bands.begin(), bands.end());
  }

  const int n = static_cast<int>(ids.size());
  require(n >= 2, path.string() + ": fewer than two usable rows" +
                      (dropped > 0
                           ? " (" + std::to_string(dropped) + " dropped)"
                           : ""));
  RetrievalDataset ds;
  ds.spectra = Matrix(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) ds.spectra(i, j) = spectra[j * d + i];
  ds.aeronet = Eigen::Map<Vector>(aeronet.data(), n);
  ds.baseline = Eigen::Map<Vector>(baseline.data(), n);
  ds.ids = std::move(ids);
  ds.dropped_rows = dropped;
  validate(ds);
  return ds;
}

// Writes the documented schema; comment_lines go first, each prefixed
// with "# ". Numbers are written in shortest exact form, so a load after
// a save reproduces every value bit for bit.
inline void save_csv(const RetrievalDataset& ds,
                     const std::filesystem::path& path,
                     const std::vector<std::string>& comment_lines = {}) {
  validate(ds);
  std::ostringstream out;
  for (const auto& c : comment_lines) out << "# " << c << "\n";
  out << "id";
  for (int i = 1; i <= ds.d(); ++i) out << ",band_" << i;
  out << ",aeronet_aod,baseline_aod\n";
  for (int j = 0; j < ds.n(); ++j) {
    out << ds.ids[j];
    for (int i = 0; i < ds.d(); ++i)
      out << "," << format_double(ds.spectra(i, j));
    out << "," << format_double(ds.aeronet(j)) << ","
        << format_double(ds.baseline(j)) << "\n";
  }
  atomic_write_text(path, out.str());
}

}  // namespace glrr
