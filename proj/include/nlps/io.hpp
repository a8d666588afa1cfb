#pragma once

// File formats: samples CSV (index,evals,f,slack,x_0..x_{n-1}, 17 significant
// digits), run summary JSON, and a small CSV table reader.

#include "nlps/config.hpp"
#include "nlps/dataset.hpp"
#include "nlps/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace nlps {

inline void write_samples_csv(std::ostream& os, const Dataset& d, int n) {
  os << "index,evals,f,slack";
  for (int i = 0; i < n; ++i) os << ",x_" << i;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t k = 0; k < d.samples.size(); ++k) {
    const auto& s = d.samples[k];
    os << k << ',' << s.evals << ',' << s.f << ',' << s.slack;
    for (Eigen::Index i = 0; i < s.x.size(); ++i) os << ',' << s.x[i];
    os << '\n';
  }
}

inline std::string samples_csv(const Dataset& d, int n) {
  std::ostringstream os;
  write_samples_csv(os, d, n);
  return os.str();
}

/// Header plus rows of a comma-separated table. Fields may be double-quoted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  [[nodiscard]] int require_column(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw Error("CSV is missing column '" + name + "'");
    return c;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size())
      throw Error("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                  std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_csv(in);
}

/// Samples from a samples CSV. Dimension is taken from the x_i columns.
inline std::vector<Sample> read_samples(std::istream& in) {
  const CsvTable t = read_csv(in);
  std::vector<Sample> out;
  if (t.header.empty()) return out;
  const int ce = t.require_column("evals");
  const int cf = t.require_column("f");
  const int cs = t.require_column("slack");
  std::vector<int> cx;
  for (int i = 0;; ++i) {
    const int c = t.column("x_" + std::to_string(i));
    if (c < 0) break;
    cx.push_back(c);
  }
  for (const auto& row : t.rows) {
    Sample s;
    s.evals = std::stoull(row[ce]);
    s.f = std::stod(row[cf]);
    s.slack = std::stod(row[cs]);
    s.x.resize(static_cast<Eigen::Index>(cx.size()));
    for (std::size_t i = 0; i < cx.size(); ++i) s.x[static_cast<Eigen::Index>(i)] = std::stod(row[cx[i]]);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<Sample> read_samples_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_samples(in);
}

inline std::vector<Vector> sample_points(const std::vector<Sample>& s) {
  std::vector<Vector> out;
  out.reserve(s.size());
  for (const auto& x : s) out.push_back(x.x);
  return out;
}

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

/// Run summary: performance numbers, run diagnostics and the config echo.
inline Json summary_json(const Dataset& d, const PerformanceRecord& r, const SamplerConfig& cfg) {
  Json j;
  j["problem"] = d.problem;
  j["label"] = d.config;
  j["seed"] = d.seed;
  j["n_samples"] = r.n_samples;
  j["n_evals"] = r.n_evals;
  j["samples_per_eval"] = r.samples_per_eval;
  j["msts1"] = r.msts1;
  j["msts2"] = r.msts2;
  j["msts1_per_eval"] = r.msts1_per_eval;
  j["msts1_per_sample"] = r.msts1_per_sample;
  j["restarts"] = d.restarts;
  j["episodes"] = d.episodes;
  j["best_slack"] = finite_or_null(d.best_slack);
  j["config"] = config_to_json(cfg);
  return j;
}

}  // namespace nlps
