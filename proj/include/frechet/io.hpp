#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "frechet/inference.hpp"
#include "frechet/simulation.hpp"
#include "frechet/version.hpp"

namespace frechet::io {

/// Full-precision decimal rendering; %.17g round-trips every double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Csv {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

inline Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Csv csv;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) csv.header.push_back(cell);
  const std::size_t width = csv.header.size();
  if (width == 0) throw std::invalid_argument(path + ": empty header row");

  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t col = 0, pos = 0;
    while (true) {
      const std::size_t next = line.find(',', pos);
      const std::string_view field(line.data() + pos, (next == std::string::npos ? line.size() : next) - pos);
      double v = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw std::invalid_argument(path + ": non-numeric cell at row " + std::to_string(rows + 1) +
                                    ", column " + std::to_string(col + 1));
      data.push_back(v);
      ++col;
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (col != width)
      throw std::invalid_argument(path + ": row " + std::to_string(rows + 1) + " has " +
                                  std::to_string(col) + " cells, expected " + std::to_string(width));
    ++rows;
  }
  csv.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < width; ++c)
      csv.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * width + c];
  return csv;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << "\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      out << (c ? "," : "") << format_double(values(r, c));
    out << "\n";
  }
}

/// Response-space description as given on the command line; dimensions not
/// fixed by flags are resolved from the data.
struct SpaceSpec {
  std::string kind;          // euclidean | sphere | laplacian | simplex | wasserstein
  int m = 0;                 // node count (laplacian; required)
  int levels = 0;            // grid levels (wasserstein; optional cross-check)
  double edge_bound = 0;     // laplacian; 0 means infer from data
  double lo = 0, hi = 0;     // wasserstein domain; inferred when lo == hi
};

inline int response_width(const SpaceHandle& space) {
  return space.kind == SpaceKind::LaplacianFrobenius ? vech_length(space.dim) : space.dim;
}

inline std::vector<std::string> response_header(const SpaceHandle& space) {
  const char* stem = "y";
  switch (space.kind) {
    case SpaceKind::Euclidean: stem = "y"; break;
    case SpaceKind::Sphere: stem = "u"; break;
    case SpaceKind::SimplexSqrt: stem = "a"; break;
    case SpaceKind::LaplacianFrobenius: stem = "g"; break;
    case SpaceKind::Wasserstein1D: stem = "q"; break;
  }
  std::vector<std::string> header;
  const int width = response_width(space);
  header.reserve(static_cast<std::size_t>(width));
  for (int i = 1; i <= width; ++i) header.push_back(stem + std::to_string(i));
  return header;
}

/// One CSV row per object: vector entries as-is, compositions for
/// SimplexSqrt, vech of the (nonpositive) off-diagonal entries for
/// Laplacians.
inline Eigen::VectorXd encode_response(const SpaceHandle& space, const ObjectPoint& point) {
  switch (space.kind) {
    case SpaceKind::Euclidean: return std::get<EuclideanVector>(point).value;
    case SpaceKind::Sphere: return std::get<SpherePoint>(point).value;
    case SpaceKind::SimplexSqrt: return inverse_sqrt_transform(std::get<SpherePoint>(point).value);
    case SpaceKind::Wasserstein1D: return std::get<QuantileGrid>(point).value;
    case SpaceKind::LaplacianFrobenius: return vech(std::get<Laplacian>(point).value);
  }
  throw std::logic_error("encode_response: unknown space kind");
}

inline ObjectPoint decode_response(const SpaceHandle& space, const Eigen::VectorXd& row) {
  ObjectPoint point;
  switch (space.kind) {
    case SpaceKind::Euclidean: point = EuclideanVector{row}; break;
    case SpaceKind::Sphere: point = SpherePoint{row}; break;
    case SpaceKind::SimplexSqrt: {
      Eigen::VectorXd comp = row;
      for (int i = 0; i < comp.size(); ++i)
        if (comp[i] < 0) throw std::invalid_argument("negative composition component");
      const double sum = comp.sum();
      if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("composition does not sum to 1 (sum " + format_double(sum) + ")");
      if (std::abs(sum - 1.0) > 1e-12) comp /= sum;
      point = SpherePoint{sqrt_transform(comp)};
      break;
    }
    case SpaceKind::Wasserstein1D: point = QuantileGrid{row}; break;
    case SpaceKind::LaplacianFrobenius: point = Laplacian{vech_inverse(row, space.dim)}; break;
  }
  require_valid(space, point);
  return point;
}

inline SpaceHandle resolve_space(const SpaceSpec& spec, const Eigen::MatrixXd& y_rows) {
  const int width = static_cast<int>(y_rows.cols());
  if (spec.kind == "euclidean") return SpaceHandle::euclidean(width);
  if (spec.kind == "sphere") return SpaceHandle::sphere(width);
  if (spec.kind == "simplex") return SpaceHandle::simplex_sqrt(width);
  if (spec.kind == "laplacian") {
    if (spec.m <= 0) throw std::invalid_argument("laplacian space requires --m");
    if (vech_length(spec.m) != width)
      throw std::invalid_argument("q != m(m-1)/2: got " + std::to_string(width) + " columns for m = " +
                                  std::to_string(spec.m));
    double bound = spec.edge_bound;
    if (bound <= 0) bound = std::max(1.0, y_rows.cwiseAbs().maxCoeff());
    return SpaceHandle::laplacian(spec.m, bound);
  }
  if (spec.kind == "wasserstein") {
    if (spec.levels > 0 && spec.levels != width)
      throw std::invalid_argument("--M disagrees with the quantile row width");
    double lo = spec.lo, hi = spec.hi;
    if (!(lo < hi)) {
      lo = y_rows.minCoeff();
      hi = y_rows.maxCoeff();
      if (!(lo < hi)) hi = lo + 1.0;
    }
    return SpaceHandle::wasserstein(width, lo, hi);
  }
  throw std::invalid_argument("unknown space kind: " + spec.kind);
}

/// Reads predictors and responses and assembles the validated dataset.
inline Dataset ingest(const std::string& x_path, const std::string& y_path, const SpaceSpec& spec) {
  const Csv xs = read_csv(x_path);
  const Csv ys = read_csv(y_path);
  if (xs.values.rows() != ys.values.rows())
    throw std::invalid_argument("predictor and response files disagree on row count");
  const SpaceHandle space = resolve_space(spec, ys.values);
  std::vector<ObjectPoint> Y;
  Y.reserve(static_cast<std::size_t>(ys.values.rows()));
  for (Eigen::Index r = 0; r < ys.values.rows(); ++r) {
    try {
      Y.push_back(decode_response(space, ys.values.row(r).transpose()));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(y_path + ": row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  return make_dataset(xs.values, std::move(Y), space);
}

inline nlohmann::json space_to_json(const SpaceHandle& space) {
  nlohmann::json j{{"kind", space_kind_name(space.kind)}, {"dim", space.dim}};
  if (space.kind == SpaceKind::LaplacianFrobenius) j["edge_bound"] = space.edge_bound;
  if (space.kind == SpaceKind::Wasserstein1D) {
    j["lo"] = space.lo;
    j["hi"] = space.hi;
  }
  return j;
}

inline nlohmann::json report_to_json(const TestReport& report) {
  nlohmann::json j;
  j["kind"] = test_kind_name(report.kind);
  j["r_squared"] = report.r_squared;
  j["z_scores"] = std::vector<double>(report.z_scores.data(), report.z_scores.data() + report.z_scores.size());
  j["cauchy_stat"] = report.cauchy_stat;
  j["p_value"] = report.p_value;
  j["sigma_hat"] = report.sigma_hat;
  j["n"] = report.n;
  j["diagnostics"] = {{"nonconverged", report.diagnostics.nonconverged},
                      {"degenerate", report.diagnostics.degenerate}};
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return nlohmann::json::parse(in);
}

inline void write_power_csv(const std::string& path, const sim::PowerStudyResult& result) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "beta,gamma,n,rate,se,mean_p,B,failures\n";
  for (const auto& cell : result.cells)
    out << format_double(cell.cell.beta) << "," << format_double(cell.cell.gamma) << ","
        << cell.cell.n << "," << format_double(cell.rate) << "," << format_double(cell.se) << ","
        << format_double(cell.mean_p) << "," << cell.B << "," << cell.failures << "\n";
}

/// Record of one CLI invocation: fully resolved configuration plus run
/// metadata. Re-running the recorded command reproduces the outputs.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double duration_seconds = 0;
  nlohmann::json diagnostics;
  std::vector<std::string> outputs;
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  return nlohmann::json{{"command", m.command},       {"config", m.config},
                        {"seed", m.seed},             {"version", m.version},
                        {"duration_seconds", m.duration_seconds}, {"diagnostics", m.diagnostics},
                        {"outputs", m.outputs}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.seed = j.at("seed").get<std::uint64_t>();
  m.version = j.at("version").get<std::string>();
  m.duration_seconds = j.at("duration_seconds").get<double>();
  m.diagnostics = j.at("diagnostics");
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

}  // namespace frechet::io
