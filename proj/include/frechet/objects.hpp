#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <variant>

namespace frechet {

enum class SpaceKind { Euclidean, Sphere, LaplacianFrobenius, Wasserstein1D, SimplexSqrt };

inline const char* space_kind_name(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::Sphere: return "sphere";
    case SpaceKind::LaplacianFrobenius: return "laplacian";
    case SpaceKind::Wasserstein1D: return "wasserstein";
    case SpaceKind::SimplexSqrt: return "simplex";
  }
  return "unknown";
}

/// Iterative-solver knobs. `tol` is an objective-change tolerance for the
/// Laplacian coordinate sweeps and a gradient-norm tolerance for the sphere
/// descent; `restarts` (sphere only) adds starts at the largest-|weight|
/// data points on top of the weighted-average initializer.
struct SolverSettings {
  double tol = 1e-10;
  int max_iter = 10000;
  int restarts = 5;
};

/// A response value. Which alternative is valid is dictated by the
/// SpaceHandle it travels with (SimplexSqrt stores the square-root
/// transformed composition as a SpherePoint).
struct EuclideanVector {
  Eigen::VectorXd value;
};
struct SpherePoint {
  Eigen::VectorXd value;
};
struct Laplacian {
  Eigen::MatrixXd value;
};
struct QuantileGrid {
  Eigen::VectorXd value;
};

using ObjectPoint = std::variant<EuclideanVector, SpherePoint, Laplacian, QuantileGrid>;

/// Immutable descriptor of one metric space: geometry kind, dimension
/// parameters, constraint constants and solver settings. Shareable across
/// threads once constructed.
struct SpaceHandle {
  SpaceKind kind = SpaceKind::Euclidean;
  int dim = 1;             // r (vector length), m (node count) or M (grid levels)
  double edge_bound = 0;   // C; LaplacianFrobenius only
  double lo = 0, hi = 1;   // quantile domain; Wasserstein1D only
  SolverSettings solver;

  static SpaceHandle euclidean(int r) {
    require(r >= 1, "euclidean dimension must be >= 1");
    SpaceHandle h;
    h.kind = SpaceKind::Euclidean;
    h.dim = r;
    return h;
  }

  static SpaceHandle sphere(int r) {
    require(r >= 1, "sphere ambient dimension must be >= 1");
    SpaceHandle h;
    h.kind = SpaceKind::Sphere;
    h.dim = r;
    h.solver.tol = 1e-9;  // gradient-norm scale
    return h;
  }

  static SpaceHandle laplacian(int m, double edge_bound) {
    require(m >= 1, "node count must be >= 1");
    require(edge_bound > 0, "edge bound C must be > 0");
    SpaceHandle h;
    h.kind = SpaceKind::LaplacianFrobenius;
    h.dim = m;
    h.edge_bound = edge_bound;
    return h;
  }

  static SpaceHandle wasserstein(int levels, double lo, double hi) {
    require(levels >= 1, "grid level count must be >= 1");
    require(lo < hi, "quantile domain needs lo < hi");
    SpaceHandle h;
    h.kind = SpaceKind::Wasserstein1D;
    h.dim = levels;
    h.lo = lo;
    h.hi = hi;
    return h;
  }

  static SpaceHandle simplex_sqrt(int p) {
    require(p >= 1, "composition length must be >= 1");
    SpaceHandle h;
    h.kind = SpaceKind::SimplexSqrt;
    h.dim = p;
    h.solver.tol = 1e-9;
    return h;
  }

 private:
  static void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  }
};

/// Raised when a solve hits degenerate geometry (antipodal sphere points,
/// all-zero renormalization target) rather than a bad argument.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace frechet
