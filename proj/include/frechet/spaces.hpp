#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>

#include "frechet/isotonic.hpp"
#include "frechet/laplacian.hpp"
#include "frechet/objects.hpp"
#include "frechet/sphere.hpp"

namespace frechet {

namespace detail {

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

template <typename T>
std::string describe(const char* what, T magnitude) {
  std::ostringstream os;
  os << what << " (magnitude " << magnitude << ")";
  return os.str();
}

}  // namespace detail

/// Checks membership of `a` in `space`; returns the first violated
/// invariant with its magnitude, or nullopt when valid.
inline std::optional<std::string> validate(const SpaceHandle& space, const ObjectPoint& a) {
  switch (space.kind) {
    case SpaceKind::Euclidean: {
      const auto* p = std::get_if<EuclideanVector>(&a);
      if (!p) return "object kind is not EuclideanVector";
      if (p->value.size() != space.dim) return detail::describe("dimension mismatch", p->value.size());
      if (!detail::all_finite(p->value)) return "non-finite entry";
      return std::nullopt;
    }
    case SpaceKind::Sphere:
    case SpaceKind::SimplexSqrt: {
      const auto* p = std::get_if<SpherePoint>(&a);
      if (!p) return "object kind is not SpherePoint";
      if (p->value.size() != space.dim) return detail::describe("dimension mismatch", p->value.size());
      if (!detail::all_finite(p->value)) return "non-finite entry";
      const double err = std::abs(p->value.norm() - 1.0);
      if (err > 1e-9) return detail::describe("unit norm violated", err);
      if (space.kind == SpaceKind::SimplexSqrt)
        for (int i = 0; i < p->value.size(); ++i)
          if (p->value[i] < -1e-9)
            return detail::describe("negative orthant coordinate", p->value[i]);
      return std::nullopt;
    }
    case SpaceKind::LaplacianFrobenius: {
      const auto* p = std::get_if<Laplacian>(&a);
      if (!p) return "object kind is not Laplacian";
      const auto& L = p->value;
      if (L.rows() != space.dim || L.cols() != space.dim)
        return detail::describe("dimension mismatch", L.rows());
      if (!detail::all_finite(L)) return "non-finite entry";
      const double asym = (L - L.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-9) return detail::describe("symmetry violated", asym);
      for (int i = 0; i < space.dim; ++i) {
        const double rs = L.row(i).sum();
        if (std::abs(rs) > 1e-9) return detail::describe("row sum not zero", rs);
      }
      for (int i = 0; i < space.dim; ++i)
        for (int j = 0; j < space.dim; ++j) {
          if (i == j) continue;
          if (L(i, j) > 1e-9 || L(i, j) < -space.edge_bound - 1e-9)
            return detail::describe("off-diagonal outside [-C, 0]", L(i, j));
        }
      return std::nullopt;
    }
    case SpaceKind::Wasserstein1D: {
      const auto* p = std::get_if<QuantileGrid>(&a);
      if (!p) return "object kind is not QuantileGrid";
      const auto& v = p->value;
      if (v.size() != space.dim) return detail::describe("dimension mismatch", v.size());
      if (!detail::all_finite(v)) return "non-finite entry";
      for (Eigen::Index k = 0; k + 1 < v.size(); ++k)
        if (v[k + 1] < v[k] - 1e-12)
          return detail::describe("monotone order violated", v[k] - v[k + 1]);
      if (v.size() > 0 && (v[0] < space.lo - 1e-9 || v[v.size() - 1] > space.hi + 1e-9))
        return detail::describe("outside quantile domain", std::max(space.lo - v[0], v[v.size() - 1] - space.hi));
      return std::nullopt;
    }
  }
  return "unknown space kind";
}

inline void require_valid(const SpaceHandle& space, const ObjectPoint& a) {
  if (auto err = validate(space, a))
    throw std::invalid_argument(std::string("invalid object: ") + *err);
}

namespace detail {

/// Packed-column dimension of one object.
inline int packed_dim(const SpaceHandle& space) {
  return space.kind == SpaceKind::LaplacianFrobenius ? space.dim * space.dim : space.dim;
}

inline Eigen::VectorXd pack_point(const SpaceHandle& space, const ObjectPoint& a) {
  switch (space.kind) {
    case SpaceKind::Euclidean: return std::get<EuclideanVector>(a).value;
    case SpaceKind::Sphere:
    case SpaceKind::SimplexSqrt: return std::get<SpherePoint>(a).value;
    case SpaceKind::Wasserstein1D: return std::get<QuantileGrid>(a).value;
    case SpaceKind::LaplacianFrobenius: {
      const auto& L = std::get<Laplacian>(a).value;
      return Eigen::Map<const Eigen::VectorXd>(L.data(), L.size());
    }
  }
  throw std::logic_error("pack_point: unknown space kind");
}

inline ObjectPoint unpack_point(const SpaceHandle& space, const Eigen::VectorXd& col) {
  switch (space.kind) {
    case SpaceKind::Euclidean: return EuclideanVector{col};
    case SpaceKind::Sphere:
    case SpaceKind::SimplexSqrt: return SpherePoint{col};
    case SpaceKind::Wasserstein1D: return QuantileGrid{col};
    case SpaceKind::LaplacianFrobenius: {
      Eigen::MatrixXd L = Eigen::Map<const Eigen::MatrixXd>(col.data(), space.dim, space.dim);
      return Laplacian{std::move(L)};
    }
  }
  throw std::logic_error("unpack_point: unknown space kind");
}

inline Eigen::MatrixXd pack_points(const SpaceHandle& space, std::span<const ObjectPoint> pts) {
  Eigen::MatrixXd out(packed_dim(space), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = pack_point(space, pts[j]);
  return out;
}

inline double squared_distance_cols(const SpaceHandle& space, const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  switch (space.kind) {
    case SpaceKind::Euclidean:
    case SpaceKind::LaplacianFrobenius: return (x - y).squaredNorm();
    case SpaceKind::Wasserstein1D: return (x - y).squaredNorm() / static_cast<double>(space.dim);
    case SpaceKind::Sphere:
    case SpaceKind::SimplexSqrt: {
      const double d = sphere_distance(x, y);
      return d * d;
    }
  }
  throw std::logic_error("squared_distance_cols: unknown space kind");
}

/// All pairwise squared distances between packed sets; out(i, j) is
/// d^2(A_i, B_j). One GEMM plus an elementwise transform.
inline Eigen::MatrixXd squared_distance_matrix(const SpaceHandle& space, const Eigen::MatrixXd& A,
                                               const Eigen::MatrixXd& B) {
  Eigen::MatrixXd G = A.transpose() * B;
  switch (space.kind) {
    case SpaceKind::Sphere:
    case SpaceKind::SimplexSqrt:
      return G.unaryExpr([](double u) {
        const double d = std::acos(std::clamp(u, -1.0, 1.0));
        return d * d;
      });
    case SpaceKind::Euclidean:
    case SpaceKind::LaplacianFrobenius:
    case SpaceKind::Wasserstein1D: {
      const Eigen::VectorXd a2 = A.colwise().squaredNorm();
      const Eigen::VectorXd b2 = B.colwise().squaredNorm();
      G *= -2.0;
      G.colwise() += a2;
      G.rowwise() += b2.transpose();
      G = G.cwiseMax(0.0);
      if (space.kind == SpaceKind::Wasserstein1D) G /= static_cast<double>(space.dim);
      return G;
    }
  }
  throw std::logic_error("squared_distance_matrix: unknown space kind");
}

struct PackedMeanResult {
  Eigen::VectorXd col;
  double objective = 0;
  bool converged = false;
  int iterations = 0;
};

/// Weighted Frechet mean over packed columns. Weights may be negative but
/// must have a positive sum; the minimizer is invariant to positive
/// rescaling of the weights.
inline PackedMeanResult weighted_mean_packed(const SpaceHandle& space, const Eigen::MatrixXd& P,
                                             const Eigen::VectorXd& w) {
  if (P.cols() == 0) throw std::invalid_argument("weighted mean: empty input");
  if (P.cols() != w.size()) throw std::invalid_argument("weighted mean: weight length mismatch");
  const double wsum = w.sum();
  if (wsum <= 0) throw std::invalid_argument("weighted mean: weight sum must be positive");

  PackedMeanResult out;
  switch (space.kind) {
    case SpaceKind::Euclidean:
      out.col = P * (w / wsum);
      out.converged = true;
      break;
    case SpaceKind::Wasserstein1D: {
      Eigen::VectorXd avg = P * (w / wsum);
      out.col = isotonic_projection(avg).cwiseMax(space.lo).cwiseMin(space.hi);
      out.converged = true;
      break;
    }
    case SpaceKind::LaplacianFrobenius: {
      const Eigen::VectorXd avg = P * (w / wsum);
      const Eigen::MatrixXd A = Eigen::Map<const Eigen::MatrixXd>(avg.data(), space.dim, space.dim);
      auto proj = project_to_laplacian(A, space.edge_bound, space.solver);
      out.col = Eigen::Map<const Eigen::VectorXd>(proj.point.data(), proj.point.size());
      out.converged = proj.converged;
      out.iterations = proj.sweeps;
      break;
    }
    case SpaceKind::Sphere:
    case SpaceKind::SimplexSqrt: {
      SphereMeanSolver solver(P, w, space.solver);
      auto r = solver.solve();
      out.converged = r.converged;
      out.iterations = r.iterations;
      if (space.kind == SpaceKind::SimplexSqrt) {
        // Solutions are sought on the whole sphere; fold the result back
        // into the closed nonnegative orthant.
        Eigen::VectorXd clipped = r.point.cwiseMax(0.0);
        const double norm = clipped.norm();
        if (norm < 1e-12) throw SolverError("simplex mean: clipped point vanished");
        out.col = clipped / norm;
      } else {
        out.col = r.point;
      }
      break;
    }
  }
  double obj = 0;
  for (Eigen::Index j = 0; j < P.cols(); ++j)
    obj += w[j] * squared_distance_cols(space, out.col, P.col(j));
  out.objective = obj;
  return out;
}

}  // namespace detail

/// Metric of `space`. Both arguments are validated.
inline double distance(const SpaceHandle& space, const ObjectPoint& a, const ObjectPoint& b) {
  require_valid(space, a);
  require_valid(space, b);
  return std::sqrt(
      detail::squared_distance_cols(space, detail::pack_point(space, a), detail::pack_point(space, b)));
}

struct MeanResult {
  ObjectPoint point;
  double objective = 0;  // sum_j w_j d^2(point, Y_j)
  bool converged = false;
  int iterations = 0;
};

/// Weighted Frechet mean: argmin over the space of sum_j w_j d^2(., Y_j).
inline MeanResult weighted_frechet_mean(const SpaceHandle& space, std::span<const ObjectPoint> points,
                                        const Eigen::VectorXd& weights) {
  if (points.empty()) throw std::invalid_argument("weighted_frechet_mean: empty input");
  for (const auto& p : points) require_valid(space, p);
  const Eigen::MatrixXd packed = detail::pack_points(space, points);
  auto r = detail::weighted_mean_packed(space, packed, weights);
  return MeanResult{detail::unpack_point(space, r.col), r.objective, r.converged, r.iterations};
}

inline MeanResult weighted_frechet_mean(const SpaceHandle& space, const std::vector<ObjectPoint>& points,
                                        const Eigen::VectorXd& weights) {
  return weighted_frechet_mean(space, std::span<const ObjectPoint>(points.data(), points.size()), weights);
}

}  // namespace frechet
