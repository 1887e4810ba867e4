#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "frechet/objects.hpp"

namespace frechet {

inline int vech_length(int m) { return m * (m - 1) / 2; }

/// Node count for a half-vectorization of length q, or -1 if q is not of
/// the form m(m-1)/2.
inline int vech_nodes(int q) {
  const int m = static_cast<int>(std::round((1.0 + std::sqrt(1.0 + 8.0 * q)) / 2.0));
  return vech_length(m) == q ? m : -1;
}

/// Strict upper triangle, row-major: (0,1), (0,2), ..., (1,2), ...
inline Eigen::VectorXd vech(const Eigen::MatrixXd& L) {
  if (L.rows() != L.cols()) throw std::invalid_argument("vech: matrix must be square");
  const int m = static_cast<int>(L.rows());
  Eigen::VectorXd v(vech_length(m));
  int k = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) v[k++] = L(i, j);
  return v;
}

/// Rebuilds the symmetric matrix with off-diagonals v and diagonal set to
/// the negated row sums, so every row sums to zero.
inline Eigen::MatrixXd vech_inverse(const Eigen::VectorXd& v, int m) {
  if (vech_length(m) != v.size())
    throw std::invalid_argument("vech_inverse: length is not m(m-1)/2");
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  int k = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      L(i, j) = v[k];
      L(j, i) = v[k];
      ++k;
    }
  for (int i = 0; i < m; ++i) L(i, i) = -(L.row(i).sum() - L(i, i));
  return L;
}

namespace detail {

struct LaplacianProjection {
  Eigen::MatrixXd point;
  bool converged = false;
  int sweeps = 0;
};

/// Frobenius projection of a symmetric zero-row-sum matrix A onto the
/// Laplacian space with off-diagonals in [-C, 0].
///
/// Box-constrained convex QP over the q off-diagonal entries (the diagonal
/// is the negated row sum); cyclic coordinate descent, each coordinate
/// minimized exactly and clipped, until the objective moves less than tol
/// in a full sweep.
inline LaplacianProjection project_to_laplacian(const Eigen::MatrixXd& A, double edge_bound,
                                                const SolverSettings& settings) {
  const int m = static_cast<int>(A.rows());
  const int q = vech_length(m);
  const Eigen::VectorXd abar = vech(A);

  // delta = g - abar; row_excess[i] tracks sum_k delta_(ik).
  Eigen::VectorXd g(q), delta(q);
  for (int e = 0; e < q; ++e) {
    g[e] = std::min(0.0, std::max(-edge_bound, abar[e]));
    delta[e] = g[e] - abar[e];
  }

  std::vector<std::pair<int, int>> edges;
  edges.reserve(q);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) edges.emplace_back(i, j);

  Eigen::VectorXd row_excess = Eigen::VectorXd::Zero(m);
  for (int e = 0; e < q; ++e) {
    row_excess[edges[e].first] += delta[e];
    row_excess[edges[e].second] += delta[e];
  }

  auto objective = [&]() {
    return 2.0 * delta.squaredNorm() + row_excess.squaredNorm();
  };

  LaplacianProjection out;
  double prev = objective();
  if (q == 0) {
    out.converged = true;
  } else {
    for (int sweep = 0; sweep < settings.max_iter; ++sweep) {
      for (int e = 0; e < q; ++e) {
        const auto [i, j] = edges[e];
        const double ri = row_excess[i] - delta[e];
        const double rj = row_excess[j] - delta[e];
        const double unconstrained = -(ri + rj) / 4.0;
        const double g_new =
            std::min(0.0, std::max(-edge_bound, abar[e] + unconstrained));
        const double d_new = g_new - abar[e];
        row_excess[i] += d_new - delta[e];
        row_excess[j] += d_new - delta[e];
        delta[e] = d_new;
        g[e] = g_new;
      }
      ++out.sweeps;
      const double cur = objective();
      if (std::abs(prev - cur) < settings.tol) {
        out.converged = true;
        break;
      }
      prev = cur;
    }
  }
  out.point = vech_inverse(g, m);
  return out;
}

}  // namespace detail
}  // namespace frechet
