#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "frechet/objects.hpp"

namespace frechet {

/// Geodesic distance arccos(a . b), evaluated through the chord length
/// near +-1 where acos loses half the significant digits.
inline double sphere_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double dot = std::clamp(a.dot(b), -1.0, 1.0);
  if (dot > 0.99) return 2.0 * std::asin(std::min(1.0, 0.5 * (a - b).norm()));
  if (dot < -0.99) return M_PI - 2.0 * std::asin(std::min(1.0, 0.5 * (a + b).norm()));
  return std::acos(dot);
}

/// Exp_base(tangent) = cos(|t|) base + sin(|t|) t/|t|.
inline Eigen::VectorXd exp_map(const Eigen::VectorXd& base, const Eigen::VectorXd& tangent) {
  if (base.size() != tangent.size()) throw std::invalid_argument("exp_map: dimension mismatch");
  if (std::abs(base.dot(tangent)) > 1e-8)
    throw std::invalid_argument("exp_map: tangent not orthogonal to base");
  const double norm = tangent.norm();
  if (norm < 1e-14) return base;
  return std::cos(norm) * base + (std::sin(norm) / norm) * tangent;
}

/// Inverse of exp_map; |log_map(base, target)| equals the geodesic distance.
inline Eigen::VectorXd log_map(const Eigen::VectorXd& base, const Eigen::VectorXd& target) {
  if (base.size() != target.size()) throw std::invalid_argument("log_map: dimension mismatch");
  const double dot = std::clamp(base.dot(target), -1.0, 1.0);
  const double d = std::acos(dot);
  if (d > M_PI - 1e-8) throw SolverError("log_map: target antipodal to base");
  if (d < 1e-14) return Eigen::VectorXd::Zero(base.size());
  return (target - dot * base) * (d / std::sin(d));
}

/// Component-wise square root, mapping the simplex to the unit sphere.
inline Eigen::VectorXd sqrt_transform(const Eigen::VectorXd& composition) {
  for (int i = 0; i < composition.size(); ++i)
    if (composition[i] < 0)
      throw std::invalid_argument("sqrt_transform: negative component");
  if (std::abs(composition.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("sqrt_transform: components do not sum to 1");
  return composition.array().sqrt();
}

inline Eigen::VectorXd inverse_sqrt_transform(const Eigen::VectorXd& sphere_point) {
  if (std::abs(sphere_point.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("inverse_sqrt_transform: input not unit norm");
  return sphere_point.array().square();
}

namespace detail {

struct SphereSolveResult {
  Eigen::VectorXd point;
  double objective = 0;  // with the weights as given to the solver
  bool converged = false;
  int iterations = 0;
};

/// Weighted Frechet mean on the unit sphere.
///
/// Minimizes sum_j w_j d^2(omega, Y_j) by Riemannian gradient descent with
/// normalization retraction and Armijo backtracking. Weights may be
/// negative (the objective is then possibly non-convex), so on top of the
/// normalized weighted-average start the solver restarts from the
/// settings.restarts data points of largest |w| and keeps the best
/// objective.
///
/// `points` holds one unit vector per column.
class SphereMeanSolver {
 public:
  SphereMeanSolver(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights,
                   const SolverSettings& settings)
      : pts_(points), settings_(settings) {
    const double wsum = weights.sum();
    if (wsum <= 0) throw std::invalid_argument("sphere mean: weight sum must be positive");
    w_ = weights / wsum;
    const auto n = points.cols();
    dots_.resize(n);
    dist_.resize(n);
    coef_.resize(n);
  }

  SphereSolveResult solve() {
    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd avg = pts_ * w_;
    if (avg.norm() >= 1e-12) starts.push_back(avg.normalized());

    // Restart candidates: data points with the largest |w|.
    const int extra = std::min<int>(settings_.restarts, static_cast<int>(pts_.cols()));
    const int wanted = starts.empty() ? std::max(extra, 1) : extra;
    if (wanted > 0) {
      std::vector<int> order(static_cast<std::size_t>(pts_.cols()));
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + wanted, order.end(),
                        [&](int a, int b) { return std::abs(w_[a]) > std::abs(w_[b]); });
      for (int k = 0; k < wanted; ++k) starts.push_back(pts_.col(order[static_cast<std::size_t>(k)]));
    }

    SphereSolveResult best;
    bool have = false;
    int total_iters = 0;
    for (const auto& start : starts) {
      SphereSolveResult r = descend(start);
      total_iters += r.iterations;
      if (!have || r.objective < best.objective) {
        best = r;
        have = true;
      }
    }
    best.iterations = total_iters;
    return best;
  }

 private:
  // Gradient norms below this cannot be certified against objective noise.
  static double numerical_floor(double f) { return 1e-6 * (1.0 + std::abs(f)); }

  // Objective at omega; fills dots_/dist_ for a later gradient call.
  double evaluate(const Eigen::VectorXd& omega) {
    dots_.noalias() = pts_.transpose() * omega;
    double obj = 0;
    for (Eigen::Index j = 0; j < dots_.size(); ++j) {
      const double u = std::clamp(dots_[j], -1.0, 1.0);
      const double d = std::acos(u);
      if (d > M_PI - 1e-8)
        throw SolverError("sphere mean: antipodal pair encountered (degenerate geometry)");
      dots_[j] = u;
      dist_[j] = d;
      obj += w_[j] * d * d;
    }
    return obj;
  }

  // Riemannian gradient at the point of the last evaluate().
  void gradient(const Eigen::VectorXd& omega, Eigen::VectorXd& grad) {
    for (Eigen::Index j = 0; j < dots_.size(); ++j) {
      const double d = dist_[j];
      const double factor = d < 1e-8 ? 1.0 + d * d / 6.0 : d / std::sin(d);
      coef_[j] = w_[j] * factor;
    }
    grad.noalias() = pts_ * coef_;
    grad -= coef_.dot(dots_) * omega;
    grad *= -2.0;
  }

  SphereSolveResult descend(const Eigen::VectorXd& start) {
    SphereSolveResult out;
    Eigen::VectorXd omega = start;
    Eigen::VectorXd grad(omega.size()), prev_grad(omega.size()), candidate(omega.size());
    double f = evaluate(omega);
    gradient(omega, grad);
    double step = 1.0;

    for (int iter = 0; iter < settings_.max_iter; ++iter) {
      const double g2 = grad.squaredNorm();
      if (std::sqrt(g2) < settings_.tol) {
        out.converged = true;
        break;
      }
      ++out.iterations;

      double t = step;
      bool accepted = false;
      double f_new = f;
      for (int bt = 0; bt < 64; ++bt) {
        candidate = omega - t * grad;
        const double norm = candidate.norm();
        if (norm < 1e-14) {
          t *= 0.5;
          continue;
        }
        candidate /= norm;
        f_new = evaluate(candidate);
        if (f_new <= f - 1e-4 * t * g2) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        evaluate(omega);  // restore caches for the final objective/gradient
        out.converged = std::sqrt(g2) <= numerical_floor(f);
        break;
      }
      // Barzilai-Borwein trial step for the next iteration; a fixed trial
      // step crawls here because the curvature sits near 2/sum(w).
      const Eigen::VectorXd displacement = candidate - omega;
      omega = candidate;
      prev_grad = grad;
      gradient(omega, grad);
      if (f - f_new <= 1e-17 * (1.0 + std::abs(f))) {
        // The objective cannot decrease by a representable amount; the
        // iterate is optimal at double resolution.
        f = f_new;
        out.converged = std::sqrt(grad.squaredNorm()) <= numerical_floor(f);
        break;
      }
      f = f_new;
      const double sy = displacement.dot(grad - prev_grad);
      step = sy > 1e-300 ? displacement.squaredNorm() / sy : t * 2.0;
      step = std::clamp(step, 1e-12, 1e6);
    }

    out.point = omega;
    out.objective = f;
    return out;
  }

  const Eigen::MatrixXd& pts_;
  SolverSettings settings_;
  Eigen::VectorXd w_;
  Eigen::VectorXd dots_, dist_, coef_;
};

}  // namespace detail
}  // namespace frechet
