#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "frechet/parallel.hpp"
#include "frechet/spaces.hpp"

namespace frechet {

/// Paired sample (X_j, Y_j) with the response space. Validated once at
/// construction; treated as immutable afterwards.
struct Dataset {
  Eigen::MatrixXd X;  // n x p predictors
  std::vector<ObjectPoint> Y;
  SpaceHandle space;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

inline Dataset make_dataset(Eigen::MatrixXd X, std::vector<ObjectPoint> Y, SpaceHandle space) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (static_cast<Eigen::Index>(Y.size()) != n)
    throw std::invalid_argument("dataset: X rows and Y length differ");
  if (n < p + 2) throw std::invalid_argument("dataset: need n >= p + 2");
  if (!X.allFinite()) throw std::invalid_argument("dataset: non-finite predictor entry");
  for (std::size_t i = 0; i < Y.size(); ++i)
    if (auto err = validate(space, Y[i]))
      throw std::invalid_argument("dataset: invalid response at row " + std::to_string(i) + ": " + *err);

  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (lmin <= 0 || lmax / lmin > 1e12)
    throw std::invalid_argument("dataset: predictor covariance is ill-conditioned");
  return Dataset{std::move(X), std::move(Y), space};
}

/// Fitted state of a global (or base) Frechet regression. Global Frechet
/// regression is a lazy estimator: the model keeps only the predictor
/// moments plus a pointer to the training data, and every prediction
/// solves a weighted mean.
struct RegressionModel {
  std::vector<int> subset;   // predictor columns used, in order
  Eigen::VectorXd xbar;      // mean over the subset columns
  Eigen::MatrixXd sigma_inv; // inverse covariance (denominator n) of the subset
  const Dataset* data = nullptr;
};

inline std::vector<int> all_columns(const Dataset& data) {
  std::vector<int> cols(static_cast<std::size_t>(data.p()));
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);
  return cols;
}

inline RegressionModel fit(const Dataset& data, const std::vector<int>& subset) {
  if (subset.empty()) throw std::invalid_argument("fit: empty predictor subset");
  std::set<int> seen;
  for (int c : subset) {
    if (c < 0 || c >= data.p()) throw std::invalid_argument("fit: predictor index out of range");
    if (!seen.insert(c).second) throw std::invalid_argument("fit: duplicate predictor index");
  }

  const Eigen::Index n = data.n();
  const Eigen::Index k = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd Xs(n, k);
  for (Eigen::Index j = 0; j < k; ++j) Xs.col(j) = data.X.col(subset[static_cast<std::size_t>(j)]);

  RegressionModel model;
  model.subset = subset;
  model.xbar = Xs.colwise().mean();
  const Eigen::MatrixXd centered = Xs.rowwise() - model.xbar.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin <= 0 || eig.eigenvalues().maxCoeff() / lmin > 1e12)
    throw std::invalid_argument("fit: singular predictor covariance");
  model.sigma_inv =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  model.data = &data;
  return model;
}

inline RegressionModel fit(const Dataset& data) { return fit(data, all_columns(data)); }

/// Frechet regression weights s_j(x) = 1 + (X_j - xbar)' Sigma^{-1} (x - xbar).
/// They average to 1 by construction and may be negative.
inline Eigen::VectorXd weights_at(const RegressionModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.xbar.size()) throw std::invalid_argument("weights_at: dimension mismatch");
  const Dataset& data = *model.data;
  const Eigen::Index n = data.n();
  Eigen::MatrixXd Xs(n, static_cast<Eigen::Index>(model.subset.size()));
  for (std::size_t j = 0; j < model.subset.size(); ++j)
    Xs.col(static_cast<Eigen::Index>(j)) = data.X.col(model.subset[j]);
  const Eigen::VectorXd dir = model.sigma_inv * (x - model.xbar);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n) + (Xs.rowwise() - model.xbar.transpose()) * dir;
  // The centering makes the weights average to 1 identically.
  if (std::abs(w.mean() - 1.0) > 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff()))
    throw std::logic_error("weights_at: weights failed to average to 1");
  return w;
}

inline MeanResult predict_detail(const RegressionModel& model, const Eigen::VectorXd& x) {
  return weighted_frechet_mean(model.data->space, model.data->Y, weights_at(model, x));
}

inline ObjectPoint predict(const RegressionModel& model, const Eigen::VectorXd& x) {
  return predict_detail(model, x).point;
}

inline MeanResult frechet_mean_detail(const Dataset& data) {
  return weighted_frechet_mean(data.space, data.Y, Eigen::VectorXd::Ones(data.n()));
}

inline ObjectPoint frechet_mean(const Dataset& data) { return frechet_mean_detail(data).point; }

/// Per-observation values of the empirical objective M_n(., X_i), with
/// full-model weights inside M_n for all three terms:
///   a_i = M_n(frechet mean, X_i)
///   b_i = M_n(full-model prediction at X_i, X_i)
///   c_i = M_n(base-model prediction at X_i1, X_i)   (when a base model is given)
struct ObjectiveMatrix {
  Eigen::VectorXd a, b, c;
  bool has_base = false;
  int nonconverged = 0;
  double scale = 1.0;  // max squared data magnitude; floor for degeneracy checks
};

namespace detail {

inline Eigen::MatrixXd weight_matrix(const RegressionModel& model) {
  const Dataset& data = *model.data;
  const Eigen::Index n = data.n();
  Eigen::MatrixXd Xs(n, static_cast<Eigen::Index>(model.subset.size()));
  for (std::size_t j = 0; j < model.subset.size(); ++j)
    Xs.col(static_cast<Eigen::Index>(j)) = data.X.col(model.subset[j]);
  const Eigen::MatrixXd centered = Xs.rowwise() - model.xbar.transpose();
  // S(i, j) = s_j(X_i)
  return Eigen::MatrixXd::Ones(n, n) + centered * model.sigma_inv * centered.transpose();
}

// Prediction at every training point, packed one column per observation.
inline Eigen::MatrixXd predict_at_training(const RegressionModel& model, const Eigen::MatrixXd& packed,
                                           const Eigen::MatrixXd& S, int threads, int& nonconverged) {
  const Dataset& data = *model.data;
  const Eigen::Index n = data.n();
  Eigen::MatrixXd out(packed.rows(), n);
  std::atomic<int> bad{0};
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    auto r = weighted_mean_packed(data.space, packed, S.row(static_cast<Eigen::Index>(i)).transpose());
    out.col(static_cast<Eigen::Index>(i)) = r.col;
    if (!r.converged) bad.fetch_add(1);
  });
  nonconverged += bad.load();
  return out;
}

}  // namespace detail

inline ObjectiveMatrix objective_matrix(const RegressionModel& full, const RegressionModel* base,
                                        const Dataset& data, int threads = 1) {
  if (full.data != &data || (base && base->data != &data))
    throw std::invalid_argument("objective_matrix: model/data mismatch");
  const Eigen::Index n = data.n();
  const Eigen::MatrixXd packed = detail::pack_points(data.space, std::span<const ObjectPoint>(data.Y.data(), data.Y.size()));
  const Eigen::MatrixXd S = detail::weight_matrix(full);

  ObjectiveMatrix out;
  out.scale = std::max(1.0, packed.colwise().squaredNorm().maxCoeff());

  auto mean = detail::weighted_mean_packed(data.space, packed, Eigen::VectorXd::Ones(n));
  if (!mean.converged) ++out.nonconverged;
  Eigen::VectorXd d0(n);
  for (Eigen::Index j = 0; j < n; ++j)
    d0[j] = detail::squared_distance_cols(data.space, mean.col, packed.col(j));
  out.a = S * d0 / static_cast<double>(n);

  const Eigen::MatrixXd fitted = detail::predict_at_training(full, packed, S, threads, out.nonconverged);
  const Eigen::MatrixXd Df = detail::squared_distance_matrix(data.space, fitted, packed);
  out.b = (S.array() * Df.array()).rowwise().sum() / static_cast<double>(n);

  if (base) {
    const Eigen::MatrixXd Sbase = detail::weight_matrix(*base);
    const Eigen::MatrixXd base_fit = detail::predict_at_training(*base, packed, Sbase, threads, out.nonconverged);
    const Eigen::MatrixXd Db = detail::squared_distance_matrix(data.space, base_fit, packed);
    out.c = (S.array() * Db.array()).rowwise().sum() / static_cast<double>(n);
    out.has_base = true;
  }
  return out;
}

}  // namespace frechet
