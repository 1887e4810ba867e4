#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "frechet/regression.hpp"
#include "frechet/rng.hpp"

namespace frechet {

enum class TestKind { Global, Partial };

inline const char* test_kind_name(TestKind k) { return k == TestKind::Global ? "global" : "partial"; }

/// Randomization setup. The multiplier law is fixed to Normal(1, 1/2)
/// (mean 1, variance 1/2); `weights` are the Cauchy combination weights
/// c_k (empty means equal 1/K).
struct MultiplierConfig {
  int K = 50;
  Eigen::VectorXd weights;  // length K, nonnegative, sums to 1; empty -> 1/K each
  std::uint64_t seed = 0;

  Eigen::VectorXd resolved_weights() const {
    if (weights.size() == 0)
      return Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
    return weights;
  }

  void check() const {
    if (K < 1) throw std::invalid_argument("multiplier config: K must be >= 1");
    if (weights.size() != 0) {
      if (weights.size() != K) throw std::invalid_argument("multiplier config: weight length != K");
      if (weights.minCoeff() < 0) throw std::invalid_argument("multiplier config: negative weight");
      if (std::abs(weights.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("multiplier config: weights must sum to 1");
    }
  }
};

struct TestDiagnostics {
  int nonconverged = 0;
  bool degenerate = false;
};

struct TestReport {
  TestKind kind = TestKind::Global;
  double r_squared = 0;
  Eigen::VectorXd z_scores;  // sqrt(n) T_k / sigma_hat, k = 1..K
  double cauchy_stat = 0;
  double p_value = 1;
  double sigma_hat = 0;
  Eigen::Index n = 0;
  TestDiagnostics diagnostics;
};

/// Global Frechet R-squared: 1 - sum(b) / sum(a). Constant responses
/// (sum(a) ~ 0) yield 0; solver jitter up to -1e-10 is clamped.
inline double r_squared_global(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("r_squared: length mismatch");
  const double denom = a.sum();
  if (denom < 1e-14) return 0.0;
  double value = 1.0 - b.sum() / denom;
  if (value < 0) {
    if (value < -1e-10)
      throw SolverError("r_squared: negative value " + std::to_string(value) +
                        " indicates a poor minimizer");
    value = 0.0;
  }
  return std::min(value, 1.0);
}

/// Partial Frechet R-squared: same ratio with the base-model objective c
/// in place of the Frechet-mean objective a.
inline double r_squared_partial(const Eigen::VectorXd& c, const Eigen::VectorXd& b) {
  return r_squared_global(c, b);
}

/// Perturbed statistic: mean(phi .* upper) - mean(psi .* b), where `upper`
/// is a (global test) or c (partial test).
inline double randomized_statistic(const Eigen::VectorXd& upper, const Eigen::VectorXd& b,
                                   const Eigen::VectorXd& phi, const Eigen::VectorXd& psi) {
  if (upper.size() != b.size() || phi.size() != b.size() || psi.size() != b.size())
    throw std::invalid_argument("randomized_statistic: length mismatch");
  const double n = static_cast<double>(b.size());
  return phi.dot(upper) / n - psi.dot(b) / n;
}

/// sigma_hat = sqrt(mean of b_i^2).
inline double sigma_hat(const Eigen::VectorXd& b) {
  if (b.size() == 0) throw std::invalid_argument("sigma_hat: empty input");
  return std::sqrt(b.squaredNorm() / static_cast<double>(b.size()));
}

struct CauchyCombined {
  double stat = 0;
  double p_value = 1;
};

/// Cauchy combination: C = sum_k c_k tan{(2 Phi(|z_k|) - 3/2) pi}, with a
/// two-sided p-value 1 - (2/pi) atan(|C|) from the standard Cauchy limit.
/// Phi(|z|) is clamped inside (1/2, 1) to keep the tangent finite.
inline CauchyCombined cauchy_combine(const Eigen::VectorXd& z_scores, const Eigen::VectorXd& weights) {
  if (z_scores.size() != weights.size()) throw std::invalid_argument("cauchy_combine: length mismatch");
  if (!z_scores.allFinite()) throw std::invalid_argument("cauchy_combine: non-finite z-score");
  double stat = 0;
  for (Eigen::Index k = 0; k < z_scores.size(); ++k) {
    double phi = normal_cdf(std::abs(z_scores[k]));
    phi = std::min(phi, 1.0 - 1e-16);
    phi = std::max(phi, 0.5 + 1e-16);
    stat += weights[k] * std::tan((2.0 * phi - 1.5) * M_PI);
  }
  CauchyCombined out;
  out.stat = stat;
  out.p_value = 1.0 - 2.0 / M_PI * std::atan(std::abs(stat));
  return out;
}

namespace detail {

inline TestReport run_multiplier_test(TestKind kind, const Eigen::VectorXd& upper,
                                      const Eigen::VectorXd& b, int nonconverged, double scale,
                                      const MultiplierConfig& cfg) {
  cfg.check();
  const Eigen::Index n = b.size();
  TestReport report;
  report.kind = kind;
  report.n = n;
  report.r_squared = kind == TestKind::Global ? r_squared_global(upper, b) : r_squared_partial(upper, b);
  report.sigma_hat = sigma_hat(b);
  report.diagnostics.nonconverged = nonconverged;

  // sigma_hat at the cancellation floor of the squared-distance kernels
  // means the responses are constant at double resolution.
  if (report.sigma_hat <= 1e-13 * scale) {
    // Constant responses: no evidence against constancy by construction.
    report.diagnostics.degenerate = true;
    report.z_scores = Eigen::VectorXd::Zero(cfg.K);
    report.cauchy_stat = 0;
    report.p_value = 1;
    return report;
  }

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double mult_sd = std::sqrt(0.5);
  Eigen::VectorXd z(cfg.K), phi(n), psi(n);
  RandomStream root(cfg.seed);
  for (int k = 0; k < cfg.K; ++k) {
    RandomStream stream = root.child(static_cast<std::uint64_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) phi[i] = 1.0 + mult_sd * stream.normal();
    for (Eigen::Index i = 0; i < n; ++i) psi[i] = 1.0 + mult_sd * stream.normal();
    z[k] = sqrt_n * randomized_statistic(upper, b, phi, psi) / report.sigma_hat;
  }
  report.z_scores = z;
  const auto combined = cauchy_combine(z, cfg.resolved_weights());
  report.cauchy_stat = combined.stat;
  report.p_value = combined.p_value;
  return report;
}

}  // namespace detail

/// Test of the global regression effect (H0: the regression function is
/// constant). The objective vectors a, b and sigma_hat are computed once
/// and shared across the K randomizations.
inline TestReport test_global(const Dataset& data, const MultiplierConfig& cfg, int threads = 1) {
  const RegressionModel full = fit(data);
  const ObjectiveMatrix om = objective_matrix(full, nullptr, data, threads);
  return detail::run_multiplier_test(TestKind::Global, om.a, om.b, om.nonconverged, om.scale, cfg);
}

/// Test of the partial effect of the predictors outside `base_subset`
/// (H0: the full regression function equals the base one).
inline TestReport test_partial(const Dataset& data, const std::vector<int>& base_subset,
                               const MultiplierConfig& cfg, int threads = 1) {
  if (base_subset.empty()) throw std::invalid_argument("test_partial: empty base subset");
  if (static_cast<Eigen::Index>(base_subset.size()) >= data.p())
    throw std::invalid_argument("test_partial: base subset must be a proper subset");
  const RegressionModel full = fit(data);
  const RegressionModel base = fit(data, base_subset);
  const ObjectiveMatrix om = objective_matrix(full, &base, data, threads);
  return detail::run_multiplier_test(TestKind::Partial, om.c, om.b, om.nonconverged, om.scale, cfg);
}

}  // namespace frechet
