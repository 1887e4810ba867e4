#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <vector>

#include "frechet/inference.hpp"
#include "frechet/laplacian.hpp"
#include "frechet/parallel.hpp"
#include "frechet/regression.hpp"
#include "frechet/rng.hpp"

namespace frechet::sim {

enum class SimSpace { Network, Sphere };

inline const char* sim_space_name(SimSpace s) { return s == SimSpace::Network ? "network" : "sphere"; }

/// Weighted stochastic block model with two communities and edge weights
/// Unif(s(X) - W, s(X) + W), s(x) = alpha0 + beta x1 + gamma x2.
struct NetworkSimConfig {
  int n = 300;
  int m = 10;
  int m1 = 0;  // community-1 size; 0 means ceil(m/2)
  double p11 = 0.9, p22 = 0.9, p12 = 0.7;
  double alpha0 = 1.0, beta = 0.0, gamma = 0.0;
  double C = 2.0;  // bound on alpha0 + beta + gamma; edge weights stay below C + 1

  int community_size() const { return m1 > 0 ? m1 : (m + 1) / 2; }

  void check() const {
    const int c1 = community_size();
    if (m < 2 || c1 < 1 || c1 >= m)
      throw std::invalid_argument("network sim: need 1 <= m1 < m");
    for (double p : {p11, p22, p12})
      if (p < 0 || p > 1) throw std::invalid_argument("network sim: block probability outside [0,1]");
    const double s_max = alpha0 + beta + gamma;
    if (s_max < 1.0 || s_max > C)
      throw std::invalid_argument("network sim: need 1 <= alpha0 + beta + gamma <= C");
    if (n < 4) throw std::invalid_argument("network sim: need n >= 4");
  }

  SpaceHandle space() const { return SpaceHandle::laplacian(m, C + 1.0); }

  double block_probability(int i, int j) const {
    const int c1 = community_size();
    const bool fi = i < c1, fj = j < c1;
    if (fi && fj) return p11;
    if (!fi && !fj) return p22;
    return p12;
  }
};

/// Tangent-noise model on the unit sphere around
/// m(x) = (sin h, cos h cos phi, cos h sin phi), h(x) = alpha0 + beta x1 + gamma x2.
struct SphereSimConfig {
  int n = 300;
  double alpha0 = M_PI / 6, beta = 0.0, gamma = 0.0;
  double phi = M_PI / 4;
  double sigma = 0.25;

  void check() const {
    if (alpha0 <= 0) throw std::invalid_argument("sphere sim: alpha0 must be positive");
    const double h_max = alpha0 + beta + gamma;
    if (h_max <= 0 || h_max >= M_PI / 2)
      throw std::invalid_argument("sphere sim: need 0 < alpha0 + beta + gamma < pi/2");
    if (phi <= 0 || phi >= M_PI / 2) throw std::invalid_argument("sphere sim: need 0 < phi < pi/2");
    if (sigma <= 0 || sigma * std::sqrt(2.0) >= M_PI)
      throw std::invalid_argument("sphere sim: noise can reach the injectivity radius");
    if (n < 4) throw std::invalid_argument("sphere sim: need n >= 4");
  }

  SpaceHandle space() const { return SpaceHandle::sphere(3); }
};

namespace detail_sim {

inline Eigen::Matrix3d latent_cholesky(double a12) {
  Eigen::Matrix3d S;
  S << 1.0, a12, 0.5, a12, 1.0, 0.5, 0.5, 0.5, 1.0;
  return Eigen::LLT<Eigen::Matrix3d>(S).matrixL();
}

// (X1, X2, W) = (Phi(V1), Phi(V2), Phi(V3)) with V trivariate normal.
inline Eigen::Vector3d draw_latent(RandomStream& rng, const Eigen::Matrix3d& chol) {
  Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
  Eigen::Vector3d v = chol * z;
  return {normal_cdf(v[0]), normal_cdf(v[1]), normal_cdf(v[2])};
}

}  // namespace detail_sim

/// One network response at fixed predictors and latent effect. Draw order:
/// q Bernoulli masks (vech order), then q edge-weight uniforms.
inline Laplacian gen_network_response(const NetworkSimConfig& cfg, double x1, double x2, double w,
                                      RandomStream& rng) {
  const int q = vech_length(cfg.m);
  const double s = cfg.alpha0 + cfg.beta * x1 + cfg.gamma * x2;
  std::vector<bool> mask(static_cast<std::size_t>(q));
  int e = 0;
  for (int i = 0; i < cfg.m; ++i)
    for (int j = i + 1; j < cfg.m; ++j) mask[static_cast<std::size_t>(e++)] = rng.bernoulli(cfg.block_probability(i, j));
  Eigen::VectorXd off(q);
  for (int k = 0; k < q; ++k) {
    const double g = s + w * (2.0 * rng.uniform() - 1.0);
    off[k] = mask[static_cast<std::size_t>(k)] ? -g : 0.0;
  }
  return Laplacian{vech_inverse(off, cfg.m)};
}

inline Dataset gen_network_sample(const NetworkSimConfig& cfg, RandomStream& rng) {
  cfg.check();
  const SpaceHandle space = cfg.space();
  const Eigen::Matrix3d chol = detail_sim::latent_cholesky(0.5);
  Eigen::MatrixXd X(cfg.n, 2);
  std::vector<ObjectPoint> Y;
  Y.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    const Eigen::Vector3d latent = detail_sim::draw_latent(rng, chol);
    X(i, 0) = latent[0];
    X(i, 1) = latent[1];
    Y.push_back(gen_network_response(cfg, latent[0], latent[1], latent[2], rng));
  }
  return make_dataset(std::move(X), std::move(Y), space);
}

/// Population regression function: Lambda .* vech^{-1}(-s(x), ..., -s(x)),
/// with the diagonal completed to zero row sums.
inline Laplacian network_regression_target(const NetworkSimConfig& cfg, double x1, double x2) {
  const double s = cfg.alpha0 + cfg.beta * x1 + cfg.gamma * x2;
  Eigen::VectorXd off(vech_length(cfg.m));
  int e = 0;
  for (int i = 0; i < cfg.m; ++i)
    for (int j = i + 1; j < cfg.m; ++j) off[e++] = -cfg.block_probability(i, j) * s;
  return Laplacian{vech_inverse(off, cfg.m)};
}

inline Eigen::Vector3d sphere_regression_target(const SphereSimConfig& cfg, double x1, double x2) {
  const double h = cfg.alpha0 + cfg.beta * x1 + cfg.gamma * x2;
  return {std::sin(h), std::cos(h) * std::cos(cfg.phi), std::cos(h) * std::sin(cfg.phi)};
}

/// One spherical response; draws two Beta(1/2,1/2) variables for the
/// tangent coordinates and pushes the perturbation through the exponential
/// map at m(x).
inline SpherePoint gen_sphere_response(const SphereSimConfig& cfg, double x1, double x2, double w,
                                       RandomStream& rng) {
  const double h = cfg.alpha0 + cfg.beta * x1 + cfg.gamma * x2;
  const Eigen::Vector3d target = sphere_regression_target(cfg, x1, x2);
  const Eigen::Vector3d nu1(0.0, -std::sin(cfg.phi), std::cos(cfg.phi));
  const Eigen::Vector3d nu2(std::cos(h), -std::sin(h) * std::cos(cfg.phi), -std::sin(h) * std::sin(cfg.phi));
  if (std::abs(nu1.dot(nu2)) > 1e-12 || std::abs(nu1.dot(target)) > 1e-12 ||
      std::abs(nu2.dot(target)) > 1e-12 || std::abs(nu1.norm() - 1.0) > 1e-12 ||
      std::abs(nu2.norm() - 1.0) > 1e-12)
    throw std::logic_error("sphere sim: tangent basis not orthonormal");
  const double e1 = cfg.sigma * (2.0 * rng.beta_half_half() - 1.0);
  const double e2 = cfg.sigma * (2.0 * rng.beta_half_half() - 1.0);
  const Eigen::Vector3d tangent = w * (e1 * nu1 + e2 * nu2);
  if (tangent.norm() >= M_PI)
    throw SolverError("sphere sim: perturbation reached the injectivity radius");
  return SpherePoint{exp_map(target, tangent)};
}

inline Dataset gen_sphere_sample(const SphereSimConfig& cfg, RandomStream& rng) {
  cfg.check();
  const SpaceHandle space = cfg.space();
  const Eigen::Matrix3d chol = detail_sim::latent_cholesky(0.0);
  Eigen::MatrixXd X(cfg.n, 2);
  std::vector<ObjectPoint> Y;
  Y.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    const Eigen::Vector3d latent = detail_sim::draw_latent(rng, chol);
    X(i, 0) = latent[0];
    X(i, 1) = latent[1];
    Y.push_back(gen_sphere_response(cfg, latent[0], latent[1], latent[2], rng));
  }
  return make_dataset(std::move(X), std::move(Y), space);
}

struct PowerCell {
  double beta = 0, gamma = 0;
  int n = 0;
};

struct PowerCellResult {
  PowerCell cell;
  double rate = 0, se = 0, mean_p = 0;
  int B = 0;
  int failures = 0;
  int nonconverged = 0;
};

struct PowerStudyResult {
  TestKind kind = TestKind::Global;
  SimSpace space = SimSpace::Network;
  double alpha = 0.05;
  int K = 50;
  std::uint64_t seed = 0;
  std::vector<PowerCellResult> cells;
};

struct PowerStudyConfig {
  TestKind kind = TestKind::Global;
  SimSpace space = SimSpace::Network;
  NetworkSimConfig network;
  SphereSimConfig sphere;
  std::vector<PowerCell> cells;
  std::vector<int> base_subset{0};  // partial tests only
  int B = 500;
  double alpha = 0.05;
  int K = 50;
  std::uint64_t seed = 1;
  int threads = 0;
};

namespace detail_sim {

inline std::uint64_t cell_key(const PowerCell& cell) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(cell.n));
  std::uint64_t bits;
  static_assert(sizeof(double) == sizeof(std::uint64_t));
  std::memcpy(&bits, &cell.beta, sizeof(bits));
  h = mix64(h ^ bits);
  std::memcpy(&bits, &cell.gamma, sizeof(bits));
  h = mix64(h ^ bits);
  return h;
}

}  // namespace detail_sim

/// Monte Carlo size/power study. Replications are keyed by (cell content,
/// replicate index), so results are reproducible under a fixed seed and
/// independent of the thread count. A replication whose solve throws is
/// recorded as a failure and excluded from the rate.
inline PowerStudyResult run_power_study(const PowerStudyConfig& cfg) {
  PowerStudyResult result;
  result.kind = cfg.kind;
  result.space = cfg.space;
  result.alpha = cfg.alpha;
  result.K = cfg.K;
  result.seed = cfg.seed;

  for (const PowerCell& cell : cfg.cells) {
    const std::uint64_t cell_seed = derive_seed(cfg.seed, detail_sim::cell_key(cell));
    std::vector<double> p_values(static_cast<std::size_t>(cfg.B),
                                 std::numeric_limits<double>::quiet_NaN());
    std::vector<int> nonconv(static_cast<std::size_t>(cfg.B), 0);

    parallel_for(static_cast<std::size_t>(cfg.B), cfg.threads, [&](std::size_t rep) {
      RandomStream stream(derive_seed(cell_seed, rep));
      RandomStream gen = stream.child(0);
      MultiplierConfig mcfg;
      mcfg.K = cfg.K;
      mcfg.seed = stream.child_seed(1);
      try {
        TestReport report;
        if (cfg.space == SimSpace::Network) {
          NetworkSimConfig net = cfg.network;
          net.beta = cell.beta;
          net.gamma = cell.gamma;
          net.n = cell.n > 0 ? cell.n : net.n;
          const Dataset data = gen_network_sample(net, gen);
          report = cfg.kind == TestKind::Global ? test_global(data, mcfg)
                                                : test_partial(data, cfg.base_subset, mcfg);
        } else {
          SphereSimConfig sph = cfg.sphere;
          sph.beta = cell.beta;
          sph.gamma = cell.gamma;
          sph.n = cell.n > 0 ? cell.n : sph.n;
          const Dataset data = gen_sphere_sample(sph, gen);
          report = cfg.kind == TestKind::Global ? test_global(data, mcfg)
                                                : test_partial(data, cfg.base_subset, mcfg);
        }
        p_values[rep] = report.p_value;
        nonconv[rep] = report.diagnostics.nonconverged;
      } catch (const SolverError&) {
        p_values[rep] = std::numeric_limits<double>::quiet_NaN();
      }
    });

    PowerCellResult out;
    out.cell = cell;
    out.B = cfg.B;
    int ok = 0, reject = 0;
    double p_sum = 0;
    for (std::size_t r = 0; r < p_values.size(); ++r) {
      if (std::isnan(p_values[r])) {
        ++out.failures;
        continue;
      }
      ++ok;
      p_sum += p_values[r];
      if (p_values[r] <= cfg.alpha) ++reject;
      out.nonconverged += nonconv[r];
    }
    if (ok > 0) {
      out.rate = static_cast<double>(reject) / ok;
      out.se = std::sqrt(out.rate * (1.0 - out.rate) / ok);
      out.mean_p = p_sum / ok;
    }
    result.cells.push_back(out);
  }
  return result;
}

}  // namespace frechet::sim
