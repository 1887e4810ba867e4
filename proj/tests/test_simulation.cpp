#include <catch2/catch_amalgamated.hpp>

#include "frechet/presets.hpp"
#include "frechet/simulation.hpp"
#include "support/oracles.hpp"

using namespace frechet;
using namespace frechet::sim;

TEST_CASE("network generator") {
  SECTION("with W = 0 and no effects, entries are -alpha0 times the mask") {
    RandomStream rng(5);
    NetworkSimConfig cfg;
    cfg.m = 5;
    cfg.alpha0 = 1.0;
    for (int rep = 0; rep < 20; ++rep) {
      const Laplacian G = gen_network_response(cfg, 0.3, 0.7, 0.0, rng);
      for (int i = 0; i < cfg.m; ++i)
        for (int j = i + 1; j < cfg.m; ++j) {
          const double g = G.value(i, j);
          REQUIRE((g == 0.0 || g == Catch::Approx(-1.0)));
        }
    }
  }

  SECTION("every generated response is a valid Laplacian") {
    RandomStream rng(6);
    NetworkSimConfig cfg;
    cfg.n = 50;
    cfg.m = 7;
    cfg.beta = 0.2;
    cfg.gamma = 0.1;
    const Dataset data = gen_network_sample(cfg, rng);
    for (const auto& y : data.Y) REQUIRE(!validate(data.space, y));
  }

  SECTION("m = 2 single-edge networks are supported") {
    RandomStream rng(61);
    NetworkSimConfig cfg;
    cfg.n = 30;
    cfg.m = 2;
    const Dataset data = gen_network_sample(cfg, rng);
    REQUIRE(data.space.dim == 2);
    for (const auto& y : data.Y) REQUIRE(!validate(data.space, y));
  }

  SECTION("vech means follow the regression target at fixed predictors") {
    // E[vech entry] = -s(x) p_block for any latent W; W only moves the spread.
    RandomStream rng(7);
    NetworkSimConfig cfg;
    cfg.m = 4;
    cfg.beta = 0.3;
    cfg.gamma = 0.2;
    const double x1 = 0.25, x2 = 0.75;
    const int reps = 100000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(vech_length(cfg.m));
    Eigen::VectorXd mean2 = Eigen::VectorXd::Zero(vech_length(cfg.m));
    for (int r = 0; r < reps; ++r) {
      const Laplacian G = gen_network_response(cfg, x1, x2, rng.uniform(), rng);
      const Eigen::VectorXd v = vech(G.value);
      mean += v;
      mean2 += v.cwiseProduct(v);
    }
    mean /= reps;
    mean2 /= reps;
    const Eigen::VectorXd target = vech(network_regression_target(cfg, x1, x2).value);
    for (int e = 0; e < mean.size(); ++e) {
      const double se = std::sqrt((mean2[e] - mean[e] * mean[e]) / reps);
      REQUIRE(std::abs(mean[e] - target[e]) < 3.0 * se + 1e-12);
    }
  }

  SECTION("infeasible configurations are rejected") {
    NetworkSimConfig cfg;
    cfg.alpha0 = 0.5;  // alpha0 + beta + gamma < 1
    REQUIRE_THROWS_AS(cfg.check(), std::invalid_argument);
    NetworkSimConfig over;
    over.alpha0 = 1.0;
    over.beta = 3.0;  // exceeds C
    REQUIRE_THROWS_AS(over.check(), std::invalid_argument);
    NetworkSimConfig bad_m1;
    bad_m1.m1 = 10;
    bad_m1.m = 5;
    REQUIRE_THROWS_AS(bad_m1.check(), std::invalid_argument);
  }
}

TEST_CASE("sphere generator") {
  SECTION("zero noise returns the regression function exactly") {
    RandomStream rng(9);
    SphereSimConfig cfg;
    cfg.beta = 0.15;
    cfg.gamma = 0.05;
    const SpherePoint u = gen_sphere_response(cfg, 0.4, 0.6, 0.0, rng);
    const Eigen::Vector3d target = sphere_regression_target(cfg, 0.4, 0.6);
    REQUIRE((u.value - target).norm() < 1e-15);
  }

  SECTION("no effects and zero noise give a constant response") {
    RandomStream rng(10);
    SphereSimConfig cfg;
    const Eigen::Vector3d expected(std::sin(cfg.alpha0), std::cos(cfg.alpha0) * std::cos(cfg.phi),
                                   std::cos(cfg.alpha0) * std::sin(cfg.phi));
    for (int rep = 0; rep < 5; ++rep) {
      const SpherePoint u = gen_sphere_response(cfg, rng.uniform(), rng.uniform(), 0.0, rng);
      REQUIRE((u.value - expected).norm() < 1e-15);
    }
  }

  SECTION("responses are unit vectors") {
    RandomStream rng(11);
    SphereSimConfig cfg;
    cfg.n = 200;
    cfg.beta = 0.1;
    cfg.gamma = 0.1;
    const Dataset data = gen_sphere_sample(cfg, rng);
    for (const auto& y : data.Y) REQUIRE(!validate(data.space, y));
  }

  SECTION("empirical Frechet mean at fixed x is close to the target") {
    RandomStream rng(12);
    SphereSimConfig cfg;
    cfg.beta = 0.2;
    const double x1 = 0.3, x2 = 0.8;
    const int reps = 100000;
    std::vector<ObjectPoint> draws;
    draws.reserve(reps);
    const Eigen::Matrix3d chol = sim::detail_sim::latent_cholesky(0.0);
    for (int r = 0; r < reps; ++r) {
      // Draw W from its conditional law given X = (x1, x2) via the latent normals.
      const Eigen::Vector3d latent = sim::detail_sim::draw_latent(rng, chol);
      draws.push_back(gen_sphere_response(cfg, x1, x2, latent[2], rng));
    }
    auto mean = weighted_frechet_mean(cfg.space(), draws,
                                      Eigen::VectorXd::Ones(static_cast<Eigen::Index>(draws.size())));
    const Eigen::Vector3d target = sphere_regression_target(cfg, x1, x2);
    REQUIRE(sphere_distance(std::get<SpherePoint>(mean.point).value, target) < 0.01);
  }

  SECTION("invalid configurations are rejected") {
    SphereSimConfig cfg;
    cfg.alpha0 = 1.2;
    cfg.beta = 0.5;  // sum exceeds pi/2
    REQUIRE_THROWS_AS(cfg.check(), std::invalid_argument);
    SphereSimConfig bad_sigma;
    bad_sigma.sigma = 3.0;
    REQUIRE_THROWS_AS(bad_sigma.check(), std::invalid_argument);
  }
}

TEST_CASE("latent marginals and dependence") {
  SECTION("X1, X2 are uniform and the latent correlation matches") {
    RandomStream rng(13);
    const int reps = 100000;
    for (double a12 : {0.5, 0.0}) {
      const Eigen::Matrix3d chol = sim::detail_sim::latent_cholesky(a12);
      std::vector<double> x1(reps), x2(reps);
      double cross = 0;
      for (int r = 0; r < reps; ++r) {
        const Eigen::Vector3d latent = sim::detail_sim::draw_latent(rng, chol);
        x1[r] = latent[0];
        x2[r] = latent[1];
        // Invert Phi by reusing the latent normals' correlation directly.
      }
      REQUIRE(testsupport::ks_to_uniform(x1) < 0.02);
      REQUIRE(testsupport::ks_to_uniform(x2) < 0.02);
      // Spearman-type check through the normal scores.
      double sum1 = 0, sum2 = 0, sq1 = 0, sq2 = 0;
      cross = 0;
      for (int r = 0; r < reps; ++r) {
        const double v1 = x1[r] - 0.5, v2 = x2[r] - 0.5;
        sum1 += v1;
        sum2 += v2;
        sq1 += v1 * v1;
        sq2 += v2 * v2;
        cross += v1 * v2;
      }
      const double corr = (cross / reps - sum1 * sum2 / reps / reps) /
                          std::sqrt((sq1 / reps - sum1 * sum1 / reps / reps) *
                                    (sq2 / reps - sum2 * sum2 / reps / reps));
      // Phi(V) correlation of bivariate normals: 6/pi asin(rho/2).
      const double expected = 6.0 / M_PI * std::asin(a12 / 2.0);
      REQUIRE(std::abs(corr - expected) < 0.02);
    }
  }

  SECTION("under the network null, responses still depend on X through W") {
    RandomStream rng(14);
    NetworkSimConfig cfg;
    cfg.n = 400;
    cfg.m = 6;
    const Dataset data = gen_network_sample(cfg, rng);
    Eigen::VectorXd mean_weight(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i)
      mean_weight[i] = -vech(std::get<Laplacian>(data.Y[i]).value).mean();
    // Mean edge weight spreads with W, and W is correlated with X1.
    const double dcor = testsupport::distance_correlation(data.X.col(0), mean_weight);
    REQUIRE(dcor > 0.03);
  }
}

TEST_CASE("run_power_study") {
  SECTION("deterministic and thread-count independent") {
    PowerStudyConfig cfg;
    cfg.kind = TestKind::Global;
    cfg.space = SimSpace::Network;
    cfg.network.m = 4;
    cfg.cells = {{0.0, 0.0, 40}, {0.3, 0.3, 40}};
    cfg.B = 20;
    cfg.K = 10;
    cfg.seed = 99;
    cfg.threads = 1;
    const PowerStudyResult serial = run_power_study(cfg);
    cfg.threads = 2;
    const PowerStudyResult parallel = run_power_study(cfg);
    REQUIRE(serial.cells.size() == parallel.cells.size());
    for (std::size_t c = 0; c < serial.cells.size(); ++c) {
      REQUIRE(serial.cells[c].rate == parallel.cells[c].rate);
      REQUIRE(serial.cells[c].mean_p == parallel.cells[c].mean_p);
      REQUIRE(serial.cells[c].failures == 0);
    }
    REQUIRE(parallel.cells[1].rate >= parallel.cells[0].rate);
  }

  SECTION("cell substreams are content-keyed, not order-keyed") {
    PowerStudyConfig cfg;
    cfg.kind = TestKind::Global;
    cfg.space = SimSpace::Network;
    cfg.network.m = 4;
    cfg.B = 10;
    cfg.K = 5;
    cfg.seed = 7;
    cfg.cells = {{0.0, 0.0, 30}, {0.2, 0.2, 30}};
    const auto both = run_power_study(cfg);
    cfg.cells = {{0.2, 0.2, 30}};
    const auto only_second = run_power_study(cfg);
    REQUIRE(both.cells[1].rate == only_second.cells[0].rate);
    REQUIRE(both.cells[1].mean_p == only_second.cells[0].mean_p);
  }

  SECTION("partial study runs end to end") {
    PowerStudyConfig cfg;
    cfg.kind = TestKind::Partial;
    cfg.space = SimSpace::Sphere;
    cfg.sphere.beta = M_PI / 12;
    cfg.cells = {{M_PI / 12, 0.0, 40}};
    cfg.B = 10;
    cfg.K = 10;
    cfg.seed = 3;
    const auto result = run_power_study(cfg);
    REQUIRE(result.cells[0].failures == 0);
    REQUIRE(result.cells[0].rate <= 1.0);
  }
}

TEST_CASE("presets cover the documented grids") {
  for (const auto& name : preset_names()) {
    auto cfg = preset_study(name);
    REQUIRE(cfg);
    REQUIRE(!cfg->cells.empty());
    REQUIRE(cfg->B == 500);
    REQUIRE(cfg->K == 50);
    REQUIRE(cfg->alpha == 0.05);
  }
  REQUIRE(!preset_study("nonsense"));

  auto net = preset_study("paper-network-global");
  REQUIRE(net->network.alpha0 == 1.0);
  REQUIRE(net->network.m == 10);
  auto sph = preset_study("paper-sphere-global");
  REQUIRE(sph->sphere.alpha0 == Catch::Approx(M_PI / 6));
  REQUIRE(sph->sphere.phi == Catch::Approx(M_PI / 4));
  REQUIRE(sph->sphere.sigma == 0.25);
  auto sph_partial = preset_study("paper-sphere-partial");
  REQUIRE(sph_partial->sphere.beta == Catch::Approx(M_PI / 12));
}
