#include <catch2/catch_amalgamated.hpp>

#include "frechet/spaces.hpp"
#include "support/oracles.hpp"

using namespace frechet;

namespace {

ObjectPoint euclid(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double val : v) x[i++] = val;
  return EuclideanVector{x};
}

ObjectPoint sphere_pt(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double val : v) x[i++] = val;
  return SpherePoint{x};
}

ObjectPoint quantiles(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double val : v) x[i++] = val;
  return QuantileGrid{x};
}

double objective_at(const SpaceHandle& space, const ObjectPoint& omega,
                    const std::vector<ObjectPoint>& pts, const Eigen::VectorXd& w) {
  double obj = 0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double d = distance(space, omega, pts[j]);
    obj += w[static_cast<Eigen::Index>(j)] * d * d;
  }
  return obj;
}

std::vector<ObjectPoint> random_points(const SpaceHandle& space, int count, RandomStream& rng) {
  std::vector<ObjectPoint> pts;
  for (int k = 0; k < count; ++k) {
    switch (space.kind) {
      case SpaceKind::Euclidean: {
        Eigen::VectorXd v(space.dim);
        for (int i = 0; i < space.dim; ++i) v[i] = 3.0 * rng.normal();
        pts.push_back(EuclideanVector{v});
        break;
      }
      case SpaceKind::Sphere:
        pts.push_back(SpherePoint{testsupport::random_unit_vector(space.dim, rng)});
        break;
      case SpaceKind::SimplexSqrt:
        pts.push_back(SpherePoint{sqrt_transform(testsupport::random_composition(space.dim, rng))});
        break;
      case SpaceKind::LaplacianFrobenius:
        pts.push_back(Laplacian{testsupport::random_laplacian(space.dim, space.edge_bound, rng)});
        break;
      case SpaceKind::Wasserstein1D:
        pts.push_back(QuantileGrid{testsupport::random_quantile_grid(space.dim, space.lo, space.hi, rng)});
        break;
    }
  }
  return pts;
}

}  // namespace

TEST_CASE("distance: worked examples") {
  SECTION("orthogonal unit vectors are a quarter circle apart") {
    auto space = SpaceHandle::sphere(3);
    REQUIRE(distance(space, sphere_pt({1, 0, 0}), sphere_pt({0, 1, 0})) == Catch::Approx(M_PI / 2));
  }
  SECTION("Frobenius distance between 2-node Laplacians") {
    auto space = SpaceHandle::laplacian(2, 5.0);
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 1, -1, -1, 1;
    b << 2, -2, -2, 2;
    REQUIRE(distance(space, Laplacian{a}, Laplacian{b}) == Catch::Approx(2.0));
  }
  SECTION("quantile location shift") {
    auto space = SpaceHandle::wasserstein(4, 0.0, 6.0);
    REQUIRE(distance(space, quantiles({1, 2, 3, 4}), quantiles({2, 3, 4, 5})) == Catch::Approx(1.0));
  }
  SECTION("dimension mismatch and invalid members are rejected") {
    auto space = SpaceHandle::sphere(3);
    REQUIRE_THROWS_AS(distance(space, sphere_pt({1, 0}), sphere_pt({0, 1, 0})), std::invalid_argument);
    REQUIRE_THROWS_AS(distance(space, sphere_pt({1, 1, 0}), sphere_pt({0, 1, 0})), std::invalid_argument);
  }
}

TEST_CASE("validate: reports the first violated invariant") {
  REQUIRE(!validate(SpaceHandle::sphere(3), sphere_pt({0.6, 0.8, 0})));

  Eigen::MatrixXd bad(2, 2);
  bad << 1, -0.5, -0.5, 1;  // row sums 0.5
  auto err = validate(SpaceHandle::laplacian(2, 5.0), Laplacian{bad});
  REQUIRE(err);
  REQUIRE(err->find("row sum") != std::string::npos);

  auto grid_err = validate(SpaceHandle::wasserstein(4, 0, 10), quantiles({3, 2, 4, 5}));
  REQUIRE(grid_err);
  REQUIRE(grid_err->find("monotone") != std::string::npos);
}

TEST_CASE("metric axioms hold on random valid pairs") {
  RandomStream rng(2024);
  const std::vector<SpaceHandle> spaces = {
      SpaceHandle::euclidean(4), SpaceHandle::sphere(3), SpaceHandle::laplacian(4, 3.0),
      SpaceHandle::wasserstein(6, -2.0, 5.0), SpaceHandle::simplex_sqrt(3)};
  for (const auto& space : spaces) {
    auto pts = random_points(space, 30, rng);
    for (std::size_t k = 0; k + 2 < pts.size(); k += 3) {
      const auto &a = pts[k], &b = pts[k + 1], &c = pts[k + 2];
      const double dab = distance(space, a, b);
      REQUIRE(dab >= 0.0);
      REQUIRE(dab == distance(space, b, a));
      REQUIRE(distance(space, a, a) <= 1e-9);
      REQUIRE(distance(space, a, c) <= dab + distance(space, b, c) + 1e-9);
    }
  }
}

TEST_CASE("weighted mean: closed forms and worked examples") {
  SECTION("euclidean arithmetic mean") {
    auto space = SpaceHandle::euclidean(1);
    std::vector<ObjectPoint> pts{euclid({1}), euclid({2}), euclid({3})};
    auto r = weighted_frechet_mean(space, pts, Eigen::VectorXd::Ones(3));
    REQUIRE(std::get<EuclideanVector>(r.point).value[0] == Catch::Approx(2.0));
    REQUIRE(r.converged);
  }
  SECTION("sphere geodesic midpoint") {
    auto space = SpaceHandle::sphere(3);
    std::vector<ObjectPoint> pts{sphere_pt({1, 0, 0}), sphere_pt({0, 1, 0})};
    auto r = weighted_frechet_mean(space, pts, Eigen::VectorXd::Ones(2));
    const auto& v = std::get<SpherePoint>(r.point).value;
    REQUIRE(v[0] == Catch::Approx(1 / std::sqrt(2)).margin(1e-9));
    REQUIRE(v[1] == Catch::Approx(1 / std::sqrt(2)).margin(1e-9));
    REQUIRE(std::abs(v[2]) < 1e-9);
  }
  SECTION("quantile average already monotone") {
    auto space = SpaceHandle::wasserstein(3, 0.0, 5.0);
    std::vector<ObjectPoint> pts{quantiles({0, 1, 2}), quantiles({0, 3, 4})};
    auto r = weighted_frechet_mean(space, pts, Eigen::VectorXd::Ones(2));
    const auto& v = std::get<QuantileGrid>(r.point).value;
    REQUIRE(v[0] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(v[1] == Catch::Approx(2.0));
    REQUIRE(v[2] == Catch::Approx(3.0));
  }
  SECTION("decreasing quantile rows are invalid input") {
    auto space = SpaceHandle::wasserstein(3, 0.0, 5.0);
    std::vector<ObjectPoint> pts{quantiles({0, 1, 2}), quantiles({2, 1, 0})};
    REQUIRE_THROWS_AS(weighted_frechet_mean(space, pts, Eigen::VectorXd::Ones(2)),
                      std::invalid_argument);
  }
  SECTION("error paths") {
    auto space = SpaceHandle::euclidean(1);
    std::vector<ObjectPoint> pts{euclid({1})};
    Eigen::VectorXd w(1);
    w << -0.5;
    REQUIRE_THROWS_AS(weighted_frechet_mean(space, pts, w), std::invalid_argument);
    REQUIRE_THROWS_AS(weighted_frechet_mean(space, std::vector<ObjectPoint>{}, Eigen::VectorXd{}),
                      std::invalid_argument);
  }
  SECTION("antipodal pair is degenerate geometry") {
    auto space = SpaceHandle::sphere(3);
    std::vector<ObjectPoint> pts{sphere_pt({1, 0, 0}), sphere_pt({-1, 0, 0})};
    REQUIRE_THROWS_AS(weighted_frechet_mean(space, pts, Eigen::VectorXd::Ones(2)), SolverError);
  }
}

TEST_CASE("laplacian weighted mean with mixed signs matches the projected-gradient oracle") {
  RandomStream rng(77);
  auto space = SpaceHandle::laplacian(3, 1.0);
  Eigen::VectorXd w(2);
  w << 1.7, -0.7;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<ObjectPoint> pts{Laplacian{testsupport::random_laplacian(3, 1.0, rng)},
                                 Laplacian{testsupport::random_laplacian(3, 1.0, rng)}};
    auto r = weighted_frechet_mean(space, pts, w);
    std::vector<Eigen::MatrixXd> raw{std::get<Laplacian>(pts[0]).value,
                                     std::get<Laplacian>(pts[1]).value};
    auto oracle = testsupport::laplacian_mean_oracle(raw, w, 1.0, 200, rng);
    REQUIRE((std::get<Laplacian>(r.point).value - oracle.point).norm() < 1e-6);
  }
}

TEST_CASE("weighted mean properties") {
  RandomStream rng(31);
  const std::vector<SpaceHandle> spaces = {
      SpaceHandle::euclidean(3), SpaceHandle::sphere(3), SpaceHandle::laplacian(4, 2.0),
      SpaceHandle::wasserstein(5, 0.0, 4.0)};

  SECTION("equal weights reduce to the unweighted mean") {
    for (const auto& space : spaces) {
      auto pts = random_points(space, 8, rng);
      auto weighted = weighted_frechet_mean(space, pts, Eigen::VectorXd::Constant(8, 2.5));
      auto unweighted = weighted_frechet_mean(space, pts, Eigen::VectorXd::Ones(8));
      const double obj_w = objective_at(space, weighted.point, pts, Eigen::VectorXd::Ones(8));
      const double obj_u = objective_at(space, unweighted.point, pts, Eigen::VectorXd::Ones(8));
      REQUIRE(std::abs(obj_w - obj_u) < 1e-7);
    }
  }

  SECTION("positive rescaling of weights leaves the minimizer unchanged") {
    for (const auto& space : spaces) {
      auto pts = random_points(space, 6, rng);
      Eigen::VectorXd w(6);
      w << 1.9, -0.3, 1.1, 0.8, 1.6, 0.9;
      auto a = weighted_frechet_mean(space, pts, w);
      auto b = weighted_frechet_mean(space, pts, Eigen::VectorXd(7.3 * w));
      REQUIRE(distance(space, a.point, b.point) < 1e-8);
    }
  }

  SECTION("laplacian mean beats the clipped average and every input point") {
    auto space = SpaceHandle::laplacian(4, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
      auto pts = random_points(space, 5, rng);
      Eigen::VectorXd w(5);
      for (int i = 0; i < 5; ++i) w[i] = 1.0 + 1.4 * rng.normal();
      if (w.sum() <= 0.1) continue;
      auto r = weighted_frechet_mean(space, pts, w);
      const double at_solution = objective_at(space, r.point, pts, w);

      Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(4, 4);
      for (int j = 0; j < 5; ++j) avg += w[j] / w.sum() * std::get<Laplacian>(pts[j]).value;
      Eigen::VectorXd clipped = vech(avg).cwiseMin(0.0).cwiseMax(-1.0);
      const ObjectPoint clipped_avg = Laplacian{vech_inverse(clipped, 4)};
      REQUIRE(at_solution <= objective_at(space, clipped_avg, pts, w) + 1e-9);
      for (const auto& p : pts) REQUIRE(at_solution <= objective_at(space, p, pts, w) + 1e-9);
    }
  }

  SECTION("sphere: single point and rotation invariance") {
    auto space = SpaceHandle::sphere(3);
    Eigen::VectorXd one(1);
    one << 1.0;
    std::vector<ObjectPoint> single{sphere_pt({0, 0, 1})};
    auto r = weighted_frechet_mean(space, single, one);
    REQUIRE(distance(space, r.point, single[0]) < 1e-9);

    auto pts = random_points(space, 7, rng);
    Eigen::VectorXd w(7);
    for (int i = 0; i < 7; ++i) w[i] = 0.5 + rng.uniform();
    auto base = weighted_frechet_mean(space, pts, w);
    const Eigen::Matrix3d R = testsupport::random_rotation(rng);
    std::vector<ObjectPoint> rotated;
    for (const auto& p : pts) rotated.push_back(SpherePoint{R * std::get<SpherePoint>(p).value});
    auto rotated_mean = weighted_frechet_mean(space, rotated, w);
    const Eigen::VectorXd back = R.transpose() * std::get<SpherePoint>(rotated_mean.point).value;
    REQUIRE(sphere_distance(back, std::get<SpherePoint>(base.point).value) < 1e-7);
  }
}

TEST_CASE("isotonic projection matches the enumeration oracle") {
  RandomStream rng(5150);
  for (int rep = 0; rep < 60; ++rep) {
    const int levels = 2 + static_cast<int>(rng.uniform() * 5);  // M <= 6
    Eigen::VectorXd x(levels);
    for (int i = 0; i < levels; ++i) x[i] = 4.0 * rng.normal();
    const Eigen::VectorXd fast = isotonic_projection(x);
    const Eigen::VectorXd slow = testsupport::isotonic_oracle(x);
    REQUIRE((fast - slow).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("square-root transform") {
  Eigen::VectorXd comp(3);
  comp << 0.25, 0.25, 0.5;
  const Eigen::VectorXd s = sqrt_transform(comp);
  REQUIRE(s[0] == Catch::Approx(0.5));
  REQUIRE(s[1] == Catch::Approx(0.5));
  REQUIRE(s[2] == Catch::Approx(std::sqrt(0.5)));

  Eigen::VectorXd vertex(3);
  vertex << 1, 0, 0;
  REQUIRE((sqrt_transform(vertex) - vertex).norm() == 0.0);

  RandomStream rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd x = testsupport::random_composition(4, rng);
    REQUIRE((inverse_sqrt_transform(sqrt_transform(x)) - x).cwiseAbs().maxCoeff() < 1e-12);
  }

  Eigen::VectorXd bad(2);
  bad << -0.1, 1.1;
  REQUIRE_THROWS_AS(sqrt_transform(bad), std::invalid_argument);
  Eigen::VectorXd unnormalized(2);
  unnormalized << 0.5, 0.6;
  REQUIRE_THROWS_AS(sqrt_transform(unnormalized), std::invalid_argument);
}

TEST_CASE("vech and its inverse") {
  REQUIRE(vech_length(3) == 3);

  Eigen::VectorXd v(3);
  v << -1, 0, -2;
  const Eigen::MatrixXd L = vech_inverse(v, 3);
  REQUIRE(L(0, 0) == Catch::Approx(1.0));
  REQUIRE(L(1, 1) == Catch::Approx(3.0));
  REQUIRE(L(2, 2) == Catch::Approx(2.0));
  for (int i = 0; i < 3; ++i) REQUIRE(L.row(i).sum() == Catch::Approx(0.0).margin(1e-15));

  RandomStream rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd G = testsupport::random_laplacian(5, 2.0, rng);
    REQUIRE((vech_inverse(vech(G), 5) - G).cwiseAbs().maxCoeff() == 0.0);
  }

  REQUIRE_THROWS_AS(vech_inverse(Eigen::VectorXd::Zero(4), 3), std::invalid_argument);
}

TEST_CASE("exponential and logarithm maps") {
  Eigen::Vector3d base(1, 0, 0);
  REQUIRE((exp_map(base, Eigen::Vector3d::Zero()) - base).norm() == 0.0);

  const Eigen::VectorXd quarter = exp_map(base, Eigen::Vector3d(0, M_PI / 2, 0));
  REQUIRE(quarter[1] == Catch::Approx(1.0).margin(1e-12));

  REQUIRE(log_map(base, Eigen::Vector3d(0, 1, 0)).norm() == Catch::Approx(M_PI / 2));

  RandomStream rng(41);
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::VectorXd m = testsupport::random_unit_vector(3, rng);
    Eigen::VectorXd t = testsupport::random_unit_vector(3, rng);
    t = (t - t.dot(m) * m).eval();
    t *= 0.8 * rng.uniform();
    const Eigen::VectorXd u = exp_map(m, t);
    REQUIRE(std::abs(u.norm() - 1.0) < 1e-12);
    REQUIRE((log_map(m, u) - t).norm() < 1e-9);
    REQUIRE(std::abs(log_map(m, u).norm() - sphere_distance(m, u)) < 1e-12);
  }

  REQUIRE_THROWS_AS(exp_map(base, Eigen::Vector3d(0.1, 1, 0)), std::invalid_argument);
  REQUIRE_THROWS_AS(log_map(base, Eigen::Vector3d(-1, 0, 0)), SolverError);
}

TEST_CASE("simplex means stay in the nonnegative orthant") {
  RandomStream rng(88);
  auto space = SpaceHandle::simplex_sqrt(3);
  for (int rep = 0; rep < 10; ++rep) {
    auto pts = random_points(space, 6, rng);
    Eigen::VectorXd w(6);
    for (int i = 0; i < 6; ++i) w[i] = 1.0 + 0.8 * rng.normal();
    if (w.sum() <= 0.1) continue;
    auto r = weighted_frechet_mean(space, pts, w);
    const auto& v = std::get<SpherePoint>(r.point).value;
    REQUIRE(v.minCoeff() >= 0.0);
    REQUIRE(std::abs(v.norm() - 1.0) < 1e-9);
  }
}
