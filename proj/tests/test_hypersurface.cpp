#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "spectra_bochner/hypersurface.hpp"

using namespace spectra_bochner;

namespace {

Eigen::MatrixXd eye(int n) { return Eigen::MatrixXd::Identity(n, n); }

}  // namespace

TEST(Hypersurface, RoundSphereShape) {
  ImmersedHypersurface hs = sphere_surface(2.0);
  for (const auto& p : hs.induced.sample_points(10, 5)) {
    ShapeData sd = shape_at(hs, p);
    EXPECT_LT((sd.A - 0.5 * eye(2)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(sd.H, 1.0, 1e-12);
    EXPECT_LT((sd.P1 - 0.5 * eye(2)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(gauss_intrinsic(hs, p).scalar, 2.0 * 0.25, 1e-12);
  }
}

TEST(Hypersurface, OrientationFlipNegatesShape) {
  ImmersedHypersurface hs = ellipsoid({1.0, 1.3, 0.8});
  ImmersedHypersurface flipped = hs;
  flipped.orientation = -hs.orientation;
  ChartPoint p{1, {0.3, -0.2}};
  ShapeData a = shape_at(hs, p), b = shape_at(flipped, p);
  EXPECT_LT((a.A + b.A).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(a.H, -b.H, 1e-13);
  EXPECT_GT(a.H, 0.0);
}

TEST(Hypersurface, EllipsoidPoleAndEquator) {
  const double a1 = 1.3, c = 0.9;
  ImmersedHypersurface hs = ellipsoid({a1, a1, c});
  ShapeData pole = shape_at(hs, ChartPoint{0, {0.0, 0.0}});
  Eigen::VectorXd k = pole.principal_curvatures();
  EXPECT_NEAR(k(0), c / (a1 * a1), 1e-12);
  EXPECT_NEAR(k(1), c / (a1 * a1), 1e-12);
  EXPECT_NEAR(gauss_intrinsic(hs, ChartPoint{0, {0.0, 0.0}}).scalar / 2.0, c * c / std::pow(a1, 4), 1e-12);
  // equator point (a1, 0, 0): u = (1, 0) on chart 0
  Eigen::VectorXd ke = shape_at(hs, ChartPoint{0, {1.0, 0.0}}).principal_curvatures();
  const double meridian = a1 / (c * c), parallel = 1.0 / a1;
  EXPECT_NEAR(ke(0), std::min(meridian, parallel), 1e-12);
  EXPECT_NEAR(ke(1), std::max(meridian, parallel), 1e-12);
}

TEST(Hypersurface, GeodesicSpheresInSpaceForms) {
  for (auto [n, kappa, alpha] : {std::tuple{2, 1.0, 2.0}, std::tuple{3, 1.0, 1.0}, std::tuple{2, 0.5, 0.7},
                                 std::tuple{2, -1.0, 2.0}, std::tuple{3, -0.5, 1.5}}) {
    ImmersedHypersurface hs = geodesic_sphere(n, kappa, alpha);
    for (const auto& p : hs.induced.sample_points(5, 9)) {
      ShapeData sd = shape_at(hs, p);
      EXPECT_LT((sd.A - alpha * eye(n)).cwiseAbs().maxCoeff(), 1e-11) << n << " " << kappa;
      EXPECT_NEAR(sd.S2, n * (n - 1) / 2.0 * alpha * alpha, 1e-11);
      CurvatureBundle b = gauss_intrinsic(hs, p);
      EXPECT_NEAR(b.sectional(Eigen::VectorXd::Unit(n, 0), Eigen::VectorXd::Unit(n, 1)), kappa + alpha * alpha, 1e-11);
    }
    PinchingConstants pc = pinching_constants(hs, SamplePlan{16, 0, 3});
    EXPECT_NEAR(pc.alpha, alpha, 1e-11);
    EXPECT_NEAR(pc.a, 1.0, 1e-11);
    EXPECT_EQ(pc.sigma, 0.0);
  }
}

TEST(Hypersurface, GaussEquationMatchesInducedMetricCurvature) {
  ImmersedHypersurface hs = ellipsoid({1.0, 1.2, 0.7});
  for (const auto& p : hs.induced.sample_points(12, 17)) {
    const double intrinsic = chart_curvature_at(hs.induced, p, Derivation::analytic()).scalar;
    EXPECT_NEAR(gauss_intrinsic(hs, p).scalar, intrinsic, 1e-8);
  }
  ImmersedHypersurface gs = geodesic_sphere(3, 1.0, 0.8);
  ChartPoint p{0, {0.2, 0.1, -0.4}};
  EXPECT_NEAR(chart_curvature_at(gs.induced, p, Derivation::analytic()).scalar, 6.0 * (1.0 + 0.64), 1e-8);
}

TEST(Hypersurface, CodazziAndNewtonDivergenceFree) {
  auto hs = std::make_shared<const ImmersedHypersurface>(ellipsoid({1.0, 1.2, 0.7}));
  for (const auto& p : hs->induced.sample_points(6, 2)) {
    EXPECT_LT(codazzi_defect(second_fundamental_form_field(hs), hs->induced, p), 1e-10);
    EXPECT_LT(tensor_divergence(newton_field(hs), hs->induced, p).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Hypersurface, QPolynomial) {
  for (int n : {2, 3, 5}) {
    for (double kappa : {-1.0, 0.0, 0.7}) {
      const double alpha = 1.3;
      ShapeData sd = ShapeData::from_shape_operator(alpha * eye(n));
      Eigen::MatrixXd Q = q_polynomial(sd, kappa);
      EXPECT_LT((Q - 2.0 * (n - 1) * (n - 1) * alpha * (alpha * alpha + kappa) * eye(n)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  ShapeData two = ShapeData::from_shape_operator(0.5 * eye(2));
  EXPECT_LT((q_polynomial(two, 0.0) - 2 * 0.125 * eye(2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(q_polynomial(ShapeData::from_shape_operator(Eigen::MatrixXd::Zero(3, 3)), 0.0).norm(), 0.0);

  Eigen::MatrixXd B = Eigen::MatrixXd::Random(4, 4);
  ShapeData sd = ShapeData::from_shape_operator(B + B.transpose());
  Eigen::MatrixXd Q = q_polynomial(sd, 0.4);
  EXPECT_LT((Q * sd.A - sd.A * Q).norm(), 1e-12);
  EXPECT_NEAR(sd.S2, 0.5 * (sd.H * sd.H - sd.normA2), 1e-12);
}

TEST(Hypersurface, QDiagonalWorkedExample) {
  Eigen::Vector3d h(1.0, 1.1, 1.2);
  const double bound = q_lower_bound(3, 1.0, 1.0, 1.2);
  EXPECT_NEAR(bound, 14.24, 1e-12);
  // brute force: H = 3.3, |A|^2 = 3.65, c1 = 2H^2 - |A|^2 - 1 = 17.13, c0 = 3H = 9.9
  double lo = 1e9;
  for (double x : {1.0, 1.1, 1.2}) lo = std::min(lo, 2 * x * x * x - 9.9 * x * x + 17.13 * x + 9.9);
  EXPECT_NEAR(q_diagonal(h, 1.0).minCoeff(), lo, 1e-12);
  EXPECT_GE(lo, bound);
}

TEST(Hypersurface, EllipsoidPinchingConstants) {
  ImmersedHypersurface hs = ellipsoid({1.0, 1.0, 1.1});
  PinchingConstants pc = pinching_constants(hs, SamplePlan{4000, 0, 42});
  EXPECT_NEAR(pc.alpha, 1.0 / 1.21, 2e-3);
  EXPECT_NEAR(pc.a, 1.1 * 1.21, 3e-3);
  EXPECT_FALSE(pc.constant_mean_curvature);
  EXPECT_GT(pc.sigma, 0.0);
}

TEST(Hypersurface, NotConvexThrows) {
  ImmersedHypersurface hs = sphere_surface(1.0);
  hs.orientation = -hs.orientation;
  try {
    pinching_constants(hs, SamplePlan{4, 0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotConvex);
  }
}

TEST(Hypersurface, LocateInvertsImmersion) {
  ImmersedHypersurface hs = ellipsoid({1.0, 1.2, 0.7});
  for (const auto& p : hs.induced.sample_points(8, 4)) {
    Eigen::VectorXd y = immersion_point(hs, p);
    Eigen::VectorXd y2 = immersion_point(hs, hs.locate(y));
    EXPECT_LT((y - y2).norm(), 1e-12);
  }
}

TEST(Hypersurface, ParseSurface) {
  EXPECT_EQ(parse_surface("geodesic-sphere:kappa=1,alpha=2").ambient_dim, 4);
  EXPECT_EQ(parse_surface("ellipsoid:1,1,1.1").n, 2);
  EXPECT_THROW(parse_surface("torus:1"), Error);
}
