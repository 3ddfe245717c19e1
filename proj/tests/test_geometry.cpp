#include <gtest/gtest.h>

#include <cmath>

#include "spectra_bochner/geometry.hpp"

using namespace spectra_bochner;

namespace {

double max_dev(const Tensor& a, const Tensor& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST(Geometry, SphereChartCurvatureIsConstant) {
  for (int n : {2, 3, 4}) {
    for (double K : {1.0, 2.5}) {
      ChartManifold m = round_sphere(n, K);
      for (const auto& p : m.sample_points(8, 3)) {
        CurvatureBundle b = chart_curvature_at(m, p, Derivation::analytic());
        EXPECT_LT(max_dev(b.riemann, constant_curvature_riemann(n, K)), 1e-10) << n << " " << K;
        EXPECT_NEAR(b.scalar, n * (n - 1) * K, 1e-9);
      }
    }
  }
}

TEST(Geometry, SphereRicciSchoutenS4) {
  ChartManifold m = round_sphere(4, 1.0);
  ChartPoint p{1, {0.1, -0.3, 0.2, 0.05}};
  CurvatureBundle b = chart_curvature_at(m, p, Derivation::analytic());
  EXPECT_LT((b.ricci - 3.0 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(b.scalar, 12.0, 1e-10);
  ASSERT_TRUE(b.schouten.has_value());
  EXPECT_LT((*b.schouten - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(b.weyl->max_abs(), 1e-10);
}

TEST(Geometry, FiniteDifferenceModeAgreesWithAnalytic) {
  ChartManifold m = torus(3, 2 * std::numbers::pi, TorusPerturbation::Mixed, 0.1);
  ChartPoint p{0, {0.4, 1.1, 2.7}};
  CurvatureBundle a = chart_curvature_at(m, p, Derivation::analytic());
  CurvatureBundle f = chart_curvature_at(m, p, Derivation::finite_difference(1e-3));
  EXPECT_LT(max_dev(a.riemann, f.riemann), 1e-5);
  EXPECT_GT(a.riemann.max_abs(), 1e-3);
}

TEST(Geometry, ConformalTorusCurvatureOracle) {
  // g = e^{2w} delta in 2D: K = -e^{-2w} w'' (w depends on x only)
  const double eps = 0.1;
  ChartManifold m = torus(2, 2 * std::numbers::pi, TorusPerturbation::Sin, eps);
  for (double x : {0.3, 1.7, 4.0}) {
    ChartPoint p{0, {x, 0.9}};
    const double c = 1 + eps * std::sin(x), c1 = eps * std::cos(x), c2 = -eps * std::sin(x);
    // w = log(c)/2
    const double w2 = 0.5 * (c2 / c - c1 * c1 / (c * c));
    const double K = -w2 / c;
    CurvatureBundle b = chart_curvature_at(m, p, Derivation::analytic());
    EXPECT_NEAR(b.sectional(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)), K, 1e-12);
  }
}

TEST(Geometry, ContractedBianchiAndEinsteinDivergence) {
  ChartManifold m = torus(3, 2 * std::numbers::pi, TorusPerturbation::Mixed, 0.15);
  DivergenceReport r = divergence_identity_suite(m, SamplePlan{4, 0, 11});
  EXPECT_TRUE(r.r_not_constant);
  EXPECT_FALSE(r.shifted_ricci_defect.has_value());
  EXPECT_LT(r.bianchi_defect, 1e-10);
  EXPECT_LT(r.einstein_defect, 1e-10);
  EXPECT_LT(r.schouten_defect, 1e-10);
}

TEST(Geometry, MetricIsCodazziAndDivergenceFree) {
  ChartManifold m = torus(3, 2 * std::numbers::pi, TorusPerturbation::Mixed, 0.2);
  ChartPoint p{0, {0.4, 1.1, 2.7}};
  EXPECT_LT(codazzi_defect(metric_field(), m, p), 1e-12);
  EXPECT_LT(tensor_divergence(metric_field(), m, p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Geometry, NonPositiveMetricThrows) {
  ChartManifold m = torus(2, 2 * std::numbers::pi, TorusPerturbation::Sin, 1.5);
  ChartPoint p{0, {3 * std::numbers::pi / 2, 0.0}};
  try {
    curvature_at(m, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveMetric);
  }
}

TEST(Geometry, MinSectionalOnSphereAndTorus) {
  EXPECT_DOUBLE_EQ(min_sectional(round_sphere(3, 2.0), {}), 2.0);
  EXPECT_NEAR(min_sectional(torus(3, 1.0, TorusPerturbation::None), SamplePlan{4, 4, 1}), 0.0, 1e-12);
  EXPECT_NEAR(min_ricci(torus(2, 1.0, TorusPerturbation::None), SamplePlan{4, 4, 1}), 0.0, 1e-12);
}

TEST(Geometry, ParseManifold) {
  ChartManifold m = parse_manifold("torus3:L=2,perturb=mixed,eps=0.05");
  EXPECT_EQ(m.dim, 3);
  EXPECT_EQ(m.kind, AtlasKind::PeriodicBox);
  EXPECT_EQ(parse_manifold("sphere:n=4,K=2").sphere_curvature, 2.0);
  EXPECT_THROW(parse_manifold("klein:1"), Error);
}
