#include <gtest/gtest.h>

#include <cmath>

#include "spectra_bochner/bounds.hpp"
#include "spectra_bochner/rng.hpp"
#include "spectra_bochner/spectral.hpp"

using namespace spectra_bochner;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

SchoutenBoundInput sphere_input(int n) {
  SchoutenBoundInput in;
  in.n = n;
  in.R = n * (n - 1.0);
  in.K0 = 1.0;
  in.L0 = n - 1.0;
  return in;
}

NewtonBoundInput newton_input(int n, double kappa, double alpha, double a = 1.0, double sigma = 0.0) {
  NewtonBoundInput in;
  in.n = n;
  in.kappa = kappa;
  in.alpha = alpha;
  in.a = a;
  in.sigma = sigma;
  return in;
}

}  // namespace

TEST(SchoutenBound, RoundSpheresAreEqualityCases) {
  EXPECT_NEAR(schouten_bound(sphere_input(4)), 4.0, 1e-14);
  EXPECT_NEAR(schouten_bound(sphere_input(5)), 7.5, 1e-14);
  for (int n = 4; n <= 8; ++n) {
    const double mu = analytic_sphere_spectrum(SphereOperator::schouten(n, 1.0), 1)[0];
    EXPECT_NEAR(schouten_bound(sphere_input(n)) / mu, 1.0, 1e-12) << n;
    // Gamma from its definition is (n-1)(n-2) on the unit sphere
    EXPECT_NEAR(schouten_gamma(sphere_input(n)), (n - 1.0) * (n - 2.0), 1e-12);
  }
}

TEST(SchoutenBound, Errors) {
  EXPECT_EQ(kind_of([] { schouten_bound(sphere_input(3)); }), ErrorKind::DimensionTooSmall);
  SchoutenBoundInput in = sphere_input(4);
  in.L0 = 6.0;  // R - 2 L0 = 0
  EXPECT_EQ(kind_of([&] { schouten_bound(in); }), ErrorKind::DenominatorNonpositive);
}

TEST(SchoutenBound, ScalesWithMetric) {
  CounterRng rng(3, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = rng.uniform(0.5, 2.0);
    SchoutenBoundInput in = sphere_input(5);
    in.L0 = rng.uniform(2.6, 4.0);
    in.K0 = rng.uniform(0.1, 1.0);
    SchoutenBoundInput s = in;
    s.R /= t * t;
    s.K0 /= t * t;
    s.L0 /= t * t;
    // Gamma is quadratic in curvature and R / (R - 2 L0) is scale free, so
    // the bound scales like S times a Hessian: t^-4
    const double b = schouten_bound(in);
    EXPECT_NEAR(schouten_bound(s), b / std::pow(t, 4), 1e-12 * std::abs(b));
    const double mu = analytic_sphere_spectrum(SphereOperator::schouten(5, 1.0 / (t * t)), 1)[0];
    EXPECT_NEAR(mu, analytic_sphere_spectrum(SphereOperator::schouten(5, 1.0), 1)[0] / std::pow(t, 4), 1e-12);
  }
}

TEST(SchoutenBound, BoundaryOfPositivityIsFlagOnly) {
  // L0 = R / (2(n-1)): lambda0 = 0, the bound still evaluates
  SchoutenBoundInput in = sphere_input(4);
  in.K0 = 0.5;
  in.L0 = 2.0;
  EXPECT_NEAR(schouten_lambda0(in), 0.0, 1e-15);
  in.flags.schouten_positive = false;
  const BoundReport r = compare(in, 4.0);
  EXPECT_TRUE(std::isfinite(r.bound_value));
  EXPECT_EQ(r.verdict, Verdict::HypothesisFailed);
}

TEST(NewtonBound, WorkedValues) {
  EXPECT_NEAR(newton_bound(newton_input(2, 0.0, 1.0)), 2.0, 1e-14);
  EXPECT_NEAR(newton_bound(newton_input(3, 1.0, 1.0)), 12.0, 1e-13);
  EXPECT_NEAR(newton_bound(newton_input(2, -1.0, 2.0)), 12.0, 1e-13);
}

TEST(NewtonBound, UmbilicCaseMatchesSpectrumOnBothBranches) {
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(2, 7);
    const double alpha = rng.uniform(0.2, 3.0);
    const double kappa = rng.uniform(-0.9, 1.0) * alpha * alpha;
    const double expect = n * (n - 1.0) * alpha * (alpha * alpha + kappa);
    EXPECT_NEAR(newton_bound(newton_input(n, kappa, alpha)), expect, 1e-12 * std::abs(expect));
    EXPECT_NEAR(analytic_sphere_spectrum(SphereOperator::newton(n, alpha, kappa), 1)[0], expect, 1e-12 * expect);
  }
  // continuity across kappa = 0 when a = 1
  EXPECT_NEAR(newton_bound(newton_input(3, 1e-14, 1.0)), newton_bound(newton_input(3, -1e-14, 1.0)), 1e-12);
}

TEST(NewtonBound, Homogeneity) {
  CounterRng rng(9, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = rng.uniform(0.5, 2.0);
    NewtonBoundInput in = newton_input(rng.uniform_int(2, 5), rng.uniform(-1.0, 1.0), rng.uniform(0.5, 2.0),
                                       rng.uniform(1.0, 1.5), rng.uniform(0.0, 1.0));
    NewtonBoundInput s = in;
    s.kappa /= t * t;
    s.alpha /= t;
    s.sigma /= t * t * t;
    const double b = newton_bound(in);
    EXPECT_NEAR(newton_bound(s), b / (t * t * t), 1e-12 * (std::abs(b) + 1.0));
  }
}

TEST(NewtonBound, Monotonicity) {
  for (int n = 2; n <= 5; ++n)
    for (double kappa : {-0.5, 0.0, 1.0}) {
      double prev_sigma = std::numeric_limits<double>::infinity();
      for (double sigma = 0.0; sigma <= 2.0; sigma += 0.25) {
        const double b = newton_bound(newton_input(n, kappa, 1.0, 1.1, sigma));
        EXPECT_LT(b, prev_sigma);
        prev_sigma = b;
      }
      // in a, on the part of [1, sqrt(n)] where the bracket is nonnegative
      double prev_a = std::numeric_limits<double>::infinity();
      for (double a = 1.0; a <= std::sqrt(n); a += 0.02) {
        const NewtonBoundInput in = newton_input(n, kappa, 1.0, a);
        if (newton_bracket(in) < 0.0) break;
        const double b = newton_bound(in);
        EXPECT_LT(b, prev_a) << n << " " << kappa << " " << a;
        prev_a = b;
      }
    }
}

TEST(NewtonBound, Preconditions) {
  EXPECT_EQ(kind_of([] { newton_bound(newton_input(2, 0.0, 0.0)); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { newton_bound(newton_input(2, 0.0, 1.0, 0.9)); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { newton_bound(newton_input(1, 0.0, 1.0)); }), ErrorKind::DimensionTooSmall);
}

TEST(Compare, Verdicts) {
  const BoundReport eq = compare(sphere_input(4), analytic_sphere_spectrum(SphereOperator::schouten(4, 1.0), 1)[0]);
  EXPECT_EQ(eq.verdict, Verdict::EqualityCase);
  EXPECT_LE(std::abs(eq.margin), 1e-12);

  // discrete mu1 = 2 + O(h^2) with an error estimate
  EXPECT_EQ(compare(newton_input(2, 0.0, 1.0), 2.0005, 0.0004).verdict, Verdict::EqualityCase);
  EXPECT_EQ(compare(1.0, 2.0, 0.01, {}).verdict, Verdict::InequalityHolds);
  EXPECT_EQ(compare(2.0, 1.0, 0.01, {}).verdict, Verdict::ViolationSuspected);
  HypothesisFlags bad;
  bad.harmonic_weyl = false;
  EXPECT_EQ(compare(1.0, 2.0, std::nullopt, bad).verdict, Verdict::HypothesisFailed);
}

TEST(Estimates, RoundSphereSchoutenInputIsExact) {
  const SchoutenBoundInput in = estimate_schouten_input(round_sphere(4, 1.0));
  EXPECT_NEAR(in.R, 12.0, 1e-10);
  EXPECT_NEAR(in.K0, 1.0, 1e-12);
  EXPECT_NEAR(in.L0, 3.0, 1e-12);
  EXPECT_TRUE(in.flags.harmonic_weyl.value());
  EXPECT_TRUE(in.flags.constant_R.value());
  EXPECT_TRUE(in.flags.schouten_positive.value());
  EXPECT_FALSE(in.flags.estimated);
  EXPECT_EQ(compare(in, 4.0).verdict, Verdict::EqualityCase);
}

TEST(Estimates, PerturbedTorusFailsConstantR) {
  const SchoutenBoundInput in = estimate_schouten_input(torus(4, 6.0, TorusPerturbation::Sin));
  EXPECT_FALSE(in.flags.constant_R.value());
  EXPECT_TRUE(in.flags.estimated);
}

TEST(Estimates, NewtonInputs) {
  const NewtonBoundInput us = estimate_newton_input(sphere_surface(1.0));
  EXPECT_NEAR(newton_bound(us), 2.0, 1e-9);
  const NewtonBoundInput ell = estimate_newton_input(ellipsoid({1.0, 1.0, 1.1}));
  EXPECT_TRUE(ell.flags.estimated);
  EXPECT_NEAR(ell.alpha, 1.0 / 1.21, 1e-3);
  EXPECT_NEAR(ell.a, 1.1 * 1.21, 2e-3);
  EXPECT_LT(newton_bound(ell), 2.0);
}

TEST(Richardson, RecoversOrderAndLimit) {
  const std::vector<double> h{0.4, 0.2, 0.1};
  std::vector<double> v;
  for (double x : h) v.push_back(2.0 + 3.0 * x * x);
  const RefinementEstimate e = richardson(h, v);
  EXPECT_NEAR(e.order, 2.0, 1e-10);
  EXPECT_NEAR(e.extrapolated, 2.0, 1e-12);
  EXPECT_NEAR(e.error, 0.03, 1e-12);
}
