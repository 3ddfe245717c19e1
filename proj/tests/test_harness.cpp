#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "spectra_bochner/harness.hpp"

using namespace spectra_bochner;

namespace {

HarnessConfig config_from(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ErrorKind parse_error(const std::string& text) {
  try {
    config_from(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "config accepted: " << text;
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(NewtonInequality, HandArithmetic) {
  Eigen::Matrix2d A;
  A << 1, 0, 0, 2;
  // tr(A^2) - (tr A)^2 / 2 = 5 - 9/2, normalized by tr B = 2
  EXPECT_NEAR(newton_defect(A, Eigen::Matrix2d::Identity()), 0.25, 1e-15);

  Eigen::Matrix3d G;
  G << 1, 2, 0, -1, 0.5, 3, 0.2, -2, 1;
  const Eigen::Matrix3d B = G * G.transpose() + Eigen::Matrix3d::Identity();
  EXPECT_NEAR(newton_defect(3.0 * Eigen::Matrix3d::Identity(), B), 0.0, 1e-14);
}

TEST(NewtonInequality, TrialsHaveNoViolationsOrFalseEqualities) {
  TrialConfig cfg;
  cfg.trials = 20000;
  const NewtonTrialReport r = newton_inequality_trials(cfg);
  EXPECT_EQ(r.trials, 20000);
  EXPECT_EQ(r.violations, 0);
  EXPECT_EQ(r.false_equalities, 0);
  EXPECT_EQ(r.scalar_trials, 2000);
  EXPECT_GE(r.equality_hits, r.scalar_trials);
  EXPECT_GT(r.worst_defect, -1e-12);
}

TEST(NewtonInequality, SeedDeterminesTheStream) {
  TrialConfig cfg;
  cfg.trials = 3000;
  const NewtonTrialReport a = newton_inequality_trials(cfg);
  const NewtonTrialReport b = newton_inequality_trials(cfg);
  EXPECT_EQ(a.worst_defect, b.worst_defect);
  EXPECT_EQ(a.equality_hits, b.equality_hits);
  cfg.seed = 43;
  EXPECT_NE(newton_inequality_trials(cfg).worst_defect, a.worst_defect);
}

TEST(NewtonInequality, NonScalarTrialsAreNeverEqualities) {
  TrialConfig cfg;
  cfg.trials = 20000;
  cfg.scalar_every = 0;
  const NewtonTrialReport r = newton_inequality_trials(cfg);
  EXPECT_EQ(r.scalar_trials, 0);
  EXPECT_EQ(r.equality_hits, 0);
  EXPECT_GT(r.worst_defect, 1e-8);
}

TEST(QaBound, WorkedExampleByBruteForce) {
  Eigen::Vector3d h(1.0, 1.1, 1.2);
  const Eigen::VectorXd q = q_diagonal(h, 1.0);
  // direct evaluation of each diagonal entry
  const double H = h.sum(), A2 = h.squaredNorm();
  double mn = 1e300;
  for (int i = 0; i < 3; ++i) {
    const double x = h(i);
    const double v = 2 * x * x * x - 3 * H * x * x + (2 * H * H - A2 - 1.0) * x + 3.0 * H;
    EXPECT_NEAR(q(i), v, 1e-12);
    mn = std::min(mn, v);
  }
  EXPECT_NEAR(q_lower_bound(3, 1.0, 1.0, 1.2), 14.24, 1e-12);
  EXPECT_GE(mn, 14.24);
}

TEST(QaBound, TrialsAndPlantedControl) {
  TrialConfig cfg;
  cfg.trials = 20000;
  for (KappaSign s : {KappaSign::Positive, KappaSign::NonPositive}) {
    const QaTrialReport r = qa_bound_trials(cfg, s);
    EXPECT_EQ(r.violations, 0);
    EXPECT_EQ(r.equality_trials, 2000);
    EXPECT_LT(r.equality_error, 1e-9);
    const QaTrialReport p = qa_bound_trials(cfg, s, true);
    EXPECT_TRUE(p.planted);
    EXPECT_GT(p.violations, 0);
  }
}

TEST(QaBound, ScalarOperatorAttainsBound) {
  for (int n = 2; n <= 6; ++n)
    for (double kappa : {-0.7, 0.0, 1.3}) {
      const double alpha = 1.7;
      const Eigen::VectorXd h = Eigen::VectorXd::Constant(n, alpha);
      const double expect = 2.0 * (n - 1) * (n - 1) * alpha * (alpha * alpha + kappa);
      EXPECT_NEAR(q_diagonal(h, kappa).minCoeff(), expect, 1e-10);
      EXPECT_NEAR(q_lower_bound(n, kappa, alpha, 1.0), expect, 1e-10);
    }
}

TEST(Config, ParsesSectionsAndLists) {
  const HarnessConfig cfg = config_from(R"(
# comment
[manifold]
specs = sphere:n=4,K=1 ; torus3:L=6.28,perturb=sin
surface = sphere:r=2

[solver]
tol = 1e-8
seed = 7
refine = 2..4

[suites]
run = newton, qa
sphere-equality = true
assembly = false
trials = 500
c = 0, 2.5
)");
  EXPECT_EQ(cfg.manifolds, (std::vector<std::string>{"sphere:n=4,K=1", "torus3:L=6.28,perturb=sin"}));
  EXPECT_EQ(cfg.surface, "sphere:r=2");
  EXPECT_DOUBLE_EQ(cfg.tol, 1e-8);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.refine_lo, 2);
  EXPECT_EQ(cfg.refine_hi, 4);
  EXPECT_EQ(cfg.suites, (std::vector<std::string>{"newton", "qa", "sphere-equality"}));
  EXPECT_EQ(cfg.trials, 500);
  EXPECT_EQ(cfg.c_values, (std::vector<double>{0.0, 2.5}));
}

TEST(Config, Errors) {
  EXPECT_EQ(parse_error("[bogus]\n"), ErrorKind::ConfigParse);
  EXPECT_EQ(parse_error("tol = 1\n"), ErrorKind::ConfigParse);
  EXPECT_EQ(parse_error("[solver]\ntol 1\n"), ErrorKind::ConfigParse);
  EXPECT_EQ(parse_error("[solver]\ntol = abc\n"), ErrorKind::ConfigParse);
  EXPECT_EQ(parse_error("[suites]\nrun = nonsense\n"), ErrorKind::ConfigParse);
  EXPECT_EQ(parse_error("[suites]\nwhatever = 1\n"), ErrorKind::ConfigParse);
  EXPECT_EQ(parse_error("[solver]\nrefine = 5..3\n"), ErrorKind::ConfigParse);
}

TEST(RunSuite, EmptySuiteListPasses) {
  const RunSummary s = run_suite(config_from("[suites]\n"));
  EXPECT_TRUE(s.results.empty());
  EXPECT_TRUE(s.passed());
}

TEST(RunSuite, SphereEqualityAndTrials) {
  HarnessConfig cfg = config_from("[suites]\nrun = sphere-equality, newton, qa\ntrials = 2000\n");
  const RunSummary s = run_suite(cfg);
  ASSERT_EQ(s.results.size(), 3u);
  EXPECT_TRUE(s.passed());
  EXPECT_DOUBLE_EQ(s.results[0].get("schouten.bound"), 4.0);
  EXPECT_DOUBLE_EQ(s.results[1].get("violations"), 0.0);
}

TEST(RunSuite, CorruptedCoefficientFailsTheAssemblySuite) {
  HarnessConfig cfg = config_from("[suites]\nrun = assembly\ncorrupt_phi = true\n");
  const RunSummary s = run_suite(cfg);
  ASSERT_EQ(s.results.size(), 1u);
  EXPECT_FALSE(s.passed());
  ASSERT_FALSE(s.results[0].failures.empty());
  EXPECT_NE(s.results[0].failures[0].find("NonSymmetricCoefficient"), std::string::npos);

  cfg.corrupt_phi = false;
  EXPECT_TRUE(run_suite(cfg).passed());
}

TEST(RunSuite, BochnerOnSmallSample) {
  HarnessConfig cfg = config_from("[manifold]\nspecs = torus2:L=6.283185307179586,perturb=sin\n[suites]\nrun = bochner\nsamples = 5\n");
  const RunSummary s = run_suite(cfg);
  EXPECT_TRUE(s.passed()) << (s.results[0].failures.empty() ? "" : s.results[0].failures[0]);
  EXPECT_LT(s.results[0].get("max_residual"), 1e-10);
}

TEST(Surfaces, MeshesForSpecs) {
  EXPECT_EQ(surface_mesh("sphere:r=2", 1).vertex_count(), 42);
  EXPECT_NEAR(surface_mesh("sphere:r=2", 1).vertices[0].norm(), 2.0, 1e-14);
  EXPECT_NEAR(surface_mesh("geodesic-sphere:kappa=0,alpha=2", 0).vertices[0].norm(), 0.5, 1e-14);
  try {
    surface_mesh("geodesic-sphere:kappa=1,alpha=1", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(Surfaces, CompareRowsOnUnitSphereAreEqualityCases) {
  const auto rows = compare_rows("sphere:r=1", 2, 4, SolverOptions{});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows.back().bound, 2.0, 1e-9);
  EXPECT_EQ(rows.back().verdict, Verdict::EqualityCase);
  EXPECT_GT(rows[0].level.mu1, rows[2].level.mu1);
}
