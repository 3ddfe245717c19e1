#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "spectra_bochner/assemble.hpp"
#include "spectra_bochner/fields.hpp"
#include "spectra_bochner/spectral.hpp"

using namespace spectra_bochner;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

AssembledOperator sphere_operator(int subdiv) { return assemble(icosphere(subdiv), metric_provider()); }

SparseMatrix permuted(const SparseMatrix& A, const Eigen::PermutationMatrix<Eigen::Dynamic>& P) {
  return SparseMatrix(P * A * P.transpose());
}

}  // namespace

TEST(Spectral, IdentityPencilGivesUnitEigenvalues) {
  AssembledOperator op = sphere_operator(1);
  op.K = op.M;
  // K = M has no kernel, so deflation alone defines the problem
  const EigenResult r = smallest_nonzero(op, 4, 1e-10);
  for (double mu : r.eigenvalues) EXPECT_NEAR(mu, 1.0, 1e-10);
}

TEST(Spectral, FlatTorusFirstEigenvalueIsOne) {
  const ChartManifold flat = torus(2, kTwoPi, TorusPerturbation::None);
  double prev = 0.0;
  for (int res : {32, 64, 128}) {
    const AssembledOperator op = assemble(PeriodicGrid(flat, {res}), metric_field());
    const EigenResult r = smallest_nonzero(op, 4, 1e-9);
    // e^{+-i x_1}, e^{+-i x_2}
    for (double mu : r.eigenvalues) EXPECT_NEAR(mu, r.eigenvalues[0], 1e-8);
    const double err = std::abs(r.eigenvalues[0] - 1.0);
    if (res == 128) EXPECT_LT(err, 1e-2);
    if (prev > 0.0) EXPECT_NEAR(std::log2(prev / err), 2.0, 0.2);
    prev = err;
  }
}

TEST(Spectral, IcosphereTripleEigenvalueNearTwo) {
  const AssembledOperator op = sphere_operator(4);
  const double tol = 1e-9;
  const EigenResult r = smallest_nonzero(op, 3, tol);
  ASSERT_EQ(r.eigenvalues.size(), 3u);
  EXPECT_TRUE(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
  EXPECT_LT(r.eigenvalues[2] - r.eigenvalues[0], 1e-3);
  EXPECT_NEAR(r.eigenvalues[0], 2.0, 1e-2);
  for (double res : r.residuals) EXPECT_LE(res, tol);

  const Eigen::MatrixXd G = r.eigenvectors.transpose() * (op.M * r.eigenvectors);
  EXPECT_LE((G - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
  for (int j = 0; j < 3; ++j) {
    const Eigen::VectorXd u = r.eigenvectors.col(j);
    EXPECT_NEAR(u.dot(op.K * u) / u.dot(op.M * u), r.eigenvalues[j], 1e-9 * r.eigenvalues[j]);
    // orthogonal to constants in the M inner product
    EXPECT_NEAR((op.M * u).sum(), 0.0, 1e-10);
  }
}

TEST(Spectral, RefinementApproachesFromAbove) {
  std::vector<double> mu;
  for (int s : {3, 4, 5}) mu.push_back(smallest_nonzero(sphere_operator(s), 1, 1e-10).eigenvalues[0]);
  EXPECT_GT(mu[0], mu[1]);
  EXPECT_GT(mu[1], mu[2]);
  EXPECT_GT(mu[2], 2.0);
}

TEST(Spectral, InvariantUnderSeedAndPermutation) {
  const AssembledOperator op = sphere_operator(3);
  const EigenResult a = smallest_nonzero(op, 4, 1e-11, 42);
  const EigenResult b = smallest_nonzero(op, 4, 1e-11, 987654321);
  Eigen::VectorXi perm(op.K.rows());
  std::iota(perm.data(), perm.data() + perm.size(), 0);
  std::reverse(perm.data(), perm.data() + perm.size());
  std::swap(perm(3), perm(17));
  Eigen::PermutationMatrix<Eigen::Dynamic> P(perm);
  AssembledOperator q = op;
  q.K = permuted(op.K, P);
  q.M = permuted(op.M, P);
  const EigenResult c = smallest_nonzero(q, 4, 1e-11, 42);
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(a.eigenvalues[j], b.eigenvalues[j], 1e-10 * a.eigenvalues[j]);
    EXPECT_NEAR(a.eigenvalues[j], c.eigenvalues[j], 1e-10 * a.eigenvalues[j]);
  }
}

TEST(Spectral, FactorizationFailureOnIndefiniteK) {
  AssembledOperator op = sphere_operator(2);
  op.K = -op.K;
  try {
    smallest_nonzero(op, 1, 1e-9);
    FAIL() << "expected FactorizationFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FactorizationFailure);
  }
}

TEST(Spectral, NoConvergenceReportsBestRitzPair) {
  SolverOptions o;
  o.tol = 0.0;
  o.max_basis = 8;
  o.max_restarts = 1;
  try {
    smallest_nonzero(sphere_operator(3), 1, o);
    FAIL() << "expected NoConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(AnalyticSpectrum, WorkedValues) {
  EXPECT_NEAR(analytic_sphere_spectrum(SphereOperator::schouten(4, 1.0), 1)[0], 4.0, 1e-14);
  EXPECT_NEAR(analytic_sphere_spectrum(SphereOperator::newton(2, 1.0, 0.0), 1)[0], 2.0, 1e-14);
  const auto lap = analytic_sphere_spectrum(SphereOperator::laplacian(2, 1.0), 3);
  EXPECT_EQ(lap, (std::vector<double>{2.0, 6.0, 12.0}));
  // geodesic sphere in S^4: n(n-1) alpha (alpha^2 + kappa) = 12
  EXPECT_NEAR(analytic_sphere_spectrum(SphereOperator::newton(3, 1.0, 1.0), 1)[0], 12.0, 1e-13);
  EXPECT_NEAR(analytic_sphere_spectrum(SphereOperator::newton(2, 2.0, -1.0), 1)[0], 12.0, 1e-13);
  // S^2 of curvature 4 is the sphere of radius 1/2
  EXPECT_NEAR(analytic_sphere_spectrum(SphereOperator::laplacian(2, 4.0), 1)[0], 8.0, 1e-14);
}

TEST(AnalyticSpectrum, SchoutenRejectedOnSurfaces) {
  try {
    analytic_sphere_spectrum(SphereOperator::schouten(2, 1.0), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchoutenUndefined);
  }
}

TEST(AnalyticSpectrum, HarmonicMultiplicities) {
  EXPECT_EQ(sphere_harmonic_multiplicity(2, 1), 3);
  EXPECT_EQ(sphere_harmonic_multiplicity(2, 2), 5);
  EXPECT_EQ(sphere_harmonic_multiplicity(4, 1), 5);
  EXPECT_EQ(sphere_harmonic_multiplicity(4, 2), 14);
}

TEST(AnalyticSpectrum, MatchesFemOnUnitSphere) {
  const EigenResult r = smallest_nonzero(sphere_operator(4), 8, 1e-9);
  const auto exact = analytic_sphere_spectrum(SphereOperator::laplacian(2, 1.0), 2);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.eigenvalues[j], exact[0], 1e-2);
  for (int j = 3; j < 8; ++j) EXPECT_NEAR(r.eigenvalues[j], exact[1], 3e-2);
}

TEST(Claim1Defect, ExactForEigenpairsAndLargeForRandomVectors) {
  const AssembledOperator op = sphere_operator(3);
  const EigenResult r = smallest_nonzero(op, 1, 1e-11);
  EXPECT_LE(discrete_claim1_defect(op, op, r.eigenvectors.col(0), r.eigenvalues[0]), 1e-10);

  CounterRng rng(7, 0);
  Eigen::VectorXd v(op.K.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-1.0, 1.0);
  EXPECT_GT(discrete_claim1_defect(op, op, v, r.eigenvalues[0]), 0.5);
}

TEST(Claim1Defect, AnisotropicCoefficientOnFlatTorus) {
  const ChartManifold flat = torus(2, kTwoPi, TorusPerturbation::None);
  SymmetricTensorField aniso = closed_form_field<2>("aniso", [](int, auto x) {
    using T = std::remove_cvref_t<decltype(x[0])>;
    return std::vector<T>{0.0 * x[0] + 2.0, 0.0 * x[0] + 0.5, 0.0 * x[0] + 0.5, 0.0 * x[0] + 1.0};
  });
  const PeriodicGrid grid(flat, {24});
  const AssembledOperator op_phi = assemble(grid, aniso);
  const AssembledOperator op_g = assemble(grid, metric_field());
  const EigenResult r = smallest_nonzero(op_phi, 1, 1e-11);
  EXPECT_LE(discrete_claim1_defect(op_phi, op_g, r.eigenvectors.col(0), r.eigenvalues[0]), 1e-8);
}
