#pragma once

// Smallest nonzero eigenvalues of the pencil K u = mu M u, and closed-form
// spectra on round spheres.
//
// Solver: block Lanczos on the shift-inverted operator (K + eps M)^{-1} M,
// which is self-adjoint in the M inner product. Constants are projected out
// M-orthogonally at every step, the basis is fully reorthogonalized (twice),
// and the iteration restarts from the current Ritz block when the basis is
// full.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "spectra_bochner/assemble.hpp"
#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/rng.hpp"

namespace spectra_bochner {

struct SolverOptions {
  double tol = 1e-9;
  std::uint64_t seed = 42;
  int block_size = 0;  // 0: max(k, 3)
  int max_basis = 0;   // 0: chosen from k and the problem size
  int max_restarts = 30;
};

struct EigenResult {
  std::vector<double> eigenvalues;  // ascending, nonzero modes only
  Eigen::MatrixXd eigenvectors;     // M-orthonormal columns
  std::vector<double> residuals;    // |K u - mu M u| / (|K u| + |mu| |M u|)
  int iterations = 0;               // block steps
  int restarts = 0;
  double shift = 0.0;
  int basis_size = 0;
};

namespace detail {

class ShiftInvert {
 public:
  ShiftInvert(const SparseMatrix& K, const SparseMatrix& M, double eps) : M_(M) {
    SparseMatrix A = K + eps * M;
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success)
      fail(ErrorKind::FactorizationFailure, "sparse LDL^T factorization of K + eps M failed");
    const Eigen::VectorXd d = ldlt_.vectorD();
    if (!(d.minCoeff() > 0.0))
      fail(ErrorKind::FactorizationFailure, "K + eps M is not positive definite (K must be PSD, M SPD)");
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const { return ldlt_.solve(M_ * X); }

 private:
  const SparseMatrix& M_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

}  // namespace detail

inline EigenResult smallest_nonzero(const AssembledOperator& op, int k, const SolverOptions& opt = {}) {
  const SparseMatrix& K = op.K;
  const SparseMatrix& M = op.M;
  const Eigen::Index N = K.rows();
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be >= 1");
  if (K.cols() != N || M.rows() != N || M.cols() != N) fail(ErrorKind::InvalidArgument, "K and M must be square and of equal size");
  if (N < k + 2) fail(ErrorKind::InvalidArgument, "problem too small for the requested number of eigenvalues");

  double trK = 0.0, trM = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    trK += K.coeff(i, i);
    trM += M.coeff(i, i);
  }
  if (!(trM > 0.0)) fail(ErrorKind::NotPositiveDefinite, "mass matrix has nonpositive trace");
  const double eps = 1e-8 * std::max(trK, std::numeric_limits<double>::min()) / trM;
  const detail::ShiftInvert op_inv(K, M, eps);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(N);
  const Eigen::VectorXd M1 = M * ones;
  const double one_norm = ones.dot(M1);
  auto deflate = [&](Eigen::MatrixXd& X) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) X.col(c) -= (M1.dot(X.col(c)) / one_norm) * ones;
  };

  const int b = opt.block_size > 0 ? opt.block_size : std::max(k, 3);
  const Eigen::Index cap = N - 1;  // dimension of the complement of constants
  Eigen::Index max_basis = opt.max_basis > 0 ? opt.max_basis : std::max<Eigen::Index>(20 * b, 4 * k + 40);
  max_basis = std::min(max_basis, cap);

  CounterRng rng(opt.seed, 0x1a2c705ULL);
  auto random_block = [&](Eigen::Index cols) {
    Eigen::MatrixXd X(N, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index i = 0; i < N; ++i) X(i, c) = rng.uniform(-1.0, 1.0);
    return X;
  };

  Eigen::MatrixXd V(N, 0), MV(N, 0), W(N, 0);  // basis, M*basis, operator*basis

  // Appends the columns of X after M-orthogonalizing them against the basis
  // and each other; columns that collapse are replaced by random vectors.
  auto extend = [&](Eigen::MatrixXd X) {
    for (Eigen::Index c = 0; c < X.cols() && V.cols() < max_basis; ++c) {
      Eigen::VectorXd x = X.col(c);
      for (int attempt = 0; attempt < 5; ++attempt) {
        const double before = std::sqrt(std::max(0.0, x.dot(M * x)));
        for (int pass = 0; pass < 2; ++pass) {
          x -= (M1.dot(x) / one_norm) * ones;
          if (V.cols() > 0) x -= V * (MV.transpose() * x);
        }
        const Eigen::VectorXd Mx = M * x;
        const double norm = std::sqrt(std::max(0.0, x.dot(Mx)));
        if (norm > 1e-10 * before && norm > 0.0) {
          V.conservativeResize(Eigen::NoChange, V.cols() + 1);
          MV.conservativeResize(Eigen::NoChange, MV.cols() + 1);
          V.col(V.cols() - 1) = x / norm;
          MV.col(MV.cols() - 1) = Mx / norm;
          break;
        }
        x = random_block(1).col(0);
      }
    }
  };

  EigenResult res;
  res.shift = eps;
  Eigen::MatrixXd start = random_block(b);
  deflate(start);
  std::vector<double> best_res;
  Eigen::MatrixXd best_U;
  std::vector<double> best_mu;

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    res.restarts = restart;
    V.resize(N, 0);
    MV.resize(N, 0);
    W.resize(N, 0);
    extend(start);
    Eigen::Index applied = 0;
    while (true) {
      // apply the operator to the newest block
      const Eigen::Index nb = V.cols() - applied;
      Eigen::MatrixXd Y = op_inv.apply(V.middleCols(applied, nb));
      deflate(Y);
      W.conservativeResize(Eigen::NoChange, W.cols() + nb);
      W.middleCols(applied, nb) = Y;
      applied = V.cols();
      ++res.iterations;

      // Rayleigh-Ritz in the M inner product
      Eigen::MatrixXd T = MV.transpose() * W;
      T = 0.5 * (T + T.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const Eigen::Index m = T.rows();
      const int kk = static_cast<int>(std::min<Eigen::Index>(k, m));
      Eigen::MatrixXd U(N, kk);
      std::vector<double> mu(kk), r(kk);
      for (int j = 0; j < kk; ++j) {
        // largest theta = smallest mu
        U.col(j) = V * es.eigenvectors().col(m - 1 - j);
        const Eigen::VectorXd Ku = K * U.col(j);
        const Eigen::VectorXd Mu = M * U.col(j);
        mu[j] = U.col(j).dot(Ku) / U.col(j).dot(Mu);
        r[j] = (Ku - mu[j] * Mu).norm() / (Ku.norm() + std::abs(mu[j]) * Mu.norm());
      }
      const double worst = kk == k ? *std::max_element(r.begin(), r.end()) : std::numeric_limits<double>::infinity();
      if (best_res.empty() || (kk == k && worst < *std::max_element(best_res.begin(), best_res.end()))) {
        best_res = r;
        best_U = U;
        best_mu = mu;
      }
      if (kk == k && worst <= opt.tol) {
        res.basis_size = static_cast<int>(V.cols());
        std::vector<int> order(k);
        for (int j = 0; j < k; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](int a, int c) { return mu[a] < mu[c]; });
        res.eigenvectors.resize(N, k);
        for (int j = 0; j < k; ++j) {
          res.eigenvalues.push_back(mu[order[j]]);
          res.residuals.push_back(r[order[j]]);
          res.eigenvectors.col(j) = U.col(order[j]);
        }
        return res;
      }
      if (V.cols() >= max_basis) {
        // restart from the Ritz block plus the next Krylov directions
        const int keep = static_cast<int>(std::min<Eigen::Index>(std::max(b, k), m));
        start.resize(N, keep);
        for (int j = 0; j < keep; ++j) start.col(j) = V * es.eigenvectors().col(m - 1 - j);
        break;
      }
      extend(W.middleCols(applied - nb, nb));
      if (V.cols() == applied) {
        // Krylov space is invariant; top up with fresh directions
        extend(random_block(b));
        if (V.cols() == applied) {
          res.basis_size = static_cast<int>(V.cols());
          break;
        }
      }
    }
  }
  std::string msg = "Lanczos did not converge; best Ritz values";
  for (size_t j = 0; j < best_mu.size(); ++j)
    msg += " " + std::to_string(best_mu[j]) + " (residual " + std::to_string(best_res[j]) + ")";
  fail(ErrorKind::NoConvergence, msg);
}

inline EigenResult smallest_nonzero(const AssembledOperator& op, int k, double tol, std::uint64_t seed = 42) {
  SolverOptions o;
  o.tol = tol;
  o.seed = seed;
  return smallest_nonzero(op, k, o);
}

/// Operator whose spectrum is known in closed form on a round sphere.
struct SphereOperator {
  enum class Kind { Laplacian, Schouten, NewtonL1 };
  Kind kind = Kind::Laplacian;
  int n = 2;
  double K = 1.0;      // curvature of the sphere (Laplacian, Schouten)
  double alpha = 1.0;  // umbilicity of the geodesic sphere (NewtonL1)
  double kappa = 0.0;  // ambient space form curvature (NewtonL1)

  static SphereOperator laplacian(int n, double K) { return {Kind::Laplacian, n, K, 0.0, 0.0}; }
  static SphereOperator schouten(int n, double K) { return {Kind::Schouten, n, K, 0.0, 0.0}; }
  static SphereOperator newton(int n, double alpha, double kappa) { return {Kind::NewtonL1, n, 0.0, alpha, kappa}; }

  /// Intrinsic curvature and the constant factor c with phi = c g.
  double curvature() const { return kind == Kind::NewtonL1 ? alpha * alpha + kappa : K; }
  double coefficient() const {
    switch (kind) {
      case Kind::Laplacian: return 1.0;
      case Kind::Schouten: return 0.5 * (n - 2) * K;
      case Kind::NewtonL1: return (n - 1) * alpha;
    }
    return 0.0;
  }
};

/// Dimension of the degree-k spherical harmonics on S^n.
inline long sphere_harmonic_multiplicity(int n, int k) {
  // C(n+k, k) - C(n+k-2, k-2)
  auto binom = [](long a, long b) -> long {
    if (b < 0 || b > a) return 0;
    long r = 1;
    for (long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  return binom(n + k, k) - binom(n + k - 2, k - 2);
}

/// The first `modes` distinct nonzero eigenvalues c * k(k+n-1) * K,
/// k = 1..modes.
inline std::vector<double> analytic_sphere_spectrum(const SphereOperator& op, int modes) {
  if (op.n < 2) fail(ErrorKind::DimensionTooSmall, "sphere dimension must be >= 2");
  if (op.kind == SphereOperator::Kind::Schouten && op.n < 3)
    fail(ErrorKind::SchoutenUndefined, "the Schouten tensor is undefined for n = 2");
  if (!(op.curvature() > 0.0)) fail(ErrorKind::InvalidArgument, "sphere curvature must be positive");
  if (op.kind == SphereOperator::Kind::NewtonL1 && !(op.alpha > 0.0))
    fail(ErrorKind::InvalidArgument, "alpha must be positive");
  std::vector<double> out;
  for (int k = 1; k <= modes; ++k) out.push_back(op.coefficient() * k * (k + op.n - 1) * op.curvature());
  return out;
}

/// |u^T K_phi M^{-1} K_g u - mu u^T K_g u| / (mu u^T K_g u).
inline double discrete_claim1_defect(const AssembledOperator& op_phi, const AssembledOperator& op_g,
                                     const Eigen::VectorXd& u, double mu) {
  Eigen::SimplicialLDLT<SparseMatrix> mass(op_phi.M);
  if (mass.info() != Eigen::Success) fail(ErrorKind::FactorizationFailure, "mass matrix factorization failed");
  const Eigen::VectorXd Kg_u = op_g.K * u;
  const double energy = u.dot(Kg_u);
  const double lhs = (op_phi.K * u).dot(mass.solve(Kg_u));
  return std::abs(lhs - mu * energy) / (std::abs(mu) * energy);
}

}  // namespace spectra_bochner
