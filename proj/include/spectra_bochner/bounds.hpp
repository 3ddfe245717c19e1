#pragma once

// Closed-form lower bounds for the first nonzero eigenvalue of the Schouten
// operator and of L1, hypothesis estimation, and comparison against computed
// or analytic eigenvalues.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/fields.hpp"
#include "spectra_bochner/geometry.hpp"
#include "spectra_bochner/hypersurface.hpp"

namespace spectra_bochner {

/// Advisory hypothesis flags: nullopt means not checked, false means the
/// check failed.
struct HypothesisFlags {
  std::optional<bool> harmonic_weyl;
  std::optional<bool> constant_R;
  std::optional<bool> schouten_positive;
  std::optional<bool> pinching;  // 0 < alpha I <= A <= a alpha I with n a > 1
  bool estimated = false;        // constants come from sampling, not closed form

  bool any_failed() const {
    for (const auto& f : {harmonic_weyl, constant_R, schouten_positive, pinching})
      if (f && !*f) return true;
    return false;
  }
};

struct SchoutenBoundInput {
  int n = 4;
  double R = 0.0;
  double K0 = 0.0;
  double L0 = 0.0;
  HypothesisFlags flags;
};

struct NewtonBoundInput {
  int n = 2;
  double kappa = 0.0;
  double alpha = 1.0;
  double a = 1.0;
  double sigma = 0.0;
  HypothesisFlags flags;
};

inline double schouten_lambda0(const SchoutenBoundInput& in) { return in.L0 - in.R / (2.0 * (in.n - 1)); }

inline double schouten_gamma(const SchoutenBoundInput& in) {
  return in.L0 * in.L0 - (in.R / (2.0 * (in.n - 1)) + in.K0) * in.L0 + 0.5 * in.K0 * in.R;
}

inline double schouten_bound(const SchoutenBoundInput& in) {
  if (in.n < 4) fail(ErrorKind::DimensionTooSmall, "the Schouten bound needs n >= 4");
  const double denom = in.R - 2.0 * in.L0;
  if (!(denom > 0.0)) fail(ErrorKind::DenominatorNonpositive, "R - 2 L0 must be positive");
  const int n = in.n;
  return (n - 2.0) / (2.0 * (n - 1)) * (in.R / denom) * schouten_gamma(in);
}

inline double newton_bracket(const NewtonBoundInput& in) {
  const int n = in.n;
  const double curv = in.kappa > 0.0 ? 2.0 * in.kappa * (n - 1) * (n - 1) * in.alpha
                                     : 2.0 * in.kappa * (n - 1) * (n - 1) * in.a * in.alpha;
  return 2.0 * (n - 1) * std::pow(in.alpha, 3) * (n - in.a * in.a) + curv;
}

inline double newton_bound(const NewtonBoundInput& in) {
  if (in.n < 2) fail(ErrorKind::DimensionTooSmall, "hypersurface dimension must be >= 2");
  if (!(in.alpha > 0.0)) fail(ErrorKind::InvalidArgument, "alpha must be positive");
  if (!(in.a >= 1.0)) fail(ErrorKind::InvalidArgument, "a must be >= 1");
  const double na = in.n * in.a;
  return 0.5 * (na / (na - 1.0)) * (newton_bracket(in) - in.sigma);
}

// ---------------------------------------------------------------------------
// Hypothesis estimation

struct SchoutenEstimateOptions {
  SamplePlan plan;
  double codazzi_tolerance = 1e-8;
  double constant_R_tolerance = 1e-8;
};

/// R, K0 and L0 from a manifold, with hypothesis flags. On the analytic
/// sphere the values are exact; elsewhere they are sample minima.
inline SchoutenBoundInput estimate_schouten_input(const ChartManifold& m, const SchoutenEstimateOptions& opt = {}) {
  SchoutenBoundInput in;
  in.n = m.dim;
  in.flags.estimated = m.kind != AtlasKind::AnalyticSphere;
  in.K0 = min_sectional(m, opt.plan);
  in.L0 = min_ricci(m, opt.plan);
  double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin, smin = rmin, codazzi = 0.0;
  const SymmetricTensorField S = curvature_field(CurvatureTensorKind::Schouten);
  for (const auto& p : m.sample_points(opt.plan.points, opt.plan.seed)) {
    const CurvatureBundle cb = curvature_at(m, p);
    rmin = std::min(rmin, cb.scalar);
    rmax = std::max(rmax, cb.scalar);
    if (cb.schouten) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*cb.schouten);
      smin = std::min(smin, es.eigenvalues().minCoeff());
    }
    if (m.dim >= 3) codazzi = std::max(codazzi, codazzi_defect(S, m, p));
  }
  in.R = 0.5 * (rmin + rmax);
  in.flags.constant_R = rmax - rmin <= opt.constant_R_tolerance * std::max(1.0, std::abs(in.R));
  if (m.dim >= 3) {
    in.flags.harmonic_weyl = codazzi <= opt.codazzi_tolerance;
    in.flags.schouten_positive = smin > 0.0;
  }
  return in;
}

inline NewtonBoundInput estimate_newton_input(const ImmersedHypersurface& hs, const SamplePlan& plan = {}) {
  const PinchingConstants pc = pinching_constants(hs, plan);
  NewtonBoundInput in;
  in.n = hs.n;
  in.kappa = hs.kappa;
  in.alpha = pc.alpha;
  in.a = pc.a;
  in.sigma = pc.sigma;
  in.flags.estimated = !hs.analytic_umbilic();
  in.flags.pinching = pc.alpha > 0.0 && pc.a >= 1.0 && hs.n * pc.a > 1.0;
  return in;
}

// ---------------------------------------------------------------------------
// Comparison

enum class Verdict { EqualityCase, InequalityHolds, HypothesisFailed, ViolationSuspected };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::EqualityCase: return "EqualityCase";
    case Verdict::InequalityHolds: return "InequalityHolds";
    case Verdict::HypothesisFailed: return "HypothesisFailed";
    case Verdict::ViolationSuspected: return "ViolationSuspected";
  }
  return "?";
}

struct BoundReport {
  double bound_value = 0.0;
  std::optional<double> computed_mu1;
  double margin = 0.0;
  double error_estimate = 0.0;  // 0 for analytic eigenvalues
  double tolerance = 0.0;       // used for the equality decision
  HypothesisFlags flags;
  Verdict verdict = Verdict::InequalityHolds;
  std::vector<std::string> notes;
};

/// `error_estimate` is nullopt for an analytic mu1 (equality tolerance 1e-6
/// relative) and the refinement error of a discrete mu1 otherwise
/// (tolerance three times that error).
inline BoundReport compare(double bound, double mu1, std::optional<double> error_estimate, const HypothesisFlags& flags,
                           double analytic_rel_tol = 1e-6) {
  BoundReport r;
  r.bound_value = bound;
  r.computed_mu1 = mu1;
  r.margin = mu1 - bound;
  r.flags = flags;
  r.error_estimate = error_estimate.value_or(0.0);
  r.tolerance = error_estimate ? 3.0 * *error_estimate : analytic_rel_tol * std::max(std::abs(mu1), 1e-300);
  if (flags.any_failed())
    r.verdict = Verdict::HypothesisFailed;
  else if (std::abs(r.margin) <= r.tolerance)
    r.verdict = Verdict::EqualityCase;
  else if (r.margin < -r.error_estimate)
    r.verdict = Verdict::ViolationSuspected;
  else
    r.verdict = Verdict::InequalityHolds;
  if (flags.estimated) r.notes.push_back("estimated-hypothesis: constants are sample estimates");
  return r;
}

inline BoundReport compare(const SchoutenBoundInput& in, double mu1, std::optional<double> error_estimate = std::nullopt) {
  BoundReport r = compare(schouten_bound(in), mu1, error_estimate, in.flags);
  r.notes.push_back("Gamma = " + std::to_string(schouten_gamma(in)) + " from L0^2 - (R/(2(n-1)) + K0) L0 + K0 R/2");
  return r;
}

inline BoundReport compare(const NewtonBoundInput& in, double mu1, std::optional<double> error_estimate = std::nullopt) {
  return compare(newton_bound(in), mu1, error_estimate, in.flags);
}

// ---------------------------------------------------------------------------
// Refinement studies

struct RefinementEstimate {
  double order = 0.0;         // observed order from the last three levels
  double extrapolated = 0.0;  // Richardson value
  double error = 0.0;         // |finest - extrapolated|
};

/// Levels ordered coarse to fine; at least three.
inline RefinementEstimate richardson(const std::vector<double>& h, const std::vector<double>& values) {
  const size_t L = values.size();
  if (L < 3 || h.size() != L) fail(ErrorKind::InvalidArgument, "richardson needs three or more levels");
  const double d1 = values[L - 2] - values[L - 3], d2 = values[L - 1] - values[L - 2];
  const double ratio = h[L - 2] / h[L - 1];
  RefinementEstimate e;
  e.order = std::log(std::abs(d1 / d2)) / std::log(ratio);
  const double rp = std::pow(ratio, e.order);
  e.extrapolated = values[L - 1] + d2 / (rp - 1.0);
  e.error = std::abs(values[L - 1] - e.extrapolated);
  return e;
}

}  // namespace spectra_bochner
