// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "spectra_bochner/bounds.hpp"
#include "spectra_bochner/harness.hpp"
#include "spectra_bochner/spectral.hpp"

using namespace spectra_bochner;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

Outcome sphere_schouten() {
  Outcome o;
  char buf[128];
  for (int n : {4, 5, 6}) {
    // spherical harmonics of degree 1 have eigenvalue n on the unit sphere and S = g/2
    const double expect = n * (n - 2) / 2.0;
    const double mu = analytic_sphere_spectrum(SphereOperator::schouten(n, 1.0), 1)[0];
    SchoutenBoundInput in;
    in.n = n;
    in.R = n * (n - 1.0);
    in.K0 = 1.0;
    in.L0 = n - 1.0;
    const double b = schouten_bound(in);
    const bool ok = rel_close(mu, expect, 1e-12) && rel_close(b, mu, 1e-12);
    o.passed = o.passed && ok;
    std::snprintf(buf, sizeof buf, "n=%d mu1=%.15g bound=%.15g; ", n, mu, b);
    o.detail += buf;
  }
  return o;
}

Outcome sphere_newton() {
  Outcome o;
  char buf[128];
  struct Case {
    int n;
    double kappa, alpha;
  };
  for (const Case c : {Case{2, 0, 1}, Case{2, 0, 2}, Case{3, 1, 1}, Case{2, -1, 2}}) {
    const double expect = c.n * (c.n - 1.0) * c.alpha * (c.alpha * c.alpha + c.kappa);
    NewtonBoundInput in;
    in.n = c.n;
    in.kappa = c.kappa;
    in.alpha = c.alpha;
    const double b = newton_bound(in);
    const double mu = analytic_sphere_spectrum(SphereOperator::newton(c.n, c.alpha, c.kappa), 1)[0];
    const bool ok = rel_close(b, expect, 1e-12) && rel_close(mu, expect, 1e-12);
    o.passed = o.passed && ok;
    std::snprintf(buf, sizeof buf, "(%d,%g,%g) bound=%.15g; ", c.n, c.kappa, c.alpha, b);
    o.detail += buf;
  }
  return o;
}

Outcome from_suite(const SuiteResult& r, const std::vector<std::string>& keys) {
  Outcome o;
  o.passed = r.passed;
  char buf[128];
  for (const auto& k : keys) {
    std::snprintf(buf, sizeof buf, "%s=%.6g; ", k.c_str(), r.get(k));
    o.detail += buf;
  }
  for (const auto& f : r.failures) o.detail += "[" + f + "] ";
  return o;
}

}  // namespace

int main() {
  HarnessConfig cfg;
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "sphere equality, Schouten", 1.0, sphere_schouten},
      {2, "sphere equality, L1", 1.0, sphere_newton},
      {3, "FEM on the unit sphere", 120.0,
       [&] {
         return from_suite(sphere_fem_suite(cfg, 4, 6),
                           {"mu1.subdiv4", "mu1.subdiv5", "mu1.subdiv6", "order.subdiv6", "extrapolated"});
       }},
      {4, "strict inequality on the ellipsoid", 180.0,
       [&] { return from_suite(ellipsoid_compare_suite(cfg), {"mu1", "bound", "margin", "error_estimate"}); }},
      {5, "Bochner identity residuals", 30.0,
       [&] { return from_suite(bochner_suite(cfg), {"max_residual", "max_c_spread", "evaluations"}); }},
      {6, "trace inequality trials", 10.0,
       [&] { return from_suite(newton_suite(cfg), {"violations", "worst_defect", "equality_hits", "false_equalities"}); }},
      {7, "Q(A) lower bound trials", 10.0,
       [&] {
         return from_suite(qa_suite(cfg), {"kappa>0.violations", "kappa<=0.violations", "kappa>0.planted_violations",
                                           "kappa<=0.planted_violations"});
       }},
      {8, "divergence identities", 30.0,
       [&] { return from_suite(divergence_suite(cfg), {"max_analytic_defect", "max_div_p1", "fd_order"}); }},
      {9, "discrete operator consistency", 60.0,
       [&] {
         return from_suite(consistency_suite(cfg), {"cotangent_max_diff", "order.flat_anisotropic",
                                                    "order.mixed_metric", "control.max_error"});
       }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.passed = false;
      o.detail += "[over budget " + std::to_string(c.budget_seconds) + " s] ";
    }
    if (!o.passed) ++failed;
    std::printf("%s %d %s (%.2f s): %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
