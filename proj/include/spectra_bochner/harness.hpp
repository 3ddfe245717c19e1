#pragma once

// Property trials for the pointwise matrix inequalities, named verification
// suites, and the config file that selects them.
//
// Config format: `key = value` lines grouped under [manifold], [solver] and
// [suites]; '#' starts a comment. Lists are comma separated except manifold
// specs, which contain commas themselves and are separated by ';'.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spectra_bochner/assemble.hpp"
#include "spectra_bochner/bounds.hpp"
#include "spectra_bochner/boxop.hpp"
#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/fields.hpp"
#include "spectra_bochner/geometry.hpp"
#include "spectra_bochner/hypersurface.hpp"
#include "spectra_bochner/mesh.hpp"
#include "spectra_bochner/rng.hpp"
#include "spectra_bochner/spec_string.hpp"
#include "spectra_bochner/spectral.hpp"

namespace spectra_bochner {

// ---------------------------------------------------------------------------
// Property trials

struct TrialConfig {
  long trials = 100000;
  int dim_min = 2;
  int dim_max = 8;
  std::uint64_t seed = 42;

  // tr(A^2 B) >= (tr AB)^2 / tr B
  double entry_bound = 1.0;  // entries of A uniform in [-b, b]
  double eig_lo = 0.1;       // spectrum of B
  double eig_hi = 10.0;
  int scalar_every = 10;     // every k-th trial uses A = alpha I

  // Q(A) bound
  double alpha_lo = 0.1;
  double alpha_hi = 3.0;
  double a_lo = 1.0;
  double a_hi = 3.0;
  double kappa_max = 5.0;  // |kappa| <= kappa_max * alpha^2

  double violation_tol = 1e-10;
  double equality_tol = 1e-10;
  double scalar_tol = 1e-6;
};

struct NewtonTrialReport {
  long trials = 0;
  long violations = 0;
  double worst_defect = std::numeric_limits<double>::infinity();  // min of defect / tr B
  long equality_hits = 0;
  long false_equalities = 0;  // small defect with A far from a multiple of I
  long scalar_trials = 0;
};

/// Normalized defect (tr(A^2 B) - (tr AB)^2 / tr B) / tr B.
inline double newton_defect(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const double trB = B.trace();
  const double trAB = (A * B).trace();
  return ((A * A * B).trace() - trAB * trAB / trB) / trB;
}

namespace detail {

inline Eigen::MatrixXd random_orthogonal(CounterRng& rng, int n) {
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace detail

inline NewtonTrialReport newton_inequality_trials(const TrialConfig& cfg) {
  NewtonTrialReport rep;
  for (long t = 0; t < cfg.trials; ++t) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(t));
    const int n = rng.uniform_int(cfg.dim_min, cfg.dim_max);
    const bool scalar = cfg.scalar_every > 0 && t % cfg.scalar_every == 0;
    Eigen::MatrixXd A(n, n);
    if (scalar) {
      A = rng.uniform(-3.0, 3.0) * Eigen::MatrixXd::Identity(n, n);
      ++rep.scalar_trials;
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-cfg.entry_bound, cfg.entry_bound);
      A = 0.5 * (A + A.transpose()).eval();
    }
    const Eigen::MatrixXd Q = detail::random_orthogonal(rng, n);
    Eigen::VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam(i) = rng.uniform(cfg.eig_lo, cfg.eig_hi);
    const Eigen::MatrixXd B = Q * lam.asDiagonal() * Q.transpose();

    const double d = newton_defect(A, B);
    ++rep.trials;
    rep.worst_defect = std::min(rep.worst_defect, d);
    if (d < -cfg.violation_tol) ++rep.violations;
    if (d < cfg.equality_tol) {
      ++rep.equality_hits;
      const double alpha = (A * B).trace() / B.trace();
      if ((A - alpha * Eigen::MatrixXd::Identity(n, n)).norm() > cfg.scalar_tol) ++rep.false_equalities;
    }
  }
  return rep;
}

enum class KappaSign { Positive, NonPositive };

struct QaTrialReport {
  long trials = 0;
  long violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min (min diag Q - bound) / alpha^3
  long equality_trials = 0;
  double equality_error = 0.0;  // max |min diag Q - bound| / alpha^3 over A = alpha I
  bool planted = false;
};

/// Diagonal shape operators with h_i in [alpha, a alpha]; Q(A) is a
/// polynomial in A, so diagonal A covers the general case. With `planted`
/// the h_i are drawn from [alpha/2, 2 a alpha] while (alpha, a) are still
/// claimed, which must produce violations.
inline QaTrialReport qa_bound_trials(const TrialConfig& cfg, KappaSign sign, bool planted = false) {
  QaTrialReport rep;
  rep.planted = planted;
  const std::uint64_t stream_base = sign == KappaSign::Positive ? 0x51ULL << 40 : 0x52ULL << 40;
  for (long t = 0; t < cfg.trials; ++t) {
    CounterRng rng(cfg.seed ^ (planted ? 0x9e3779b9ULL : 0ULL), stream_base + static_cast<std::uint64_t>(t));
    const int n = rng.uniform_int(cfg.dim_min, cfg.dim_max);
    const double alpha = rng.uniform(cfg.alpha_lo, cfg.alpha_hi);
    const bool scalar = cfg.scalar_every > 0 && t % cfg.scalar_every == 0 && !planted;
    const double a = scalar ? 1.0 : rng.uniform(cfg.a_lo, cfg.a_hi);
    const double kscale = cfg.kappa_max * alpha * alpha;
    const double kappa = sign == KappaSign::Positive ? rng.uniform(0.0, kscale) + 1e-12 * kscale : -rng.uniform(0.0, kscale);
    Eigen::VectorXd h(n);
    const double lo = planted ? 0.5 * alpha : alpha, hi = planted ? 2.0 * a * alpha : a * alpha;
    for (int i = 0; i < n; ++i) h(i) = scalar ? alpha : rng.uniform(lo, hi);
    const double min_q = q_diagonal(h, kappa).minCoeff();
    const double bound = q_lower_bound(n, kappa, alpha, a);
    const double margin = (min_q - bound) / (alpha * alpha * alpha);
    ++rep.trials;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -cfg.violation_tol) ++rep.violations;
    if (scalar) {
      ++rep.equality_trials;
      rep.equality_error = std::max(rep.equality_error, std::abs(margin));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Config

struct HarnessConfig {
  // [manifold]
  std::vector<std::string> manifolds = {"torus2:L=6.283185307179586", "torus2:L=6.283185307179586,perturb=mixed,eps=0.15",
                                        "sphere:n=4,K=1"};
  std::string surface = "ellipsoid:1,1,1.1";
  // [solver]
  double tol = 1e-9;
  int k = 3;
  std::uint64_t seed = 42;
  int refine_lo = 3;
  int refine_hi = 5;
  int max_restarts = 30;
  // [suites]
  std::vector<std::string> suites;
  long trials = 100000;
  int samples = 200;
  std::vector<double> c_values = {0.0, 1.0, 7.3};
  bool corrupt_phi = false;

  SolverOptions solver() const {
    SolverOptions o;
    o.tol = tol;
    o.seed = seed;
    o.max_restarts = max_restarts;
    return o;
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(ErrorKind::ConfigParse, "not a boolean: '" + v + "'");
}

}  // namespace detail

/// "lo..hi" or a single level.
inline std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int v = static_cast<int>(SpecString::to_double(detail::trim(text)));
    return {v, v};
  }
  const int lo = static_cast<int>(SpecString::to_double(detail::trim(text.substr(0, dots))));
  const int hi = static_cast<int>(SpecString::to_double(detail::trim(text.substr(dots + 2))));
  if (hi < lo) fail(ErrorKind::ConfigParse, "empty range '" + text + "'");
  return {lo, hi};
}

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> names = {"bochner",  "divergence",      "newton",     "qa",
                                                 "sphere-equality", "sphere-fem", "ellipsoid-compare",
                                                 "consistency", "assembly"};
  return names;
}

inline HarnessConfig parse_config(std::istream& in) {
  HarnessConfig cfg;
  std::string line, section;
  int lineno = 0;
  bool manifolds_set = false;
  auto where = [&] { return " (line " + std::to_string(lineno) + ")"; };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::ConfigParse, "unterminated section header" + where());
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "manifold" && section != "solver" && section != "suites")
        fail(ErrorKind::ConfigParse, "unknown section [" + section + "]" + where());
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::ConfigParse, "expected key = value" + where());
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) fail(ErrorKind::ConfigParse, "key '" + key + "' outside a section" + where());
    auto number = [&] { return SpecString::to_double(value); };
    if (section == "manifold") {
      if (key == "spec" || key == "specs") {
        if (!manifolds_set) cfg.manifolds.clear();
        manifolds_set = true;
        for (auto& s : detail::split(value, ';')) cfg.manifolds.push_back(s);
      } else if (key == "surface") {
        cfg.surface = value;
      } else {
        fail(ErrorKind::ConfigParse, "unknown key '" + key + "' in [manifold]" + where());
      }
    } else if (section == "solver") {
      if (key == "tol")
        cfg.tol = number();
      else if (key == "k")
        cfg.k = static_cast<int>(number());
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(number());
      else if (key == "refine")
        std::tie(cfg.refine_lo, cfg.refine_hi) = parse_range(value);
      else if (key == "max_restarts")
        cfg.max_restarts = static_cast<int>(number());
      else
        fail(ErrorKind::ConfigParse, "unknown key '" + key + "' in [solver]" + where());
    } else {
      if (key == "run") {
        for (auto& s : detail::split(value, ',')) {
          if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
            fail(ErrorKind::ConfigParse, "unknown suite '" + s + "'" + where());
          cfg.suites.push_back(s);
        }
      } else if (key == "trials") {
        cfg.trials = static_cast<long>(number());
      } else if (key == "samples") {
        cfg.samples = static_cast<int>(number());
      } else if (key == "c") {
        cfg.c_values.clear();
        for (auto& s : detail::split(value, ',')) cfg.c_values.push_back(SpecString::to_double(s));
      } else if (key == "corrupt_phi") {
        cfg.corrupt_phi = detail::parse_bool(value);
      } else if (std::find(known_suites().begin(), known_suites().end(), key) != known_suites().end()) {
        if (detail::parse_bool(value)) cfg.suites.push_back(key);
      } else {
        fail(ErrorKind::ConfigParse, "unknown key '" + key + "' in [suites]" + where());
      }
    }
  }
  return cfg;
}

inline HarnessConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigParse, "cannot open config '" + path + "'");
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> failures;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  double seconds = 0.0;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      failures.push_back(what);
    }
  }
  void metric(const std::string& key, double value) { metrics.emplace_back(key, value); }
  double get(const std::string& key) const {
    for (const auto& [k, v] : metrics)
      if (k == key) return v;
    return std::numeric_limits<double>::quiet_NaN();
  }
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

template <class F>
SuiteResult timed(const std::string& name, F&& body) {
  SuiteResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const Error& e) {
    r.check(false, e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace detail

/// Mesh of a surface spec at the given icosphere subdivision level.
inline SurfaceMesh surface_mesh(const std::string& spec, int subdiv) {
  const SpecString s = SpecString::parse(spec);
  if (static_cast<int>(s.number("n", 2)) != 2) fail(ErrorKind::InvalidArgument, "only surfaces in R^3 can be meshed");
  if (s.name == "sphere") return icosphere(subdiv, s.number("r", 1.0));
  if (s.name == "ellipsoid") {
    std::vector<double> ax = s.positional_numbers();
    if (ax.empty()) ax = {s.number("a", 1.0), s.number("b", 1.0), s.number("c", 1.0)};
    if (ax.size() != 3) fail(ErrorKind::InvalidArgument, "ellipsoid needs three semi-axes");
    return ellipsoid_mesh(subdiv, Eigen::Vector3d(ax[0], ax[1], ax[2]));
  }
  if (s.name == "geodesic-sphere") {
    if (s.number("kappa", 0.0) != 0.0) fail(ErrorKind::InvalidArgument, "geodesic spheres with kappa != 0 are not meshed");
    return icosphere(subdiv, 1.0 / s.number("alpha", 1.0));
  }
  fail(ErrorKind::InvalidArgument, "no mesh for surface '" + spec + "'");
}

struct FemLevel {
  int subdiv = 0;
  int vertices = 0;
  double h = 0.0;
  double mu1 = 0.0;
  double residual = 0.0;
  double seconds = 0.0;
};

struct FemStudy {
  std::vector<FemLevel> levels;
  std::optional<RefinementEstimate> refinement;  // three or more levels

  /// Error estimate of level i: distance to the extrapolated value, or the
  /// last difference over three (order two assumed) with two levels.
  double error_estimate(size_t i) const {
    if (refinement) return std::abs(levels[i].mu1 - refinement->extrapolated);
    if (levels.size() >= 2) return std::abs(levels[1].mu1 - levels[0].mu1) / (i == 0 ? 1.0 : 3.0);
    return std::numeric_limits<double>::quiet_NaN();
  }
};

/// mu1 of L1 on meshes of `surface` for subdivisions lo..hi.
inline FemStudy fem_study(const std::string& surface, int lo, int hi, const SolverOptions& opt) {
  const ImmersedHypersurface hs = parse_surface(surface);
  if (hs.n != 2) fail(ErrorKind::InvalidArgument, "FEM studies need a surface in R^3");
  FemStudy st;
  for (int s = lo; s <= hi; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    const SurfaceMesh mesh = surface_mesh(surface, s);
    const AssembledOperator op = assemble(mesh, newton_provider(hs), Quadrature::OnePoint, "newton1");
    const EigenResult r = smallest_nonzero(op, 1, opt);
    FemLevel lv;
    lv.subdiv = s;
    lv.vertices = mesh.vertex_count();
    lv.h = mesh.mesh_size();
    lv.mu1 = r.eigenvalues[0];
    lv.residual = r.residuals[0];
    lv.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    st.levels.push_back(lv);
  }
  if (st.levels.size() >= 3) {
    std::vector<double> h, mu;
    for (const auto& l : st.levels) {
      h.push_back(l.h);
      mu.push_back(l.mu1);
    }
    st.refinement = richardson(h, mu);
  }
  return st;
}

struct CompareRow {
  FemLevel level;
  double bound = 0.0;
  double margin = 0.0;
  double error_estimate = 0.0;
  Verdict verdict = Verdict::InequalityHolds;
};

inline std::vector<CompareRow> compare_rows(const std::string& surface, int lo, int hi, const SolverOptions& opt,
                                            const SamplePlan& plan = {}) {
  const NewtonBoundInput in = estimate_newton_input(parse_surface(surface), plan);
  const FemStudy st = fem_study(surface, lo, hi, opt);
  std::vector<CompareRow> rows;
  for (size_t i = 0; i < st.levels.size(); ++i) {
    CompareRow row;
    row.level = st.levels[i];
    row.error_estimate = st.error_estimate(i);
    const BoundReport rep = compare(in, row.level.mu1, row.error_estimate);
    row.bound = rep.bound_value;
    row.margin = rep.margin;
    row.verdict = rep.verdict;
    rows.push_back(row);
  }
  return rows;
}

// Individual suites. Each returns a SuiteResult whose failures name the
// assertion that did not hold.

inline SuiteResult bochner_suite(const HarnessConfig& cfg) {
  return detail::timed("bochner", [&](SuiteResult& r) {
    double worst = 0.0, worst_abs = 0.0, spread = 0.0;
    long evaluations = 0;
    for (const auto& spec : cfg.manifolds) {
      const ChartManifold m = parse_manifold(spec);
      std::vector<std::pair<std::string, BoxOperator>> boxes;
      boxes.emplace_back("metric", BoxOperator::laplacian(m));
      if (m.dim >= 3)
        boxes.emplace_back("schouten", BoxOperator::schouten(m));
      else  // the Schouten formula vanishes identically on surfaces
        boxes.emplace_back("ricci", BoxOperator::custom(m, curvature_field(CurvatureTensorKind::Ricci)));
      boxes.emplace_back("custom", BoxOperator::custom(m, random_spd_field(m, cfg.seed)));
      const ScalarField f = random_scalar(m, cfg.seed + 1);
      for (const auto& [phi_name, box] : boxes) {
        double w = 0.0, s = 0.0;
        for (const auto& p : m.sample_points(cfg.samples, cfg.seed)) {
          const BochnerTerms t = bochner_terms(box, f, p);
          double r0 = 0.0;
          for (size_t ci = 0; ci < cfg.c_values.size(); ++ci) {
            const BochnerResidual res = evaluate_bochner(t, cfg.c_values[ci]);
            const double scale = std::max(1.0, std::abs(res.lhs));
            w = std::max(w, res.residual / scale);
            worst_abs = std::max(worst_abs, res.residual);
            if (ci == 0) r0 = res.residual;
            s = std::max(s, std::abs(res.residual - r0) / scale);
            ++evaluations;
          }
        }
        r.check(w <= 1e-8, spec + " phi=" + phi_name + ": residual " + detail::fmt(w) + " > 1e-8");
        r.check(s <= 1e-10, spec + " phi=" + phi_name + ": spread over c " + detail::fmt(s) + " > 1e-10");
        worst = std::max(worst, w);
        spread = std::max(spread, s);
      }
    }
    r.metric("max_residual", worst);
    r.metric("max_abs_residual", worst_abs);
    r.metric("max_c_spread", spread);
    r.metric("evaluations", static_cast<double>(evaluations));
  });
}

inline SuiteResult divergence_suite(const HarnessConfig& cfg) {
  return detail::timed("divergence", [&](SuiteResult& r) {
    const SamplePlan plan{std::max(4, cfg.samples / 20), 0, cfg.seed};
    // analytic mode
    double worst = 0.0;
    for (const std::string spec : {"sphere:n=4,K=1", "torus3:L=6.283185307179586,perturb=mixed,eps=0.15",
                                   "torus4:L=6.283185307179586,perturb=sin,eps=0.1"}) {
      const ChartManifold m = parse_manifold(spec);
      const DivergenceReport d = divergence_identity_suite(m, plan, m.kind == AtlasKind::AnalyticSphere ? 3.0 : 0.0);
      const double w = std::max({d.einstein_defect, d.schouten_defect, d.bianchi_defect, d.shifted_ricci_defect.value_or(0.0)});
      r.check(w <= 1e-8, spec + ": divergence defect " + detail::fmt(w));
      if (m.kind == AtlasKind::AnalyticSphere)
        r.check(d.shifted_ricci_defect.has_value(), spec + ": constant scalar curvature not detected");
      worst = std::max(worst, w);
    }
    auto hs = std::make_shared<const ImmersedHypersurface>(parse_surface(cfg.surface));
    double p1 = 0.0;
    for (const auto& p : hs->induced.sample_points(plan.points, cfg.seed))
      p1 = std::max(p1, tensor_divergence(newton_field(hs), hs->induced, p).cwiseAbs().maxCoeff());
    r.check(p1 <= 1e-8, cfg.surface + ": div P1 = " + detail::fmt(p1));
    r.metric("max_analytic_defect", worst);
    r.metric("max_div_p1", p1);

    // finite-difference mode: order across two steps
    const std::string base = "torus3:L=6.283185307179586,perturb=mixed,eps=0.15";
    double d_prev = 0.0;
    for (double h : {2e-2, 1e-2}) {
      const ChartManifold m = parse_manifold(base + ",fd=" + detail::fmt(h));
      const DivergenceReport d = divergence_identity_suite(m, SamplePlan{4, 0, cfg.seed});
      const double w = std::max({d.einstein_defect, d.schouten_defect, d.bianchi_defect});
      r.metric("fd_defect_h=" + detail::fmt(h), w);
      if (d_prev > 0.0) {
        const double order = std::log2(d_prev / w);
        r.metric("fd_order", order);
        r.check(std::abs(order - 2.0) <= 0.3, "finite-difference defect order " + detail::fmt(order) + " not near 2");
      }
      d_prev = w;
    }
  });
}

inline SuiteResult newton_suite(const HarnessConfig& cfg) {
  return detail::timed("newton", [&](SuiteResult& r) {
    TrialConfig tc;
    tc.trials = cfg.trials;
    tc.seed = cfg.seed;
    const NewtonTrialReport rep = newton_inequality_trials(tc);
    r.metric("trials", static_cast<double>(rep.trials));
    r.metric("violations", static_cast<double>(rep.violations));
    r.metric("worst_defect", rep.worst_defect);
    r.metric("equality_hits", static_cast<double>(rep.equality_hits));
    r.metric("scalar_trials", static_cast<double>(rep.scalar_trials));
    r.metric("false_equalities", static_cast<double>(rep.false_equalities));
    r.check(rep.violations == 0, std::to_string(rep.violations) + " violations below -1e-10");
    r.check(rep.false_equalities == 0, std::to_string(rep.false_equalities) + " equality hits with non-scalar A");
    r.check(rep.equality_hits >= rep.scalar_trials, "scalar trials not all detected as equality cases");
    r.notes.push_back(std::string("rng: ") + std::string(kRngAlgorithm));
  });
}

inline SuiteResult qa_suite(const HarnessConfig& cfg) {
  return detail::timed("qa", [&](SuiteResult& r) {
    TrialConfig tc;
    tc.trials = cfg.trials;
    tc.seed = cfg.seed;
    for (KappaSign sign : {KappaSign::Positive, KappaSign::NonPositive}) {
      const std::string tag = sign == KappaSign::Positive ? "kappa>0" : "kappa<=0";
      const QaTrialReport rep = qa_bound_trials(tc, sign);
      r.metric(tag + ".violations", static_cast<double>(rep.violations));
      r.metric(tag + ".worst_margin", rep.worst_margin);
      r.metric(tag + ".equality_error", rep.equality_error);
      r.check(rep.violations == 0, tag + ": " + std::to_string(rep.violations) + " violations");
      r.check(rep.equality_error <= 1e-9, tag + ": A = alpha I does not attain the bound");
      TrialConfig small = tc;
      small.trials = std::min<long>(tc.trials, 10000);
      const QaTrialReport planted = qa_bound_trials(small, sign, true);
      r.metric(tag + ".planted_violations", static_cast<double>(planted.violations));
      r.check(planted.violations > 0, tag + ": planted violation not detected");
    }
  });
}

inline SuiteResult sphere_equality_suite(const HarnessConfig&) {
  return detail::timed("sphere-equality", [&](SuiteResult& r) {
    const SchoutenBoundInput s = estimate_schouten_input(round_sphere(4, 1.0));
    const double mu_s = analytic_sphere_spectrum(SphereOperator::schouten(4, 1.0), 1)[0];
    const BoundReport rs = compare(s, mu_s);
    r.metric("schouten.bound", rs.bound_value);
    r.metric("schouten.mu1", mu_s);
    r.check(rs.verdict == Verdict::EqualityCase, "S^4 Schouten verdict " + std::string(to_string(rs.verdict)));

    const NewtonBoundInput nb = estimate_newton_input(sphere_surface(1.0));
    const double mu_n = analytic_sphere_spectrum(SphereOperator::newton(2, 1.0, 0.0), 1)[0];
    const BoundReport rn = compare(nb, mu_n);
    r.metric("newton.bound", rn.bound_value);
    r.metric("newton.mu1", mu_n);
    r.check(rn.verdict == Verdict::EqualityCase, "S^2 Newton verdict " + std::string(to_string(rn.verdict)));
    r.notes.insert(r.notes.end(), rs.notes.begin(), rs.notes.end());
  });
}

inline SuiteResult sphere_fem_suite(const HarnessConfig& cfg, int lo = 4, int hi = 6) {
  return detail::timed("sphere-fem", [&](SuiteResult& r) {
    const FemStudy st = fem_study("sphere:r=1", lo, hi, cfg.solver());
    for (const auto& l : st.levels) {
      r.metric("mu1.subdiv" + std::to_string(l.subdiv), l.mu1);
      r.check(l.mu1 >= 2.0 && l.mu1 <= 2.1, "mu1 " + detail::fmt(l.mu1) + " outside [2, 2.1]");
    }
    for (size_t i = 1; i < st.levels.size(); ++i) {
      const double e0 = st.levels[i - 1].mu1 - 2.0, e1 = st.levels[i].mu1 - 2.0;
      const double order = std::log(e0 / e1) / std::log(st.levels[i - 1].h / st.levels[i].h);
      r.metric("order.subdiv" + std::to_string(st.levels[i].subdiv), order);
      r.check(order >= 1.8, "observed order " + detail::fmt(order) + " < 1.8");
    }
    if (st.refinement) {
      r.metric("extrapolated", st.refinement->extrapolated);
      r.check(std::abs(st.refinement->extrapolated - 2.0) <= 0.004, "extrapolated mu1 not within 0.2% of 2");
      const NewtonBoundInput in = estimate_newton_input(sphere_surface(1.0));
      const BoundReport rep = compare(in, st.levels.back().mu1, st.error_estimate(st.levels.size() - 1));
      r.notes.push_back(std::string("finest-level verdict ") + std::string(to_string(rep.verdict)));
    }
  });
}

inline SuiteResult ellipsoid_compare_suite(const HarnessConfig& cfg) {
  return detail::timed("ellipsoid-compare", [&](SuiteResult& r) {
    const auto rows = compare_rows(cfg.surface, cfg.refine_lo, cfg.refine_hi, cfg.solver());
    const CompareRow& last = rows.back();
    r.metric("mu1", last.level.mu1);
    r.metric("bound", last.bound);
    r.metric("margin", last.margin);
    r.metric("error_estimate", last.error_estimate);
    r.check(last.verdict == Verdict::InequalityHolds, "verdict " + std::string(to_string(last.verdict)));
    r.check(last.margin > 3.0 * last.error_estimate, "margin not above 3x the refinement error");
    r.notes.push_back("estimated-hypothesis: alpha, a and sigma are sampled");
  });
}

inline SymmetricTensorField anisotropic_constant_field() {
  return closed_form_field<2>("aniso", [](int, auto x) {
    using T = std::remove_cvref_t<decltype(x[0])>;
    return std::vector<T>{0.0 * x[0] + 2.0, 0.0 * x[0] + 0.5, 0.0 * x[0] + 0.5, 0.0 * x[0] + 1.0};
  });
}

/// c(x) I with c = 1 + sin(x_1)/2; not divergence free.
inline SymmetricTensorField non_divergence_free_field() {
  return closed_form_field<2>("bumpy", [](int, auto x) {
    using T = std::remove_cvref_t<decltype(x[0])>;
    using std::sin;
    const T c = 1.0 + 0.5 * sin(x[0]);
    return std::vector<T>{c, 0.0 * c, 0.0 * c, c};
  });
}

inline SuiteResult consistency_suite(const HarnessConfig& cfg) {
  return detail::timed("consistency", [&](SuiteResult& r) {
    const SurfaceMesh mesh = icosphere(3);
    const AssembledOperator op = assemble(mesh, metric_provider());
    const SparseMatrix diff = op.K - cotangent_stiffness(mesh);
    double cot = 0.0;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(diff, k); it; ++it) cot = std::max(cot, std::abs(it.value()));
    r.metric("cotangent_max_diff", cot);
    r.check(cot <= 1e-12, "cotangent oracle mismatch " + detail::fmt(cot));

    const std::vector<int> res = {16, 32, 64};
    const ChartManifold flat = torus(2, 2.0 * std::numbers::pi, TorusPerturbation::None);
    const ChartManifold mixed = torus(2, 2.0 * std::numbers::pi, TorusPerturbation::Mixed, 0.2);
    const ConsistencyReport a = grid_consistency(flat, anisotropic_constant_field(), random_scalar(flat, cfg.seed), res);
    const ConsistencyReport g = grid_consistency(mixed, metric_field(), random_scalar(mixed, cfg.seed), res);
    r.metric("order.flat_anisotropic", a.observed_order());
    r.metric("order.mixed_metric", g.observed_order());
    r.check(std::abs(a.observed_order() - 2.0) <= 0.3, "anisotropic order " + detail::fmt(a.observed_order()));
    r.check(std::abs(g.observed_order() - 2.0) <= 0.3, "metric order " + detail::fmt(g.observed_order()));

    const ConsistencyReport c = grid_consistency(flat, non_divergence_free_field(), torus_cosine(flat, {1.0}), res);
    r.metric("control.max_error", c.levels.back().max_error);
    r.metric("control.order", c.observed_order());
    r.check(c.levels.back().max_error > 0.1 && std::abs(c.observed_order()) < 0.3,
            "non-divergence-free control did not show an O(1) discrepancy");

    const ConsistencyReport ico = icosphere_consistency({3, 4, 5}, 1);
    r.metric("icosphere.max_error", ico.levels.back().max_error);
    r.metric("icosphere.l2_order", ico.l2_orders.empty() ? 0.0 : ico.l2_orders.back());
    r.notes.push_back("icosphere nodal consistency is reported only; its max-norm error does not converge");
  });
}

inline SuiteResult assembly_suite(const HarnessConfig& cfg) {
  return detail::timed("assembly", [&](SuiteResult& r) {
    const SurfaceMesh mesh = surface_mesh(cfg.surface, 3);
    PhiProvider phi = newton_provider(parse_surface(cfg.surface));
    if (cfg.corrupt_phi)
      phi = [inner = phi](int f, const Eigen::Vector3d& x, const Eigen::Vector3d& n) -> Eigen::Matrix3d {
        Eigen::Matrix3d m = inner(f, x, n);
        m(0, 1) += 0.25;
        return m;
      };
    // a NonSymmetricCoefficient error becomes the suite failure message
    const AssembledOperator op = assemble(mesh, phi);
    const double asym = Eigen::MatrixXd(op.K - SparseMatrix(op.K.transpose())).cwiseAbs().maxCoeff();
    const double kernel = (op.K * Eigen::VectorXd::Ones(op.size())).cwiseAbs().maxCoeff();
    r.metric("asymmetry", asym);
    r.metric("constant_kernel", kernel);
    r.check(asym == 0.0, "stiffness matrix not symmetric");
    r.check(kernel <= 1e-12, "constants not in the kernel");
  });
}

struct RunSummary {
  std::vector<SuiteResult> results;
  bool passed() const {
    return std::all_of(results.begin(), results.end(), [](const SuiteResult& s) { return s.passed; });
  }
};

inline SuiteResult run_named_suite(const std::string& name, const HarnessConfig& cfg) {
  if (name == "bochner") return bochner_suite(cfg);
  if (name == "divergence") return divergence_suite(cfg);
  if (name == "newton") return newton_suite(cfg);
  if (name == "qa") return qa_suite(cfg);
  if (name == "sphere-equality") return sphere_equality_suite(cfg);
  if (name == "sphere-fem") return sphere_fem_suite(cfg);
  if (name == "ellipsoid-compare") return ellipsoid_compare_suite(cfg);
  if (name == "consistency") return consistency_suite(cfg);
  if (name == "assembly") return assembly_suite(cfg);
  fail(ErrorKind::ConfigParse, "unknown suite '" + name + "'");
}

inline RunSummary run_suite(const HarnessConfig& cfg) {
  RunSummary s;
  for (const auto& name : cfg.suites) s.results.push_back(run_named_suite(name, cfg));
  return s;
}

}  // namespace spectra_bochner
