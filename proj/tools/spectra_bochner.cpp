// spectra-bochner: command line front end.
//
//   spectra-bochner verify bochner --manifold sphere:n=4,K=1 --phi schouten --f mix:seed=3
//   spectra-bochner eig --surface sphere:r=1 --subdiv 5 --operator newton1 --k 5
//   spectra-bochner bound schouten --n 4 --R 12 --K0 1 --L0 3
//   spectra-bochner check --config run.cfg
//   spectra-bochner proptest newton --trials 100000
//   spectra-bochner report compare --surface ellipsoid:1,1,1.1 --refine 3..6
//
// Exit codes: 0 pass, 1 assertion failure, 2 usage or config error,
// 3 numerical failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "spectra_bochner/assemble.hpp"
#include "spectra_bochner/bounds.hpp"
#include "spectra_bochner/boxop.hpp"
#include "spectra_bochner/fields.hpp"
#include "spectra_bochner/harness.hpp"
#include "spectra_bochner/mesh.hpp"
#include "spectra_bochner/spectral.hpp"

namespace sb = spectra_bochner;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kAssertion = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

int exit_code(sb::ErrorKind kind) {
  switch (kind) {
    case sb::ErrorKind::ConfigParse:
    case sb::ErrorKind::InvalidArgument:
    case sb::ErrorKind::Io:
    case sb::ErrorKind::SchoutenUndefined:
    case sb::ErrorKind::DimensionTooSmall:
    case sb::ErrorKind::DenominatorNonpositive:
      return kUsage;
    case sb::ErrorKind::SuiteFailure:
      return kAssertion;
    default:
      return kNumerical;
  }
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool json = false;
  sb::HarnessConfig config;

  std::uint64_t seed_or(std::uint64_t fallback) const { return seed.value_or(fallback); }
};

void emit(const Globals& g, const json& j, const std::string& text) {
  if (g.json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

json to_json(const sb::SuiteResult& r) {
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = v;
  return {{"name", r.name},     {"passed", r.passed}, {"failures", r.failures},
          {"metrics", m},       {"notes", r.notes},   {"seconds", r.seconds}};
}

json to_json(const sb::HypothesisFlags& f) {
  json j = json::object();
  auto put = [&](const char* key, const std::optional<bool>& v) { j[key] = v ? json(*v) : json(nullptr); };
  put("harmonic_weyl", f.harmonic_weyl);
  put("constant_R", f.constant_R);
  put("schouten_positive", f.schouten_positive);
  put("pinching", f.pinching);
  j["estimated"] = f.estimated;
  return j;
}

json to_json(const sb::BoundReport& r) {
  json j = {{"bound", r.bound_value},
            {"margin", r.margin},
            {"error_estimate", r.error_estimate},
            {"tolerance", r.tolerance},
            {"verdict", std::string(sb::to_string(r.verdict))},
            {"hypotheses", to_json(r.flags)},
            {"notes", r.notes}};
  j["mu1"] = r.computed_mu1 ? json(*r.computed_mu1) : json(nullptr);
  return j;
}

std::string fmt(double v, int precision = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : sb::detail::split(text, ',')) out.push_back(sb::SpecString::to_double(s));
  return out;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
  std::string manifold = "sphere:n=4,K=1";
  std::string surface;
  std::string phi = "metric";
  std::string f = "mix:seed=1";
  std::string c = "0,1,7.3";
  int samples = 200;
  double tol = 1e-8;
};

sb::BoxOperator make_box(const std::string& phi, const sb::ChartManifold& m, const std::string& surface) {
  if (phi == "metric") return sb::BoxOperator::laplacian(m);
  if (phi == "schouten") return sb::BoxOperator::schouten(m);
  if (phi == "newton1") {
    if (surface.empty()) sb::fail(sb::ErrorKind::InvalidArgument, "--phi newton1 needs --surface");
    return sb::BoxOperator::newton(sb::parse_surface(surface));
  }
  return sb::BoxOperator::custom(m, sb::parse_tensor_field(phi, m));
}

int run_verify_bochner(const Globals& g, const VerifyOptions& o) {
  const sb::ChartManifold m = o.surface.empty() ? sb::parse_manifold(o.manifold) : sb::parse_surface(o.surface).induced;
  const sb::BoxOperator box = make_box(o.phi, m, o.surface);
  const sb::ScalarField f = sb::parse_scalar_field(o.f, box.manifold);
  const std::vector<double> cs = parse_list(o.c);
  json rows = json::array();
  double worst = 0.0, spread = 0.0;
  for (const auto& p : box.manifold.sample_points(o.samples, g.seed_or(42))) {
    const sb::BochnerTerms t = sb::bochner_terms(box, f, p);
    double r0 = 0.0;
    for (size_t i = 0; i < cs.size(); ++i) {
      const sb::BochnerResidual r = sb::evaluate_bochner(t, cs[i]);
      const double scale = std::max(1.0, std::abs(r.lhs));
      worst = std::max(worst, r.residual / scale);
      if (i == 0) r0 = r.residual;
      spread = std::max(spread, std::abs(r.residual - r0) / scale);
      json terms = json::object();
      for (const auto& [k, v] : r.rhs_terms) terms[k] = v;
      rows.push_back({{"chart", p.chart}, {"x", p.x}, {"c", r.c}, {"lhs", r.lhs}, {"rhs", r.rhs},
                      {"residual", r.residual}, {"terms", terms}});
    }
  }
  const bool ok = worst <= o.tol;
  json j = {{"command", "verify bochner"},
            {"manifold", box.manifold.spec},
            {"phi", o.phi},
            {"operator", sb::to_string(box.kind)},
            {"f", o.f},
            {"c", cs},
            {"samples", o.samples},
            {"max_residual", worst},
            {"max_c_spread", spread},
            {"tolerance", o.tol},
            {"passed", ok},
            {"rows", rows}};
  std::cout << j.dump(2) << "\n";
  return ok ? kPass : kAssertion;
}

int run_verify_divergence(const Globals& g, const VerifyOptions& o) {
  const sb::ChartManifold m = sb::parse_manifold(o.manifold);
  const sb::DivergenceReport d = sb::divergence_identity_suite(m, sb::SamplePlan{o.samples, 0, g.seed_or(42)});
  const double worst =
      std::max({d.einstein_defect, d.schouten_defect, d.bianchi_defect, d.shifted_ricci_defect.value_or(0.0)});
  const bool ok = worst <= o.tol;
  json j = {{"command", "verify divergence"},
            {"manifold", m.spec},
            {"points", d.points},
            {"einstein_defect", d.einstein_defect},
            {"schouten_defect", d.schouten_defect},
            {"bianchi_defect", d.bianchi_defect},
            {"scalar_spread", d.scalar_spread},
            {"r_not_constant", d.r_not_constant},
            {"passed", ok}};
  j["shifted_ricci_defect"] = d.shifted_ricci_defect ? json(*d.shifted_ricci_defect) : json(nullptr);
  std::string text = "manifold " + m.spec + "\n  einstein " + fmt(d.einstein_defect) + "\n  schouten " +
                     fmt(d.schouten_defect) + "\n  bianchi  " + fmt(d.bianchi_defect) + "\n" +
                     (ok ? "PASS\n" : "FAIL\n");
  emit(g, j, text);
  return ok ? kPass : kAssertion;
}

// ---------------------------------------------------------------------------
// eig

struct EigOptions {
  std::string mesh;
  std::string surface;
  int subdiv = 4;
  std::string grid;
  int res = 32;
  std::string op = "laplacian";
  int k = 5;
  double tol = 1e-9;
  std::string export_prefix;
};

int run_eig(const Globals& g, const EigOptions& o) {
  sb::AssembledOperator op;
  json stats;
  if (!o.grid.empty()) {
    const sb::ChartManifold m = sb::parse_manifold(o.grid);
    const sb::PeriodicGrid grid(m, {o.res});
    const sb::SymmetricTensorField phi =
        o.op == "laplacian" ? sb::metric_field() : sb::parse_tensor_field(o.op, m);
    op = sb::assemble(grid, phi);
    stats = {{"kind", "grid"}, {"manifold", m.spec}, {"nodes", grid.node_count()}, {"h", grid.mesh_size()}};
  } else {
    if (o.mesh.empty() && o.surface.empty()) sb::fail(sb::ErrorKind::InvalidArgument, "eig needs --mesh, --surface or --grid");
    const sb::SurfaceMesh mesh = o.mesh.empty() ? sb::surface_mesh(o.surface, o.subdiv) : sb::read_off(o.mesh);
    sb::PhiProvider phi;
    std::string provider;
    if (o.op == "laplacian") {
      phi = sb::metric_provider();
      provider = "metric";
    } else if (o.op == "newton1") {
      if (!o.surface.empty()) {
        phi = sb::newton_provider(sb::parse_surface(o.surface));
        provider = "analytic shape operator";
      } else {
        phi = sb::fitted_newton_provider(mesh);
        provider = "fitted shape operator";
      }
    } else {
      sb::fail(sb::ErrorKind::InvalidArgument, "mesh operators are laplacian or newton1");
    }
    op = sb::assemble(mesh, phi, sb::Quadrature::OnePoint, o.op);
    stats = {{"kind", "mesh"},
             {"vertices", mesh.vertex_count()},
             {"faces", mesh.face_count()},
             {"edges", mesh.edge_count()},
             {"euler_characteristic", mesh.euler_characteristic()},
             {"h", mesh.mesh_size()},
             {"area", mesh.total_area()},
             {"coefficient", provider}};
  }
  if (!o.export_prefix.empty()) {
    std::ofstream fk(o.export_prefix + ".K.coo"), fm(o.export_prefix + ".M.coo");
    if (!fk || !fm) sb::fail(sb::ErrorKind::Io, "cannot write matrices with prefix '" + o.export_prefix + "'");
    sb::export_coo(fk, op.K);
    sb::export_coo(fm, op.M);
  }
  sb::SolverOptions so;
  so.tol = o.tol;
  so.seed = g.seed_or(g.config.seed);
  const sb::EigenResult r = sb::smallest_nonzero(op, o.k, so);
  json j = {{"command", "eig"},
            {"operator", o.op},
            {"eigenvalues", r.eigenvalues},
            {"residuals", r.residuals},
            {"mesh", stats},
            {"solver",
             {{"tol", o.tol},
              {"seed", so.seed},
              {"shift", r.shift},
              {"iterations", r.iterations},
              {"restarts", r.restarts},
              {"basis_size", r.basis_size}}}};
  std::cout << j.dump(2) << "\n";
  return kPass;
}

// ---------------------------------------------------------------------------
// bound

struct SchoutenOptions {
  int n = 4;
  double R = 0.0, K0 = 0.0, L0 = 0.0;
  std::string manifold;
  std::optional<double> mu1;
  std::optional<double> error;
};

struct NewtonOptions {
  int n = 2;
  double kappa = 0.0, alpha = 1.0, a = 1.0, sigma = 0.0;
  std::string surface;
  std::optional<double> mu1;
  std::optional<double> error;
};

int finish_bound(const Globals& g, json j, const std::optional<double>& mu1, const sb::BoundReport* rep) {
  std::string text = "bound " + fmt(j["bound"].get<double>(), 15) + "\n";
  int code = kPass;
  if (mu1 && rep) {
    j["comparison"] = to_json(*rep);
    text += "mu1 " + fmt(*mu1, 15) + "  margin " + fmt(rep->margin) + "  verdict " + std::string(sb::to_string(rep->verdict)) + "\n";
    if (rep->verdict == sb::Verdict::ViolationSuspected) code = kAssertion;
  }
  emit(g, j, text);
  return code;
}

int run_bound_schouten(const Globals& g, const SchoutenOptions& o) {
  sb::SchoutenBoundInput in;
  if (!o.manifold.empty()) {
    sb::SchoutenEstimateOptions eo;
    eo.plan.seed = g.seed_or(42);
    in = sb::estimate_schouten_input(sb::parse_manifold(o.manifold), eo);
  } else {
    in.n = o.n;
    in.R = o.R;
    in.K0 = o.K0;
    in.L0 = o.L0;
  }
  const double b = sb::schouten_bound(in);
  json j = {{"command", "bound schouten"}, {"n", in.n},       {"R", in.R},
            {"K0", in.K0},                 {"L0", in.L0},     {"Gamma", sb::schouten_gamma(in)},
            {"lambda0", sb::schouten_lambda0(in)},            {"bound", b},
            {"hypotheses", to_json(in.flags)}};
  std::optional<sb::BoundReport> rep;
  if (o.mu1) rep = sb::compare(in, *o.mu1, o.error);
  return finish_bound(g, j, o.mu1, rep ? &*rep : nullptr);
}

int run_bound_l1(const Globals& g, const NewtonOptions& o) {
  sb::NewtonBoundInput in;
  if (!o.surface.empty()) {
    sb::SamplePlan plan;
    plan.seed = g.seed_or(42);
    in = sb::estimate_newton_input(sb::parse_surface(o.surface), plan);
  } else {
    in.n = o.n;
    in.kappa = o.kappa;
    in.alpha = o.alpha;
    in.a = o.a;
    in.sigma = o.sigma;
  }
  const double b = sb::newton_bound(in);
  json j = {{"command", "bound l1"}, {"n", in.n},     {"kappa", in.kappa}, {"alpha", in.alpha},
            {"a", in.a},             {"sigma", in.sigma}, {"bound", b},    {"hypotheses", to_json(in.flags)}};
  std::optional<sb::BoundReport> rep;
  if (o.mu1) rep = sb::compare(in, *o.mu1, o.error);
  return finish_bound(g, j, o.mu1, rep ? &*rep : nullptr);
}

// ---------------------------------------------------------------------------
// check / proptest / report

int run_check(const Globals& g, const std::vector<std::string>& extra) {
  sb::HarnessConfig cfg = g.config;
  if (g.seed) cfg.seed = *g.seed;
  for (const auto& s : extra) {
    if (std::find(sb::known_suites().begin(), sb::known_suites().end(), s) == sb::known_suites().end())
      sb::fail(sb::ErrorKind::ConfigParse, "unknown suite '" + s + "'");
    cfg.suites.push_back(s);
  }
  const sb::RunSummary summary = sb::run_suite(cfg);
  json results = json::array();
  std::string text;
  for (const auto& r : summary.results) {
    results.push_back(to_json(r));
    text += std::string(r.passed ? "PASS " : "FAIL ") + r.name + " (" + fmt(r.seconds, 3) + " s)\n";
    for (const auto& f : r.failures) text += "  - " + f + "\n";
  }
  json j = {{"command", "check"}, {"passed", summary.passed()}, {"suites", results}};
  emit(g, j, text);
  return summary.passed() ? kPass : kAssertion;
}

struct PropOptions {
  long trials = 100000;
  std::string dims = "2..8";
  bool planted = false;
};

int run_proptest(const Globals& g, const std::string& which, const PropOptions& o) {
  sb::TrialConfig tc;
  tc.trials = o.trials;
  tc.seed = g.seed_or(g.config.seed);
  std::tie(tc.dim_min, tc.dim_max) = sb::parse_range(o.dims);
  if (tc.dim_min < 1) sb::fail(sb::ErrorKind::InvalidArgument, "dimensions must be positive");
  json j = {{"command", "proptest " + which}, {"seed", tc.seed}, {"rng", std::string(sb::kRngAlgorithm)},
            {"trials", tc.trials}, {"dims", o.dims}};
  std::string text;
  bool ok = true;
  if (which == "newton") {
    const sb::NewtonTrialReport r = sb::newton_inequality_trials(tc);
    j.update({{"violations", r.violations}, {"worst_defect", r.worst_defect}, {"equality_hits", r.equality_hits},
              {"false_equalities", r.false_equalities}, {"scalar_trials", r.scalar_trials}});
    ok = r.violations == 0 && r.false_equalities == 0;
    text = "violations " + std::to_string(r.violations) + ", worst normalized defect " + fmt(r.worst_defect) +
           ", equality hits " + std::to_string(r.equality_hits) + " (false " + std::to_string(r.false_equalities) + ")\n";
  } else {
    json signs = json::object();
    for (sb::KappaSign s : {sb::KappaSign::Positive, sb::KappaSign::NonPositive}) {
      const std::string tag = s == sb::KappaSign::Positive ? "kappa>0" : "kappa<=0";
      const sb::QaTrialReport r = sb::qa_bound_trials(tc, s, o.planted);
      signs[tag] = {{"violations", r.violations}, {"worst_margin", r.worst_margin},
                    {"equality_trials", r.equality_trials}, {"equality_error", r.equality_error}};
      // a planted run passes when it is caught
      ok = ok && (o.planted ? r.violations > 0 : r.violations == 0);
      text += tag + ": violations " + std::to_string(r.violations) + ", worst margin " + fmt(r.worst_margin) + "\n";
    }
    j["planted"] = o.planted;
    j["results"] = signs;
  }
  j["passed"] = ok;
  emit(g, j, text + (ok ? "PASS\n" : "FAIL\n"));
  return ok ? kPass : kAssertion;
}

int run_report_compare(const Globals& g, const std::string& surface, const std::string& refine, double tol) {
  const auto [lo, hi] = sb::parse_range(refine);
  sb::SolverOptions so;
  so.tol = tol;
  so.seed = g.seed_or(g.config.seed);
  const auto rows = sb::compare_rows(surface, lo, hi, so);
  json arr = json::array();
  std::string csv = "subdiv,vertices,h,mu1,bound,margin,error_estimate,verdict\n";
  bool ok = true;
  for (const auto& r : rows) {
    const std::string verdict(sb::to_string(r.verdict));
    arr.push_back({{"subdiv", r.level.subdiv}, {"vertices", r.level.vertices}, {"h", r.level.h}, {"mu1", r.level.mu1},
                   {"bound", r.bound}, {"margin", r.margin}, {"error_estimate", r.error_estimate}, {"verdict", verdict}});
    csv += std::to_string(r.level.subdiv) + "," + std::to_string(r.level.vertices) + "," + fmt(r.level.h) + "," +
           fmt(r.level.mu1, 12) + "," + fmt(r.bound, 12) + "," + fmt(r.margin, 12) + "," + fmt(r.error_estimate) + "," +
           verdict + "\n";
    if (r.verdict == sb::Verdict::ViolationSuspected) ok = false;
  }
  emit(g, {{"command", "report compare"}, {"surface", surface}, {"rows", arr}}, csv);
  return ok ? kPass : kAssertion;
}

int run_report_spectrum(const Globals& g, const std::string& op, int n, double K, double alpha, double kappa, int modes) {
  sb::SphereOperator so;
  if (op == "laplacian")
    so = sb::SphereOperator::laplacian(n, K);
  else if (op == "schouten")
    so = sb::SphereOperator::schouten(n, K);
  else if (op == "newton1")
    so = sb::SphereOperator::newton(n, alpha, kappa);
  else
    sb::fail(sb::ErrorKind::InvalidArgument, "operator must be laplacian, schouten or newton1");
  const auto ev = sb::analytic_sphere_spectrum(so, modes);
  json arr = json::array();
  std::string text;
  for (int k = 1; k <= modes; ++k) {
    const long mult = sb::sphere_harmonic_multiplicity(n, k);
    arr.push_back({{"k", k}, {"eigenvalue", ev[k - 1]}, {"multiplicity", mult}});
    text += std::to_string(k) + "  " + fmt(ev[k - 1], 15) + "  x" + std::to_string(mult) + "\n";
  }
  emit(g, {{"command", "report spectrum"}, {"operator", op}, {"n", n}, {"modes", arr}}, text);
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cheng-Yau operators: eigenvalue bounds, identities and discretizations"};
  app.name("spectra-bochner");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Config file with [manifold], [solver] and [suites] sections");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for sample points, start vectors and trials");
  app.add_flag("--json", g.json, "Emit JSON instead of text");

  int code = kPass;

  // verify
  auto* verify = app.add_subcommand("verify", "Pointwise identities on analytic manifolds");
  verify->require_subcommand(1);
  VerifyOptions vo;
  auto* vb = verify->add_subcommand("bochner", "Bochner identity residuals (JSON)");
  vb->add_option("--manifold", vo.manifold, "Manifold spec, e.g. torus2:perturb=sin or sphere:n=4,K=1");
  vb->add_option("--surface", vo.surface, "Surface spec; its induced metric replaces --manifold");
  vb->add_option("--phi", vo.phi, "metric | schouten | newton1 | ricci | einstein | custom:seed=S | ...");
  vb->add_option("--f", vo.f, "Scalar field spec: cos:k1,k2 | harmonic:i | const:v | mix:seed=s | poly:seed=s");
  vb->add_option("--c", vo.c, "Comma separated c values");
  vb->add_option("--samples", vo.samples, "Sample points")->check(CLI::PositiveNumber);
  vb->add_option("--tol", vo.tol, "Residual tolerance relative to max(1, |lhs|)");
  auto* vd = verify->add_subcommand("divergence", "Divergence identities of curvature tensors");
  vd->add_option("--manifold", vo.manifold, "Manifold spec");
  vd->add_option("--samples", vo.samples, "Sample points")->check(CLI::PositiveNumber);
  vd->add_option("--tol", vo.tol, "Defect tolerance");

  // eig
  EigOptions eo;
  auto* eig = app.add_subcommand("eig", "Smallest nonzero eigenvalues of K u = mu M u (JSON)");
  eig->add_option("--mesh", eo.mesh, "Closed triangle mesh in OFF format");
  eig->add_option("--surface", eo.surface, "Surface spec meshed by icosphere subdivision");
  eig->add_option("--subdiv", eo.subdiv, "Subdivision level for --surface")->check(CLI::NonNegativeNumber);
  eig->add_option("--grid", eo.grid, "Torus spec discretized on a periodic grid");
  eig->add_option("--res", eo.res, "Grid resolution per axis");
  eig->add_option("--operator", eo.op, "laplacian | newton1 (meshes); laplacian or a tensor spec (grids)");
  eig->add_option("--k", eo.k, "Number of eigenvalues")->check(CLI::PositiveNumber);
  eig->add_option("--tol", eo.tol, "Relative residual tolerance");
  eig->add_option("--export", eo.export_prefix, "Write PREFIX.K.coo and PREFIX.M.coo");

  // bound
  auto* bound = app.add_subcommand("bound", "Closed-form eigenvalue lower bounds");
  bound->require_subcommand(1);
  SchoutenOptions so;
  auto* bs = bound->add_subcommand("schouten", "Bound for the Schouten operator");
  bs->add_option("--n", so.n, "Dimension");
  bs->add_option("--R", so.R, "Constant scalar curvature");
  bs->add_option("--K0", so.K0, "Sectional curvature lower bound");
  bs->add_option("--L0", so.L0, "Ricci curvature lower bound");
  bs->add_option("--manifold", so.manifold, "Estimate n, R, K0, L0 and hypotheses from a manifold spec");
  bs->add_option("--mu1", so.mu1, "Eigenvalue to compare against");
  bs->add_option("--error", so.error, "Discretization error of --mu1 (omit for analytic values)");
  NewtonOptions no;
  auto* bl = bound->add_subcommand("l1", "Bound for the linearized operator L1");
  bl->add_option("--n", no.n, "Hypersurface dimension");
  bl->add_option("--kappa", no.kappa, "Ambient space form curvature");
  bl->add_option("--alpha", no.alpha, "Lower principal curvature bound");
  bl->add_option("--a", no.a, "Pinching ratio");
  bl->add_option("--sigma", no.sigma, "Mean curvature Hessian constant");
  bl->add_option("--surface", no.surface, "Estimate constants from a surface spec");
  bl->add_option("--mu1", no.mu1, "Eigenvalue to compare against");
  bl->add_option("--error", no.error, "Discretization error of --mu1 (omit for analytic values)");

  // check
  std::vector<std::string> extra_suites;
  auto* check = app.add_subcommand("check", "Run the suites named in the config and on the command line");
  check->add_option("suites", extra_suites, "Additional suite names");

  // proptest
  PropOptions po;
  auto* prop = app.add_subcommand("proptest", "Randomized matrix inequality trials");
  prop->require_subcommand(1);
  auto* pn = prop->add_subcommand("newton", "tr(A^2 B) >= (tr AB)^2 / tr B");
  auto* pq = prop->add_subcommand("qa", "Lower bound for the diagonal of Q(A)");
  for (auto* sub : {pn, pq}) {
    sub->add_option("--trials", po.trials, "Number of trials")->check(CLI::PositiveNumber);
    sub->add_option("--dims", po.dims, "Dimension range lo..hi");
  }
  pq->add_flag("--planted", po.planted, "Widen the principal curvature range; violations must be found");

  // report
  auto* report = app.add_subcommand("report", "Refinement studies and closed-form spectra");
  report->require_subcommand(1);
  std::string rc_surface = "ellipsoid:1,1,1.1", rc_refine = "3..5";
  double rc_tol = 1e-9;
  auto* rc = report->add_subcommand("compare", "Per-level CSV: h, mu1, bound, margin, verdict");
  rc->add_option("--surface", rc_surface, "Surface spec");
  rc->add_option("--refine", rc_refine, "Subdivision levels lo..hi");
  rc->add_option("--tol", rc_tol, "Eigensolver tolerance");
  std::string rs_op = "laplacian";
  int rs_n = 2, rs_modes = 3;
  double rs_K = 1.0, rs_alpha = 1.0, rs_kappa = 0.0;
  auto* rsp = report->add_subcommand("spectrum", "Eigenvalues on round spheres");
  rsp->add_option("--operator", rs_op, "laplacian | schouten | newton1");
  rsp->add_option("--n", rs_n, "Dimension");
  rsp->add_option("--K", rs_K, "Sphere curvature");
  rsp->add_option("--alpha", rs_alpha, "Umbilicity (newton1)");
  rsp->add_option("--kappa", rs_kappa, "Ambient curvature (newton1)");
  rsp->add_option("--modes", rs_modes, "Number of distinct eigenvalues")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kUsage;
  }

  try {
    if (*seed_opt) g.seed = seed_value;
    if (!g.config_path.empty()) g.config = sb::load_config(g.config_path);
    if (verify->parsed()) {
      code = vb->parsed() ? run_verify_bochner(g, vo) : run_verify_divergence(g, vo);
    } else if (eig->parsed()) {
      if (!eig->count("--tol")) eo.tol = g.config.tol;
      code = run_eig(g, eo);
    } else if (bound->parsed()) {
      code = bs->parsed() ? run_bound_schouten(g, so) : run_bound_l1(g, no);
    } else if (check->parsed()) {
      code = run_check(g, extra_suites);
    } else if (prop->parsed()) {
      code = run_proptest(g, pn->parsed() ? "newton" : "qa", po);
    } else if (report->parsed()) {
      code = rc->parsed() ? run_report_compare(g, rc_surface, rc_refine, rc_tol)
                          : run_report_spectrum(g, rs_op, rs_n, rs_K, rs_alpha, rs_kappa, rs_modes);
    }
  } catch (const sb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return code;
}
