#pragma once

// Intrinsic Riemannian geometry on chart-based manifolds.
//
// A ChartManifold carries a metric field given in closed form on one or
// more coordinate charts. Every geometric quantity at a point is computed
// from Taylor jets of the metric (and of any tensor field involved): in
// analytic mode the jets are exact Taylor expansions obtained by jet
// arithmetic; in finite-difference mode they are assembled from central
// differences of point samples (degree <= 2). Downstream code is the same
// for both modes.
//
// Conventions (fixed library-wide):
//  * covariant derivatives append the direction as the LAST index, so
//    phi_ijk = (nabla_{e_k} phi)(e_i, e_j) and div(phi)_i = sum_j phi_ijj;
//  * R_ijkl = K (g_ik g_jl - g_il g_jk) on a space form of curvature K,
//    ric_ij = sum_k R_ikjk and K(u, v) = R(u, v, u, v) / |u ^ v|^2, so round
//    spheres have positive curvature;
//  * frames come from Gram-Schmidt on the coordinate basis in index order.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/jet.hpp"
#include "spectra_bochner/rng.hpp"
#include "spectra_bochner/spec_string.hpp"
#include "spectra_bochner/tensor.hpp"

namespace spectra_bochner {

using Point = std::vector<double>;

struct ChartPoint {
  int chart = 0;
  Point x;
};

struct Derivation {
  enum class Mode { Analytic, FiniteDifference };
  Mode mode = Mode::Analytic;
  double step = 1e-4;

  static Derivation analytic() { return {}; }
  static Derivation finite_difference(double h = 1e-4) { return {Mode::FiniteDifference, h}; }
  bool is_analytic() const { return mode == Mode::Analytic; }
};

enum class AtlasKind { PeriodicBox, AnalyticSphere, MeshBacked, Immersion };

struct Chart {
  Point lower;
  Point upper;
  Derivation derivation;
};

struct ChartManifold;

/// A tensor field of the given covariant rank, in coordinate components.
/// `taylor` returns the analytic Taylor jet at p to the requested degree;
/// `sample` returns component values at p, honouring the derivation mode for
/// fields that are themselves built from derivatives (curvature, Schouten...).
template <int Rank>
struct CoordinateField {
  std::string name;
  std::function<JetTensor(const ChartManifold&, const ChartPoint&, int degree)> taylor;
  std::function<Tensor(const ChartManifold&, const ChartPoint&, const Derivation&)> sample;
};
using ScalarField = CoordinateField<0>;
using SymmetricTensorField = CoordinateField<2>;

struct ChartManifold {
  int dim = 0;
  AtlasKind kind = AtlasKind::PeriodicBox;
  std::vector<Chart> charts;
  SymmetricTensorField metric;
  /// Sectional curvature of an AnalyticSphere.
  double sphere_curvature = 0.0;
  /// Period lengths of a PeriodicBox.
  std::vector<double> lengths;
  std::function<std::vector<ChartPoint>(int count, std::uint64_t seed)> sampler;
  std::string spec;

  const Derivation& derivation() const { return charts.front().derivation; }
  std::vector<ChartPoint> sample_points(int count, std::uint64_t seed) const { return sampler(count, seed); }
};

inline ChartManifold with_derivation(ChartManifold m, const Derivation& d) {
  for (auto& c : m.charts) c.derivation = d;
  return m;
}

// ---------------------------------------------------------------------------
// Field construction

namespace detail {

template <class F>
std::vector<Jet> call_on_jets(const F& f, const ChartPoint& p, int degree) {
  const int n = static_cast<int>(p.x.size());
  const MonomialTable& table = MonomialTable::get(n, degree);
  std::vector<Jet> x;
  x.reserve(n);
  for (int i = 0; i < n; ++i) x.push_back(Jet::variable(table, i, p.x[i]));
  return f(p.chart, std::span<const Jet>(x));
}

inline JetTensor pack(const std::vector<Jet>& comps, int n, int rank) {
  JetTensor t(comps.front().table(), n, rank);
  if (comps.size() != t.size()) fail(ErrorKind::InvalidArgument, "field returned wrong number of components");
  for (size_t i = 0; i < comps.size(); ++i) t[i] = comps[i];
  return t;
}

inline Tensor pack(const std::vector<double>& comps, int n, int rank) {
  Tensor t(n, rank);
  if (comps.size() != t.size()) fail(ErrorKind::InvalidArgument, "field returned wrong number of components");
  for (size_t i = 0; i < comps.size(); ++i) t[i] = comps[i];
  return t;
}

}  // namespace detail

/// Field from a generic callable `f(int chart, std::span<const T> x) ->
/// std::vector<T>` (n^Rank components, row-major), instantiated for both
/// double and Jet.
template <int Rank, class F>
CoordinateField<Rank> closed_form_field(std::string name, F f) {
  CoordinateField<Rank> field;
  field.name = std::move(name);
  field.taylor = [f](const ChartManifold&, const ChartPoint& p, int degree) {
    return detail::pack(detail::call_on_jets(f, p, degree), static_cast<int>(p.x.size()), Rank);
  };
  field.sample = [f](const ChartManifold&, const ChartPoint& p, const Derivation&) {
    return detail::pack(f(p.chart, std::span<const double>(p.x)), static_cast<int>(p.x.size()), Rank);
  };
  return field;
}

/// Scalar field from `f(int chart, std::span<const T> x) -> T`.
template <class F>
ScalarField closed_form_scalar(std::string name, F f) {
  return closed_form_field<0>(std::move(name), [f](int chart, auto x) {
    using T = std::remove_cvref_t<decltype(x[0])>;
    return std::vector<T>{f(chart, x)};
  });
}

/// Jet of coordinate components built from central differences of samples.
/// Degree <= 2; coefficients are second-order accurate in the step.
inline JetTensor finite_difference_jet(const std::function<Tensor(const ChartPoint&)>& sample,
                                       const ChartPoint& p, int degree, double h) {
  if (degree > 2)
    fail(ErrorKind::InsufficientSmoothness,
         "finite-difference mode delivers derivatives up to order 2, requested " + std::to_string(degree));
  const int n = static_cast<int>(p.x.size());
  const MonomialTable& table = MonomialTable::get(n, degree);
  auto at = [&](int a, double da, int b, double db) {
    ChartPoint q = p;
    if (a >= 0) q.x[a] += da;
    if (b >= 0) q.x[b] += db;
    return sample(q);
  };
  const Tensor v0 = sample(p);
  const size_t ncomp = v0.size();
  std::vector<std::vector<double>> coeffs(ncomp, std::vector<double>(table.size(), 0.0));
  for (size_t c = 0; c < ncomp; ++c) coeffs[c][0] = v0[c];
  if (degree >= 1) {
    for (int k = 0; k < n; ++k) {
      const Tensor vp = at(k, h, -1, 0.0);
      const Tensor vm = at(k, -h, -1, 0.0);
      int e[16] = {};
      e[k] = 1;
      const int i1 = table.index_of(std::span<const int>(e, n));
      e[k] = 2;
      const int i2 = degree >= 2 ? table.index_of(std::span<const int>(e, n)) : -1;
      for (size_t c = 0; c < ncomp; ++c) {
        coeffs[c][i1] = (vp[c] - vm[c]) / (2.0 * h);
        if (i2 >= 0) coeffs[c][i2] = (vp[c] - 2.0 * v0[c] + vm[c]) / (2.0 * h * h);
      }
    }
  }
  if (degree >= 2) {
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) {
        const Tensor pp = at(k, h, l, h), pm = at(k, h, l, -h), mp = at(k, -h, l, h), mm = at(k, -h, l, -h);
        int e[16] = {};
        e[k] = 1;
        e[l] = 1;
        const int i = table.index_of(std::span<const int>(e, n));
        for (size_t c = 0; c < ncomp; ++c) coeffs[c][i] = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h);
      }
  }
  JetTensor out(table, n, v0.rank());
  for (size_t c = 0; c < ncomp; ++c) out[c] = Jet::from_coefficients(table, coeffs[c], degree);
  return out;
}

/// Jet of a field at p, on the (n, degree) monomial table.
template <int Rank>
JetTensor field_jet(const CoordinateField<Rank>& field, const ChartManifold& m, const ChartPoint& p, int degree,
                    const Derivation& d) {
  if (d.is_analytic()) return field.taylor(m, p, degree);
  return finite_difference_jet([&](const ChartPoint& q) { return field.sample(m, q, d); }, p, degree, d.step);
}

// ---------------------------------------------------------------------------
// Local Levi-Civita data at a point

class LocalGeometry {
 public:
  /// Metric jets of the given degree; Christoffel symbols are then valid to
  /// degree-1 and the Riemann tensor (computed when degree >= 2) to degree-2.
  LocalGeometry(const ChartManifold& m, const ChartPoint& p, int degree, const Derivation& d)
      : n_(m.dim), degree_(degree) {
    if (static_cast<int>(p.x.size()) != m.dim) fail(ErrorKind::InvalidArgument, "point dimension mismatch");
    if (!d.is_analytic()) check_stencil(m, p, d.step);
    g_ = field_jet(m.metric, m, p, degree, d);
    frame_ = orthonormal_frame(g_.values().as_matrix());
    ginv_ = inverse(g_);
    if (degree >= 1) gamma_ = christoffel(g_, ginv_);
    if (degree >= 2) riemann_ = riemann(g_, gamma_);
  }

  int dim() const { return n_; }
  int degree() const { return degree_; }
  const MonomialTable& table() const { return g_.table(); }
  const JetTensor& metric() const { return g_; }
  const JetTensor& inverse_metric() const { return ginv_; }
  const JetTensor& christoffel_symbols() const { return gamma_; }
  const JetTensor& riemann_tensor() const {
    if (riemann_.size() == 0) fail(ErrorKind::InsufficientSmoothness, "Riemann tensor needs metric jets of degree >= 2");
    return riemann_;
  }
  /// Column a holds the coordinates of the orthonormal frame vector e_a.
  const Eigen::MatrixXd& frame() const { return frame_; }

  /// ric_ij = g^kl R_ikjl (coordinate components).
  JetTensor ricci() const {
    const JetTensor& R = riemann_tensor();
    JetTensor ric(table(), n_, 2);
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        Jet s(table(), 0.0);
        for (int k = 0; k < n_; ++k)
          for (int l = 0; l < n_; ++l) s += ginv_(k, l) * R(i, k, j, l);
        ric(i, j) = s;
        ric(j, i) = s;
      }
    return ric;
  }

  Jet trace(const JetTensor& t) const {
    Jet s(table(), 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += ginv_(i, j) * t(i, j);
    return s;
  }

 private:
  static void check_stencil(const ChartManifold& m, const ChartPoint& p, double h) {
    for (int k = 0; k < m.dim; ++k)
      for (double s : {-h, h}) {
        ChartPoint q = p;
        q.x[k] += s;
        Eigen::LLT<Eigen::MatrixXd> llt(m.metric.sample(m, q, Derivation::analytic()).as_matrix());
        if (llt.info() != Eigen::Success)
          fail(ErrorKind::NonPositiveMetric, "metric not positive definite at a stencil point");
      }
  }

  int n_;
  int degree_;
  JetTensor g_;
  JetTensor ginv_;
  JetTensor gamma_;
  JetTensor riemann_;
  Eigen::MatrixXd frame_;
};

/// Smallest eigenvalue of the coordinate metric at p.
inline double min_metric_eigenvalue(const ChartManifold& m, const ChartPoint& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.metric.sample(m, p, Derivation::analytic()).as_matrix());
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Curvature

struct CurvatureBundle {
  int dim = 0;
  Tensor riemann;  // frame components R_ijkl
  Eigen::MatrixXd ricci;
  double scalar = 0.0;
  std::optional<Eigen::MatrixXd> schouten;  // n >= 3
  std::optional<Tensor> weyl;               // n >= 3

  /// Sectional curvature of span(u, v); u, v in frame coordinates.
  double sectional(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    const double area2 = u.squaredNorm() * v.squaredNorm() - std::pow(u.dot(v), 2);
    if (!(area2 > 1e-14 * u.squaredNorm() * v.squaredNorm()))
      fail(ErrorKind::DegeneratePlane, "sectional curvature of linearly dependent vectors");
    double num = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k)
          for (int l = 0; l < dim; ++l) num += riemann(i, j, k, l) * u(i) * v(j) * u(k) * v(l);
    return num / area2;
  }

  static CurvatureBundle from_riemann(Tensor R) {
    CurvatureBundle b;
    const int n = R.dim();
    b.dim = n;
    b.ricci = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) b.ricci(i, j) += R(i, k, j, k);
    b.scalar = b.ricci.trace();
    if (n >= 3) {
      const Eigen::MatrixXd S = b.ricci - b.scalar / (2.0 * (n - 1)) * Eigen::MatrixXd::Identity(n, n);
      Tensor W(n, 4);
      auto d = [](int a, int c) { return a == c ? 1.0 : 0.0; };
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              W(i, j, k, l) = R(i, j, k, l) - (S(i, k) * d(j, l) - S(i, l) * d(j, k) + S(j, l) * d(i, k) -
                                               S(j, k) * d(i, l)) /
                                                  (n - 2.0);
      b.schouten = S;
      b.weyl = std::move(W);
    }
    b.riemann = std::move(R);
    return b;
  }
};

inline Tensor constant_curvature_riemann(int n, double K) {
  Tensor R(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      R(i, j, i, j) = K;
      R(i, j, j, i) = -K;
    }
  return R;
}

/// Curvature from the chart metric, irrespective of closed forms.
inline CurvatureBundle chart_curvature_at(const ChartManifold& m, const ChartPoint& p, const Derivation& d) {
  LocalGeometry geo(m, p, 2, d);
  return CurvatureBundle::from_riemann(to_frame(geo.riemann_tensor(), geo.frame()));
}

inline CurvatureBundle curvature_at(const ChartManifold& m, const ChartPoint& p) {
  if (m.kind == AtlasKind::AnalyticSphere) {
    // metric positivity is still part of the contract
    orthonormal_frame(m.metric.sample(m, p, Derivation::analytic()).as_matrix());
    return CurvatureBundle::from_riemann(constant_curvature_riemann(m.dim, m.sphere_curvature));
  }
  return chart_curvature_at(m, p, m.derivation());
}

// ---------------------------------------------------------------------------
// Fields derived from curvature

enum class CurvatureTensorKind { Ricci, Schouten, Einstein, ShiftedRicci };

namespace detail {

inline JetTensor curvature_tensor_jets(const LocalGeometry& geo, CurvatureTensorKind kind, double c) {
  const int n = geo.dim();
  JetTensor ric = geo.ricci();
  const Jet R = geo.trace(ric);
  const JetTensor& g = geo.metric();
  JetTensor out(geo.table(), n, 2);
  for (size_t i = 0; i < out.size(); ++i) {
    switch (kind) {
      case CurvatureTensorKind::Ricci: out[i] = ric[i]; break;
      case CurvatureTensorKind::Schouten: out[i] = ric[i] - (1.0 / (2.0 * (n - 1))) * (R * g[i]); break;
      case CurvatureTensorKind::Einstein: out[i] = 0.5 * (R * g[i]) - ric[i]; break;
      case CurvatureTensorKind::ShiftedRicci: out[i] = ric[i] - c * g[i]; break;
    }
  }
  return out;
}

inline std::string kind_name(CurvatureTensorKind kind) {
  switch (kind) {
    case CurvatureTensorKind::Ricci: return "ricci";
    case CurvatureTensorKind::Schouten: return "schouten";
    case CurvatureTensorKind::Einstein: return "einstein";
    case CurvatureTensorKind::ShiftedRicci: return "ricci-shifted";
  }
  return "?";
}

}  // namespace detail

/// Ricci, Schouten (ric - R/(2(n-1)) g), Einstein (R g / 2 - ric) or
/// ric - c g as a symmetric tensor field. The Schouten formula is evaluated
/// for any n >= 2 (it vanishes identically when n = 2).
inline SymmetricTensorField curvature_field(CurvatureTensorKind kind, double c = 0.0) {
  SymmetricTensorField f;
  f.name = detail::kind_name(kind);
  f.taylor = [kind, c](const ChartManifold& m, const ChartPoint& p, int degree) {
    LocalGeometry geo(m, p, degree + 2, Derivation::analytic());
    return detail::curvature_tensor_jets(geo, kind, c).on_table(MonomialTable::get(m.dim, degree));
  };
  f.sample = [kind, c](const ChartManifold& m, const ChartPoint& p, const Derivation& d) {
    LocalGeometry geo(m, p, 2, d);
    return detail::curvature_tensor_jets(geo, kind, c).values();
  };
  return f;
}

enum class CurvatureScalarKind { Scalar, SchoutenTrace };

inline ScalarField curvature_scalar_field(CurvatureScalarKind kind) {
  auto jets = [kind](const LocalGeometry& geo) {
    const int n = geo.dim();
    const Jet R = geo.trace(geo.ricci());
    JetTensor out(geo.table(), n, 0);
    out[0] = kind == CurvatureScalarKind::Scalar ? R : ((n - 2.0) / (2.0 * (n - 1))) * R;
    return out;
  };
  ScalarField f;
  f.name = kind == CurvatureScalarKind::Scalar ? "scalar-curvature" : "schouten-trace";
  f.taylor = [jets](const ChartManifold& m, const ChartPoint& p, int degree) {
    LocalGeometry geo(m, p, degree + 2, Derivation::analytic());
    return jets(geo).on_table(MonomialTable::get(m.dim, degree));
  };
  f.sample = [jets](const ChartManifold& m, const ChartPoint& p, const Derivation& d) {
    LocalGeometry geo(m, p, 2, d);
    return jets(geo).values();
  };
  return f;
}

/// The metric itself as a symmetric tensor field.
inline SymmetricTensorField metric_field() {
  SymmetricTensorField f;
  f.name = "metric";
  f.taylor = [](const ChartManifold& m, const ChartPoint& p, int degree) { return m.metric.taylor(m, p, degree); };
  f.sample = [](const ChartManifold& m, const ChartPoint& p, const Derivation& d) {
    return m.metric.sample(m, p, d);
  };
  return f;
}

/// Frame components of phi, nabla phi, nabla^2 phi at p (up to `order`).
struct FrameDerivatives {
  Tensor value;
  Tensor first;
  Tensor second;
};

template <int Rank>
FrameDerivatives frame_derivatives(const CoordinateField<Rank>& field, const ChartManifold& m, const ChartPoint& p,
                                   int order, const Derivation& d) {
  LocalGeometry geo(m, p, std::max(order, 1), d);
  JetTensor t = field_jet(field, m, p, std::max(order, 1), d);
  FrameDerivatives out;
  out.value = to_frame(t, geo.frame());
  if (order >= 1) {
    JetTensor d1 = covariant_derivative(t, geo.christoffel_symbols());
    out.first = to_frame(d1, geo.frame());
    if (order >= 2) out.second = to_frame(covariant_derivative(d1, geo.christoffel_symbols()), geo.frame());
  }
  return out;
}

/// div(phi)_i = sum_j phi_ijj in the orthonormal frame at p.
inline Eigen::VectorXd tensor_divergence(const SymmetricTensorField& phi, const ChartManifold& m, const ChartPoint& p) {
  const FrameDerivatives fd = frame_derivatives(phi, m, p, 1, m.derivation());
  const int n = m.dim;
  Eigen::VectorXd div = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) div(i) += fd.first(i, j, j);
  return div;
}

/// Frame components of the gradient of a scalar field.
inline Eigen::VectorXd scalar_gradient(const ScalarField& f, const ChartManifold& m, const ChartPoint& p) {
  const FrameDerivatives fd = frame_derivatives(f, m, p, 1, m.derivation());
  return fd.first.as_vector();
}

/// max_{i,j,k} |phi_ijk - phi_ikj|.
inline double codazzi_defect(const SymmetricTensorField& phi, const ChartManifold& m, const ChartPoint& p) {
  const FrameDerivatives fd = frame_derivatives(phi, m, p, 1, m.derivation());
  double defect = 0.0;
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j)
      for (int k = 0; k < m.dim; ++k) defect = std::max(defect, std::abs(fd.first(i, j, k) - fd.first(i, k, j)));
  return defect;
}

// ---------------------------------------------------------------------------
// Sampled curvature bounds

struct SamplePlan {
  int points = 64;
  int planes = 32;
  std::uint64_t seed = 42;
};

/// Estimate of min sectional curvature: axis-aligned frame planes plus
/// random orthonormal pairs at each sampled point. Exact for spheres.
inline double min_sectional(const ChartManifold& m, const SamplePlan& plan) {
  if (m.kind == AtlasKind::AnalyticSphere) return m.sphere_curvature;
  const int n = m.dim;
  double best = std::numeric_limits<double>::infinity();
  const auto points = m.sample_points(plan.points, plan.seed);
  for (size_t pi = 0; pi < points.size(); ++pi) {
    const CurvatureBundle b = curvature_at(m, points[pi]);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        best = std::min(best, b.sectional(Eigen::VectorXd::Unit(n, i), Eigen::VectorXd::Unit(n, j)));
    CounterRng rng(plan.seed, 0x5ec7000000000000ULL + pi);
    for (int k = 0; k < plan.planes; ++k) {
      Eigen::VectorXd u(n), v(n);
      for (int i = 0; i < n; ++i) u(i) = rng.normal();
      for (int i = 0; i < n; ++i) v(i) = rng.normal();
      u.normalize();
      v -= u.dot(v) * u;
      if (v.norm() < 1e-8) continue;
      v.normalize();
      best = std::min(best, b.sectional(u, v));
    }
  }
  return best;
}

/// Estimate of the least Ricci eigenvalue over sampled points.
inline double min_ricci(const ChartManifold& m, const SamplePlan& plan) {
  if (m.kind == AtlasKind::AnalyticSphere) return (m.dim - 1) * m.sphere_curvature;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : m.sample_points(plan.points, plan.seed)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(curvature_at(m, p).ricci);
    best = std::min(best, es.eigenvalues().minCoeff());
  }
  return best;
}

// ---------------------------------------------------------------------------
// Divergence identities for curvature-derived tensors

struct DivergenceReport {
  /// div(ric - c g); absent when R is not constant over the samples.
  std::optional<double> shifted_ricci_defect;
  bool r_not_constant = false;
  double scalar_spread = 0.0;
  /// div(R g / 2 - ric).
  double einstein_defect = 0.0;
  /// div S - grad(tr S).
  double schouten_defect = 0.0;
  /// div(ric) - grad(R) / 2 (contracted Bianchi).
  double bianchi_defect = 0.0;
  int points = 0;
};

inline DivergenceReport divergence_identity_suite(const ChartManifold& m, const SamplePlan& plan, double c = 0.0) {
  DivergenceReport rep;
  const auto points = m.sample_points(plan.points, plan.seed);
  rep.points = static_cast<int>(points.size());
  const ScalarField scalar = curvature_scalar_field(CurvatureScalarKind::Scalar);
  const ScalarField trS = curvature_scalar_field(CurvatureScalarKind::SchoutenTrace);
  const SymmetricTensorField ric = curvature_field(CurvatureTensorKind::Ricci);
  const SymmetricTensorField einstein = curvature_field(CurvatureTensorKind::Einstein);
  const SymmetricTensorField schouten = curvature_field(CurvatureTensorKind::Schouten);
  const SymmetricTensorField shifted = curvature_field(CurvatureTensorKind::ShiftedRicci, c);

  double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
  for (const auto& p : points) {
    const double R = scalar.sample(m, p, m.derivation())[0];
    rmin = std::min(rmin, R);
    rmax = std::max(rmax, R);
  }
  rep.scalar_spread = rmax - rmin;
  const double tol = m.derivation().is_analytic() ? 1e-9 : 50.0 * m.derivation().step * m.derivation().step;
  rep.r_not_constant = rep.scalar_spread > tol * std::max(1.0, std::abs(rmax));

  double shifted_defect = 0.0;
  for (const auto& p : points) {
    const Eigen::VectorXd gradR = scalar_gradient(scalar, m, p);
    rep.bianchi_defect = std::max(rep.bianchi_defect, (tensor_divergence(ric, m, p) - 0.5 * gradR).cwiseAbs().maxCoeff());
    rep.einstein_defect = std::max(rep.einstein_defect, tensor_divergence(einstein, m, p).cwiseAbs().maxCoeff());
    rep.schouten_defect = std::max(
        rep.schouten_defect, (tensor_divergence(schouten, m, p) - scalar_gradient(trS, m, p)).cwiseAbs().maxCoeff());
    if (!rep.r_not_constant)
      shifted_defect = std::max(shifted_defect, tensor_divergence(shifted, m, p).cwiseAbs().maxCoeff());
  }
  if (!rep.r_not_constant) rep.shifted_ricci_defect = shifted_defect;
  return rep;
}

// ---------------------------------------------------------------------------
// Built-in manifolds

/// Unit-sphere stereographic embedding s(u) = (2u, 1 - |u|^2) / (1 + |u|^2);
/// chart 1 mirrors the last coordinate so the two charts cover S^n.
template <class T>
std::vector<T> stereographic_embedding(int chart, std::span<const T> u) {
  const int n = static_cast<int>(u.size());
  T r2 = u[0] * u[0];
  for (int i = 1; i < n; ++i) r2 = r2 + u[i] * u[i];
  const T inv = 1.0 / (1.0 + r2);
  std::vector<T> s;
  s.reserve(n + 1);
  for (int i = 0; i < n; ++i) s.push_back(2.0 * u[i] * inv);
  T last = (1.0 - r2) * inv;
  s.push_back(chart == 0 ? last : -last);
  return s;
}

/// Chart point (|u| <= 1) of a unit vector y in R^{n+1}.
inline ChartPoint stereographic_chart_point(const Eigen::VectorXd& y) {
  const int n = static_cast<int>(y.size()) - 1;
  ChartPoint p;
  const double last = y(n);
  p.chart = last >= 0.0 ? 0 : 1;
  const double denom = 1.0 + std::abs(last);
  p.x.resize(n);
  for (int i = 0; i < n; ++i) p.x[i] = y(i) / denom;
  return p;
}

inline std::function<std::vector<ChartPoint>(int, std::uint64_t)> sphere_sampler(int n) {
  return [n](int count, std::uint64_t seed) {
    std::vector<ChartPoint> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
      CounterRng rng(seed, static_cast<std::uint64_t>(k));
      Eigen::VectorXd y(n + 1);
      for (int i = 0; i <= n; ++i) y(i) = rng.normal();
      pts.push_back(stereographic_chart_point(y.normalized()));
    }
    return pts;
  };
}

inline std::vector<Chart> stereographic_charts(int n) {
  return {Chart{Point(n, -1.0), Point(n, 1.0), {}}, Chart{Point(n, -1.0), Point(n, 1.0), {}}};
}

/// Round S^n of constant curvature K in stereographic coordinates:
/// g = 4 / (K (1 + |u|^2)^2) delta.
inline ChartManifold round_sphere(int n, double K) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "sphere dimension must be >= 2");
  if (!(K > 0.0)) fail(ErrorKind::InvalidArgument, "sphere curvature must be positive");
  ChartManifold m;
  m.dim = n;
  m.kind = AtlasKind::AnalyticSphere;
  m.sphere_curvature = K;
  m.charts = stereographic_charts(n);
  m.metric = closed_form_field<2>("round-sphere-metric", [n, K](int, auto u) {
    using T = std::remove_cvref_t<decltype(u[0])>;
    T r2 = u[0] * u[0];
    for (int i = 1; i < n; ++i) r2 = r2 + u[i] * u[i];
    const T w = 1.0 + r2;
    const T conf = (4.0 / K) / (w * w);
    std::vector<T> g(static_cast<size_t>(n) * n, 0.0 * conf);
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i) * n + i] = conf;
    return g;
  });
  m.sampler = sphere_sampler(n);
  m.spec = "sphere:n=" + std::to_string(n) + ",K=" + std::to_string(K);
  return m;
}

enum class TorusPerturbation { None, Sin, Mixed };

/// T^n = R^n / (L Z)^n with g = delta (None), (1 + eps sin theta_1) delta
/// (Sin, conformally flat) or a non-diagonal, non-conformal perturbation
/// (Mixed); theta_i = 2 pi x_i / L.
inline ChartManifold torus(int n, double L, TorusPerturbation pert, double eps = 0.1) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "torus dimension must be >= 2");
  ChartManifold m;
  m.dim = n;
  m.kind = AtlasKind::PeriodicBox;
  m.lengths.assign(n, L);
  m.charts = {Chart{Point(n, 0.0), Point(n, L), {}}};
  const double w = 2.0 * std::numbers::pi / L;
  m.metric = closed_form_field<2>("torus-metric", [n, w, pert, eps](int, auto x) {
    using T = std::remove_cvref_t<decltype(x[0])>;
    using std::cos;
    using std::sin;
    std::vector<T> g(static_cast<size_t>(n) * n, 0.0 * x[0]);
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i) * n + i] = g[static_cast<size_t>(i) * n + i] + 1.0;
    if (pert == TorusPerturbation::Sin) {
      const T conf = 1.0 + eps * sin(w * x[0]);
      for (int i = 0; i < n; ++i) g[static_cast<size_t>(i) * n + i] = conf;
    } else if (pert == TorusPerturbation::Mixed) {
      for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        g[static_cast<size_t>(i) * n + i] = g[static_cast<size_t>(i) * n + i] + eps * sin(w * (x[i] + 2.0 * x[j]));
        for (int k = i + 1; k < n; ++k) {
          const T off = 0.5 * eps * cos(w * (x[i] - x[k]) + 0.3 * (i + k));
          g[static_cast<size_t>(i) * n + k] = off;
          g[static_cast<size_t>(k) * n + i] = off;
        }
      }
    }
    return g;
  });
  m.sampler = [n, L](int count, std::uint64_t seed) {
    std::vector<ChartPoint> pts;
    for (int k = 0; k < count; ++k) {
      CounterRng rng(seed, static_cast<std::uint64_t>(k));
      ChartPoint p;
      for (int i = 0; i < n; ++i) p.x.push_back(rng.uniform(0.0, L));
      pts.push_back(std::move(p));
    }
    return pts;
  };
  return m;
}

/// Parse "torusN:L=...,perturb=none|sin|mixed,eps=..." or "sphere:n=..,K=..".
inline ChartManifold parse_manifold(std::string_view text) {
  const SpecString s = SpecString::parse(text);
  ChartManifold m;
  if (s.name.rfind("torus", 0) == 0) {
    const std::string digits = s.name.substr(5);
    const int n = digits.empty() ? 2 : static_cast<int>(SpecString::to_double(digits));
    const std::string p = s.text("perturb", "none");
    TorusPerturbation pert = TorusPerturbation::None;
    if (p == "sin")
      pert = TorusPerturbation::Sin;
    else if (p == "mixed")
      pert = TorusPerturbation::Mixed;
    else if (p != "none" && p != "flat")
      fail(ErrorKind::ConfigParse, "unknown torus perturbation '" + p + "'");
    m = torus(n, s.number("L", 2.0 * std::numbers::pi), pert, s.number("eps", 0.1));
  } else if (s.name == "sphere") {
    m = round_sphere(static_cast<int>(s.number("n", 2)), s.number("K", 1.0));
  } else {
    fail(ErrorKind::ConfigParse, "unknown manifold '" + s.name + "'");
  }
  if (s.has("fd")) m = with_derivation(m, Derivation::finite_difference(s.number("fd", 1e-4)));
  m.spec = std::string(text);
  return m;
}

}  // namespace spectra_bochner
