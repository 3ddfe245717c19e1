#pragma once

// Hypersurfaces x: M^n -> space form of curvature kappa.
//
// kappa = 0: immersion into R^{n+1}. kappa > 0: immersion into the sphere
// of radius 1/sqrt(kappa) centred at the origin of R^{n+2}; the normal is
// taken orthogonal to both dX and X, so h_ij = <d_i d_j X, nu> is the second
// fundamental form relative to the sphere. kappa < 0 exists only as the
// analytic umbilic model (intrinsic round metric, h = alpha g).
//
// Mean curvature is the trace H = tr A, not the average.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/geometry.hpp"
#include "spectra_bochner/jet.hpp"
#include "spectra_bochner/spec_string.hpp"
#include "spectra_bochner/tensor.hpp"

namespace spectra_bochner {

struct ImmersedHypersurface {
  int n = 2;
  double kappa = 0.0;
  int ambient_dim = 3;
  /// Immersion in jet arithmetic; empty for the analytic umbilic model.
  std::function<std::vector<Jet>(int chart, std::span<const Jet> u)> immersion;
  /// Inverse parametrization: chart point whose image is (closest to) y.
  std::function<ChartPoint(const Eigen::VectorXd& y)> locate;
  /// Interior reference point; the default normal points towards it.
  Eigen::VectorXd center;
  int orientation = 1;
  std::optional<double> umbilic_alpha;
  ChartManifold induced;
  std::string spec;

  bool analytic_umbilic() const { return !immersion; }
};

struct ShapeData {
  Eigen::MatrixXd A;  // frame components of the shape operator
  double H = 0.0;
  Eigen::MatrixXd P1;
  double normA2 = 0.0;
  double S2 = 0.0;

  static ShapeData from_shape_operator(const Eigen::MatrixXd& A) {
    ShapeData sd;
    sd.A = A;
    sd.H = A.trace();
    sd.P1 = sd.H * Eigen::MatrixXd::Identity(A.rows(), A.cols()) - A;
    sd.normA2 = A.squaredNorm();
    sd.S2 = 0.5 * (sd.H * sd.H - sd.normA2);
    return sd;
  }

  Eigen::VectorXd principal_curvatures() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    return es.eigenvalues();
  }
};

struct PinchingConstants {
  double alpha = 0.0;
  double a = 1.0;
  double sigma = 0.0;
  bool constant_mean_curvature = false;
  int samples = 0;
};

// ---------------------------------------------------------------------------
// Fundamental forms in jets

struct FundamentalForms {
  JetTensor g;  // induced metric
  JetTensor h;  // second fundamental form (coordinate components)
};

namespace detail {

inline std::vector<Jet> immersion_jets(const ImmersedHypersurface& hs, const ChartPoint& p, int degree) {
  const MonomialTable& t = MonomialTable::get(hs.n, degree);
  std::vector<Jet> u;
  for (int i = 0; i < hs.n; ++i) u.push_back(Jet::variable(t, i, p.x[i]));
  return hs.immersion(p.chart, std::span<const Jet>(u));
}

inline Jet dot(const std::vector<Jet>& a, const std::vector<Jet>& b) {
  Jet s = a[0] * b[0];
  for (size_t i = 1; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline JetTensor induced_metric_jets(const ImmersedHypersurface& hs, const ChartPoint& p, int degree) {
  const std::vector<Jet> X = immersion_jets(hs, p, degree + 1);
  const int n = hs.n;
  std::vector<std::vector<Jet>> dX(n);
  for (int i = 0; i < n; ++i)
    for (const Jet& x : X) dX[i].push_back(x.derivative(i));
  JetTensor g(X[0].table(), n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      g(i, j) = dot(dX[i], dX[j]);
      g(j, i) = g(i, j);
    }
  return g.on_table(MonomialTable::get(n, degree));
}

}  // namespace detail

/// g and h to the given jet degree (immersion jets of degree + 2).
inline FundamentalForms fundamental_forms(const ImmersedHypersurface& hs, const ChartPoint& p, int degree) {
  const int n = hs.n;
  const MonomialTable& out_table = MonomialTable::get(n, degree);
  if (hs.analytic_umbilic()) {
    FundamentalForms ff;
    ff.g = hs.induced.metric.taylor(hs.induced, p, degree);
    ff.h = JetTensor(out_table, n, 2);
    for (size_t i = 0; i < ff.h.size(); ++i) ff.h[i] = (*hs.umbilic_alpha * hs.orientation) * ff.g[i];
    return ff;
  }
  const std::vector<Jet> X = detail::immersion_jets(hs, p, degree + 2);
  const MonomialTable& t = X[0].table();
  const int N = hs.ambient_dim;

  // spanning set of the tangent space of the ambient space form's
  // orthogonal complement: dX_i, plus X itself in the sphere model
  std::vector<std::vector<Jet>> span_vecs;
  for (int i = 0; i < n; ++i) {
    std::vector<Jet> v;
    for (const Jet& x : X) v.push_back(x.derivative(i));
    span_vecs.push_back(std::move(v));
  }
  if (hs.kappa > 0.0) span_vecs.push_back(X);
  const int m = static_cast<int>(span_vecs.size());

  JetTensor G(t, m, 2);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      G(a, b) = detail::dot(span_vecs[a], span_vecs[b]);
      G(b, a) = G(a, b);
    }
  Eigen::MatrixXd Tv(N, m);
  for (int a = 0; a < m; ++a)
    for (int k = 0; k < N; ++k) Tv(k, a) = span_vecs[a][k].value();
  {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Tv);
    if (lu.rank() < m) fail(ErrorKind::DegenerateImmersion, "immersion Jacobian is rank deficient");
  }
  const Eigen::MatrixXd proj =
      Eigen::MatrixXd::Identity(N, N) - Tv * (Tv.transpose() * Tv).ldlt().solve(Tv.transpose());
  int e = 0;
  proj.diagonal().maxCoeff(&e);
  const JetTensor Ginv = inverse(G);

  // w = e - sum_ab T_a Ginv_ab <T_b, e>
  std::vector<Jet> w(N, Jet(t, 0.0));
  w[e] += 1.0;
  for (int a = 0; a < m; ++a) {
    Jet coeff(t, 0.0);
    for (int b = 0; b < m; ++b) coeff += Ginv(a, b) * span_vecs[b][e];
    for (int k = 0; k < N; ++k) w[k] -= coeff * span_vecs[a][k];
  }
  const Jet inv_norm = detail::dot(w, w).pow_real(-0.5);
  double to_center = 0.0;
  for (int k = 0; k < N; ++k) to_center += w[k].value() * (hs.center(k) - X[k].value());
  const double sign = (to_center >= 0.0 ? 1.0 : -1.0) * hs.orientation;
  std::vector<Jet> nu;
  for (int k = 0; k < N; ++k) nu.push_back(sign * (w[k] * inv_norm));

  FundamentalForms ff;
  JetTensor g(t, n, 2), h(t, n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      g(i, j) = g(j, i) = detail::dot(span_vecs[i], span_vecs[j]);
      std::vector<Jet> dij;
      for (const Jet& x : span_vecs[i]) dij.push_back(x.derivative(j));
      h(i, j) = h(j, i) = detail::dot(dij, nu);
    }
  ff.g = g.on_table(out_table);
  ff.h = h.on_table(out_table);
  return ff;
}

inline ShapeData shape_at(const ImmersedHypersurface& hs, const ChartPoint& p) {
  const FundamentalForms ff = fundamental_forms(hs, p, 0);
  const Eigen::MatrixXd g = ff.g.values().as_matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (!(es.eigenvalues().minCoeff() > 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff())))
    fail(ErrorKind::DegenerateImmersion, "induced metric is singular");
  const Eigen::MatrixXd E = orthonormal_frame(g);
  Eigen::MatrixXd A = E.transpose() * ff.h.values().as_matrix() * E;
  A = 0.5 * (A + A.transpose());
  return ShapeData::from_shape_operator(A);
}

/// Columns: ambient coordinates of the orthonormal frame vectors at p.
inline Eigen::MatrixXd ambient_frame(const ImmersedHypersurface& hs, const ChartPoint& p) {
  if (hs.analytic_umbilic()) fail(ErrorKind::InvalidArgument, "analytic umbilic model has no ambient realisation");
  const std::vector<Jet> X = detail::immersion_jets(hs, p, 1);
  Eigen::MatrixXd J(hs.ambient_dim, hs.n);
  for (int k = 0; k < hs.ambient_dim; ++k)
    for (int i = 0; i < hs.n; ++i) J(k, i) = X[k].partial({i});
  return J * orthonormal_frame(J.transpose() * J);
}

inline Eigen::VectorXd immersion_point(const ImmersedHypersurface& hs, const ChartPoint& p) {
  const std::vector<Jet> X = detail::immersion_jets(hs, p, 0);
  Eigen::VectorXd y(hs.ambient_dim);
  for (int k = 0; k < hs.ambient_dim; ++k) y(k) = X[k].value();
  return y;
}

/// Intrinsic curvature from the Gauss equation.
inline CurvatureBundle gauss_intrinsic(const ImmersedHypersurface& hs, const ChartPoint& p) {
  const ShapeData sd = shape_at(hs, p);
  const int n = hs.n;
  Tensor R = constant_curvature_riemann(n, hs.kappa);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) R(i, j, k, l) += sd.A(i, k) * sd.A(j, l) - sd.A(i, l) * sd.A(j, k);
  return CurvatureBundle::from_riemann(std::move(R));
}

/// Q(A) = 2A^3 - 3HA^2 + (2H^2 - |A|^2 - kappa(n-2))A + kappa(2n-3)H I.
inline Eigen::MatrixXd q_polynomial(const ShapeData& sd, double kappa) {
  const int n = static_cast<int>(sd.A.rows());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd A2 = sd.A * sd.A;
  return 2.0 * A2 * sd.A - 3.0 * sd.H * A2 + (2.0 * sd.H * sd.H - sd.normA2 - kappa * (n - 2)) * sd.A +
         kappa * (2.0 * n - 3.0) * sd.H * I;
}

/// Diagonal of Q for a diagonal shape operator with entries h.
inline Eigen::VectorXd q_diagonal(const Eigen::VectorXd& h, double kappa) {
  const int n = static_cast<int>(h.size());
  const double H = h.sum(), A2 = h.squaredNorm();
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) {
    const double x = h(i);
    q(i) = 2 * x * x * x - 3 * H * x * x + (2 * H * H - A2 - kappa * (n - 2)) * x + kappa * (2.0 * n - 3.0) * H;
  }
  return q;
}

/// Lower bound for min_i <Q(A) e_i, e_i> under alpha I <= A <= a alpha I.
inline double q_lower_bound(int n, double kappa, double alpha, double a) {
  const double base = 2.0 * (n - 1) * alpha * alpha * alpha * (n - a * a);
  return kappa > 0.0 ? base + 2.0 * kappa * (n - 1) * (n - 1) * alpha
                     : base + 2.0 * kappa * (n - 1) * (n - 1) * a * alpha;
}

// ---------------------------------------------------------------------------
// Fields on the induced manifold

namespace detail {

inline JetTensor newton_jets(const FundamentalForms& ff) {
  const int n = ff.g.dim();
  const JetTensor ginv = inverse(ff.g);
  Jet H(ff.g.table(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H += ginv(i, j) * ff.h(i, j);
  JetTensor P(ff.g.table(), n, 2);
  for (size_t i = 0; i < P.size(); ++i) P[i] = H * ff.g[i] - ff.h[i];
  return P;
}

inline Jet mean_curvature_jet(const FundamentalForms& ff) {
  const int n = ff.g.dim();
  const JetTensor ginv = inverse(ff.g);
  Jet H(ff.g.table(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H += ginv(i, j) * ff.h(i, j);
  return H;
}

}  // namespace detail

inline SymmetricTensorField second_fundamental_form_field(std::shared_ptr<const ImmersedHypersurface> hs) {
  SymmetricTensorField f;
  f.name = "second-fundamental-form";
  f.taylor = [hs](const ChartManifold&, const ChartPoint& p, int degree) {
    return fundamental_forms(*hs, p, degree).h;
  };
  f.sample = [hs](const ChartManifold&, const ChartPoint& p, const Derivation&) {
    return fundamental_forms(*hs, p, 0).h.values();
  };
  return f;
}

/// P1 = H g - h as a (0,2) field on the induced manifold.
inline SymmetricTensorField newton_field(std::shared_ptr<const ImmersedHypersurface> hs) {
  SymmetricTensorField f;
  f.name = "newton1";
  f.taylor = [hs](const ChartManifold&, const ChartPoint& p, int degree) {
    return detail::newton_jets(fundamental_forms(*hs, p, degree));
  };
  f.sample = [hs](const ChartManifold&, const ChartPoint& p, const Derivation&) {
    return detail::newton_jets(fundamental_forms(*hs, p, 0)).values();
  };
  return f;
}

inline ScalarField mean_curvature_field(std::shared_ptr<const ImmersedHypersurface> hs) {
  ScalarField f;
  f.name = "mean-curvature";
  auto pack = [](const Jet& H) {
    JetTensor t(H.table(), H.table().nvars(), 0);
    t[0] = H;
    return t;
  };
  f.taylor = [hs, pack](const ChartManifold&, const ChartPoint& p, int degree) {
    return pack(detail::mean_curvature_jet(fundamental_forms(*hs, p, degree)));
  };
  f.sample = [hs, pack](const ChartManifold&, const ChartPoint& p, const Derivation&) {
    return pack(detail::mean_curvature_jet(fundamental_forms(*hs, p, 0))).values();
  };
  return f;
}

/// P1 at the surface point nearest y, as a symmetric ambient tensor
/// T P1 T^T (T = ambient frame); used by mesh assembly.
inline Eigen::MatrixXd newton_ambient_tensor(const ImmersedHypersurface& hs, const Eigen::VectorXd& y) {
  const ChartPoint p = hs.locate(y);
  const ShapeData sd = shape_at(hs, p);
  const Eigen::MatrixXd T = ambient_frame(hs, p);
  return T * sd.P1 * T.transpose();
}

// ---------------------------------------------------------------------------
// Pinching constants

/// (alpha, a) from sampled principal curvatures; sigma as the maximum over
/// sampled p of max_v tr(Hess H restricted to v-perp), which for each p is
/// tr(Hess H) - lambda_min(Hess H).
inline PinchingConstants pinching_constants(const ImmersedHypersurface& hs, const SamplePlan& plan,
                                            double cmc_tolerance = 1e-9) {
  PinchingConstants pc;
  if (hs.analytic_umbilic()) {
    pc.alpha = *hs.umbilic_alpha;
    pc.a = 1.0;
    pc.sigma = 0.0;
    pc.constant_mean_curvature = true;
    return pc;
  }
  const auto points = hs.induced.sample_points(plan.points, plan.seed);
  pc.samples = static_cast<int>(points.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : points) {
    const Eigen::VectorXd k = shape_at(hs, p).principal_curvatures();
    if (!(k.minCoeff() > 0.0)) fail(ErrorKind::NotConvex, "principal curvature <= 0 at a sampled point");
    lo = std::min(lo, k.minCoeff());
    hi = std::max(hi, k.maxCoeff());
  }
  pc.alpha = lo;
  pc.a = hi / lo;

  auto shared = std::make_shared<const ImmersedHypersurface>(hs);
  const ScalarField H = mean_curvature_field(shared);
  std::vector<FrameDerivatives> derivs;
  double grad_max = 0.0;
  for (const auto& p : points) {
    derivs.push_back(frame_derivatives(H, hs.induced, p, 2, Derivation::analytic()));
    grad_max = std::max(grad_max, derivs.back().first.as_vector().cwiseAbs().maxCoeff());
  }
  pc.constant_mean_curvature = grad_max < cmc_tolerance;
  if (pc.constant_mean_curvature) return pc;
  double sigma = -std::numeric_limits<double>::infinity();
  for (const auto& d : derivs) {
    Eigen::MatrixXd hess = d.second.as_matrix();
    hess = 0.5 * (hess + hess.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    sigma = std::max(sigma, hess.trace() - es.eigenvalues().minCoeff());
  }
  pc.sigma = sigma;
  return pc;
}

// ---------------------------------------------------------------------------
// Built-in hypersurfaces

namespace detail {

inline ChartManifold induced_chart_manifold(std::shared_ptr<ImmersedHypersurface> hs) {
  ChartManifold m;
  m.dim = hs->n;
  m.kind = AtlasKind::Immersion;
  m.charts = stereographic_charts(hs->n);
  auto X = hs->immersion;
  const int n = hs->n;
  const double kappa = hs->kappa;
  // the metric only depends on the immersion, so capture a lightweight copy
  auto carrier = std::make_shared<ImmersedHypersurface>();
  carrier->n = n;
  carrier->kappa = kappa;
  carrier->ambient_dim = hs->ambient_dim;
  carrier->immersion = X;
  m.metric.name = "induced-metric";
  m.metric.taylor = [carrier](const ChartManifold&, const ChartPoint& p, int degree) {
    return induced_metric_jets(*carrier, p, degree);
  };
  m.metric.sample = [carrier](const ChartManifold&, const ChartPoint& p, const Derivation&) {
    return induced_metric_jets(*carrier, p, 0).values();
  };
  m.sampler = sphere_sampler(n);
  m.spec = hs->spec;
  return m;
}

/// Flip the orientation if H < 0 at the chart-0 origin.
inline void orient(ImmersedHypersurface& hs) {
  ChartPoint ref{0, Point(hs.n, 0.0)};
  if (shape_at(hs, ref).H < 0.0) hs.orientation = -hs.orientation;
}

inline ChartPoint locate_on_unit_sphere(Eigen::VectorXd y) {
  const double r = y.norm();
  if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "cannot locate the origin on a sphere");
  return stereographic_chart_point(y / r);
}

inline ImmersedHypersurface finish(std::shared_ptr<ImmersedHypersurface> hs) {
  hs->induced = induced_chart_manifold(hs);
  orient(*hs);
  return *hs;
}

}  // namespace detail

/// Ellipsoid with semi-axes (a_1, ..., a_{n+1}) in R^{n+1}.
inline ImmersedHypersurface ellipsoid(std::vector<double> axes) {
  const int n = static_cast<int>(axes.size()) - 1;
  if (n < 2) fail(ErrorKind::InvalidArgument, "ellipsoid needs at least 3 semi-axes");
  for (double a : axes)
    if (!(a > 0.0)) fail(ErrorKind::InvalidArgument, "ellipsoid semi-axes must be positive");
  auto hs = std::make_shared<ImmersedHypersurface>();
  hs->n = n;
  hs->kappa = 0.0;
  hs->ambient_dim = n + 1;
  hs->center = Eigen::VectorXd::Zero(n + 1);
  hs->immersion = [axes](int chart, std::span<const Jet> u) {
    std::vector<Jet> s = stereographic_embedding(chart, u);
    for (size_t k = 0; k < s.size(); ++k) s[k] *= axes[k];
    return s;
  };
  hs->locate = [axes](const Eigen::VectorXd& y) {
    Eigen::VectorXd z = y;
    for (int k = 0; k < z.size(); ++k) z(k) /= axes[k];
    return detail::locate_on_unit_sphere(z);
  };
  std::string spec = "ellipsoid:";
  for (size_t k = 0; k < axes.size(); ++k) spec += (k ? "," : "") + std::to_string(axes[k]);
  hs->spec = spec;
  return detail::finish(hs);
}

inline ImmersedHypersurface sphere_surface(double r, int n = 2) {
  ImmersedHypersurface hs = ellipsoid(std::vector<double>(n + 1, r));
  hs.spec = "sphere:r=" + std::to_string(r) + ",n=" + std::to_string(n);
  return hs;
}

/// Umbilic sphere with A = alpha I in the space form of curvature kappa.
/// kappa = 0: round sphere of radius 1/alpha; kappa > 0: geodesic sphere of
/// the (n+1)-sphere of radius 1/sqrt(kappa); kappa < 0: analytic model only
/// (intrinsically round of curvature alpha^2 + kappa, h = alpha g).
inline ImmersedHypersurface geodesic_sphere(int n, double kappa, double alpha) {
  if (!(alpha > 0.0)) fail(ErrorKind::InvalidArgument, "geodesic sphere needs alpha > 0");
  const std::string spec =
      "geodesic-sphere:kappa=" + std::to_string(kappa) + ",alpha=" + std::to_string(alpha) + ",n=" + std::to_string(n);
  if (kappa == 0.0) {
    ImmersedHypersurface hs = sphere_surface(1.0 / alpha, n);
    hs.spec = spec;
    return hs;
  }
  if (kappa < 0.0) {
    if (!(alpha * alpha + kappa > 0.0))
      fail(ErrorKind::InvalidArgument, "umbilic hypersurface in hyperbolic space needs alpha^2 + kappa > 0");
    ImmersedHypersurface hs;
    hs.n = n;
    hs.kappa = kappa;
    hs.ambient_dim = 0;
    hs.umbilic_alpha = alpha;
    hs.induced = round_sphere(n, alpha * alpha + kappa);
    hs.spec = spec;
    return hs;
  }
  const double R = 1.0 / std::sqrt(kappa);
  const double theta = std::atan(std::sqrt(kappa) / alpha);
  const double rs = R * std::sin(theta), rc = R * std::cos(theta);
  auto hs = std::make_shared<ImmersedHypersurface>();
  hs->n = n;
  hs->kappa = kappa;
  hs->ambient_dim = n + 2;
  hs->center = Eigen::VectorXd::Zero(n + 2);
  hs->center(n + 1) = R;
  hs->immersion = [rs, rc](int chart, std::span<const Jet> u) {
    std::vector<Jet> s = stereographic_embedding(chart, u);
    for (Jet& x : s) x *= rs;
    s.push_back(Jet(u[0].table(), rc));
    return s;
  };
  hs->locate = [n](const Eigen::VectorXd& y) { return detail::locate_on_unit_sphere(y.head(n + 1)); };
  hs->spec = spec;
  return detail::finish(hs);
}

/// "sphere:r=1", "ellipsoid:1,1,1.1", "geodesic-sphere:kappa=1,alpha=2[,n=3]".
inline ImmersedHypersurface parse_surface(std::string_view text) {
  const SpecString s = SpecString::parse(text);
  ImmersedHypersurface hs;
  if (s.name == "sphere") {
    hs = sphere_surface(s.number("r", 1.0), static_cast<int>(s.number("n", 2)));
  } else if (s.name == "ellipsoid") {
    std::vector<double> axes = s.positional_numbers();
    if (axes.empty()) axes = {s.number("a", 1.0), s.number("b", 1.0), s.number("c", 1.0)};
    hs = ellipsoid(axes);
  } else if (s.name == "geodesic-sphere") {
    hs = geodesic_sphere(static_cast<int>(s.number("n", 2)), s.number("kappa", 0.0), s.number("alpha", 1.0));
  } else {
    fail(ErrorKind::ConfigParse, "unknown surface '" + s.name + "'");
  }
  if (s.text("orientation", "") == "flip") hs.orientation = -hs.orientation;
  hs.spec = std::string(text);
  return hs;
}

}  // namespace spectra_bochner
