#pragma once

// The operator box f = sum_ij phi_ij f_ij for a symmetric 2-tensor phi,
// its divergence form, and a pointwise residual of the generalized Bochner
// identity
//
//   1/2 box|grad f|^2 = <grad f, grad box f> + <phi grad f, grad lap f>
//                     + 2 phi_ij f_jk f_ki + 2 f_i f_j phi_im R_mkjk
//                     + c (tr phi)_ij f_i f_j - f_i f_j lap(phi)_ij
//                     + f_i f_j (phi_ikk - c phi_kki)_j
//                     + (f_i f_j (phi_jik - phi_jki))_k - (f_j phi_ij f_ik)_k
//
// evaluated at a point in the orthonormal frame of geometry.hpp. The three
// composite terms (left side and the two gradient pairings) are computed by
// differentiating jets of the composite scalar; every other term comes from
// frame contractions of covariant derivatives of f and phi. The last two
// groups are expanded by the product rule.

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/geometry.hpp"
#include "spectra_bochner/hypersurface.hpp"
#include "spectra_bochner/jet.hpp"
#include "spectra_bochner/tensor.hpp"

namespace spectra_bochner {

enum class BoxKind { Laplacian, Schouten, NewtonL1, Custom };

inline std::string to_string(BoxKind k) {
  switch (k) {
    case BoxKind::Laplacian: return "laplacian";
    case BoxKind::Schouten: return "schouten";
    case BoxKind::NewtonL1: return "newton1";
    case BoxKind::Custom: return "custom";
  }
  return "?";
}

struct BoxOperator {
  BoxKind kind = BoxKind::Laplacian;
  SymmetricTensorField phi;
  ChartManifold manifold;
  std::shared_ptr<const ImmersedHypersurface> surface;

  static BoxOperator laplacian(ChartManifold m) { return {BoxKind::Laplacian, metric_field(), std::move(m), {}}; }

  static BoxOperator schouten(ChartManifold m) {
    if (m.dim < 3) fail(ErrorKind::SchoutenUndefined, "the Schouten operator needs n >= 3");
    return {BoxKind::Schouten, curvature_field(CurvatureTensorKind::Schouten), std::move(m), {}};
  }

  static BoxOperator newton(const ImmersedHypersurface& hs) {
    auto shared = std::make_shared<const ImmersedHypersurface>(hs);
    return {BoxKind::NewtonL1, newton_field(shared), hs.induced, shared};
  }

  static BoxOperator custom(ChartManifold m, SymmetricTensorField phi) {
    return {BoxKind::Custom, std::move(phi), std::move(m), {}};
  }
};

namespace detail {

inline JetTensor scalar_tensor(const Jet& f) {
  JetTensor t(f.table(), f.table().nvars(), 0);
  t[0] = f;
  return t;
}

/// phi^{ab} = g^{ai} phi_ij g^{jb}.
inline JetTensor raise_both(const JetTensor& phi, const JetTensor& ginv) {
  const int n = phi.dim();
  JetTensor tmp(phi.table(), n, 2), out(phi.table(), n, 2);
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j) {
      Jet s(phi.table(), 0.0);
      for (int i = 0; i < n; ++i) s += ginv(a, i) * phi(i, j);
      tmp(a, j) = s;
    }
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Jet s(phi.table(), 0.0);
      for (int j = 0; j < n; ++j) s += tmp(a, j) * ginv(j, b);
      out(a, b) = s;
      out(b, a) = s;
    }
  return out;
}

inline Jet full_contraction(const JetTensor& up, const JetTensor& down) {
  Jet s(up.table(), 0.0);
  for (size_t i = 0; i < up.size(); ++i) s += up[i] * down[i];
  return s;
}

/// Coordinate covariant Hessian of a scalar jet.
inline JetTensor hessian(const Jet& f, const JetTensor& gamma) {
  return covariant_derivative(covariant_derivative(scalar_tensor(f), gamma), gamma);
}

}  // namespace detail

/// box f at p in the orthonormal frame: sum_ij phi_ij f_ij.
inline double apply(const BoxOperator& box, const ScalarField& f, const ChartPoint& p) {
  const Derivation& d = box.manifold.derivation();
  const FrameDerivatives fd = frame_derivatives(f, box.manifold, p, 2, d);
  const FrameDerivatives pd = frame_derivatives(box.phi, box.manifold, p, 0, d);
  const int n = box.manifold.dim;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += pd.value(i, j) * fd.second(i, j);
  return s;
}

/// |box f - (div(phi grad f) - <div phi, grad f>)| at p. The divergence is
/// taken in coordinates, (1/sqrt g) d_i (sqrt g V^i), independently of the
/// frame route used by apply.
inline double divergence_form_defect(const BoxOperator& box, const ScalarField& f, const ChartPoint& p) {
  const ChartManifold& m = box.manifold;
  const Derivation& d = m.derivation();
  const int n = m.dim;
  LocalGeometry geo(m, p, 2, d);
  const JetTensor fj = field_jet(f, m, p, 2, d);
  const JetTensor phij = field_jet(box.phi, m, p, 2, d);
  const JetTensor up = detail::raise_both(phij, geo.inverse_metric());
  const Jet sqrt_det = sqrt(determinant(geo.metric()));
  Jet div(geo.table(), 0.0);
  for (int i = 0; i < n; ++i) {
    Jet Vi(geo.table(), 0.0);
    for (int a = 0; a < n; ++a) Vi += up(i, a) * fj[0].derivative(a);
    div += (sqrt_det * Vi).derivative(i);
  }
  const double div_phi_grad = div.value() / sqrt_det.value();

  const FrameDerivatives pd = frame_derivatives(box.phi, m, p, 1, d);
  const FrameDerivatives fd = frame_derivatives(f, m, p, 1, d);
  double pairing = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pairing += pd.first(i, j, j) * fd.first(i);
  return std::abs(apply(box, f, p) - (div_phi_grad - pairing));
}

struct BochnerTerms {
  double lhs = 0.0;
  double grad_box = 0.0;
  double phi_grad_lap = 0.0;
  double hessian_phi = 0.0;
  double curvature = 0.0;
  double trace_hessian = 0.0;  // coefficient of c
  double rough_laplacian = 0.0;
  double divergence_gradient = 0.0;     // c-free part
  double divergence_gradient_c = 0.0;   // coefficient of c
  double div_x = 0.0;
  double div_y = 0.0;
};

struct BochnerResidual {
  double c = 0.0;
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_terms;
  double rhs = 0.0;
  double residual = 0.0;
};

inline BochnerResidual evaluate_bochner(const BochnerTerms& t, double c) {
  BochnerResidual r;
  r.c = c;
  r.lhs = t.lhs;
  r.rhs_terms = {{"grad_box", t.grad_box},
                 {"phi_grad_laplacian", t.phi_grad_lap},
                 {"phi_hessian_squared", t.hessian_phi},
                 {"curvature", t.curvature},
                 {"trace_hessian", c * t.trace_hessian},
                 {"rough_laplacian", t.rough_laplacian},
                 {"divergence_gradient", t.divergence_gradient + c * t.divergence_gradient_c},
                 {"div_antisymmetric", t.div_x},
                 {"div_phi_hessian", t.div_y}};
  for (const auto& [name, v] : r.rhs_terms) r.rhs += v;
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

/// All terms of the identity at p. Needs jets of degree 4 (third covariant
/// derivatives of f, second of phi), so finite-difference mode raises
/// InsufficientSmoothness.
inline BochnerTerms bochner_terms(const BoxOperator& box, const ScalarField& f, const ChartPoint& p) {
  constexpr int D = 4;
  const ChartManifold& m = box.manifold;
  const Derivation& d = m.derivation();
  const int n = m.dim;
  LocalGeometry geo(m, p, D, d);
  const JetTensor& gamma = geo.christoffel_symbols();
  const JetTensor& ginv = geo.inverse_metric();
  const Eigen::MatrixXd& E = geo.frame();

  const JetTensor fj = field_jet(f, m, p, D, d);
  const JetTensor phij = field_jet(box.phi, m, p, D, d);
  const JetTensor f1 = covariant_derivative(fj, gamma);
  const JetTensor f2 = covariant_derivative(f1, gamma);
  const JetTensor f3 = covariant_derivative(f2, gamma);
  const JetTensor p1 = covariant_derivative(phij, gamma);
  const JetTensor p2 = covariant_derivative(p1, gamma);
  const JetTensor phi_up = detail::raise_both(phij, ginv);

  BochnerTerms t;
  // composite routes
  {
    const Jet box_f = detail::full_contraction(phi_up, f2);
    const Jet lap_f = detail::full_contraction(ginv, f2);
    double gb = 0.0, pgl = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        gb += ginv(a, b).value() * f1(a).value() * box_f.derivative(b).value();
        pgl += phi_up(a, b).value() * f1(a).value() * lap_f.derivative(b).value();
      }
    t.grad_box = gb;
    t.phi_grad_lap = pgl;
    Jet u(geo.table(), 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) u += ginv(a, b) * f1(a) * f1(b);
    u *= 0.5;
    t.lhs = detail::full_contraction(phi_up, detail::hessian(u, gamma)).value();
  }
  Eigen::MatrixXd tr_hess;
  {
    const Jet tr_phi = detail::full_contraction(ginv, phij);
    tr_hess = to_frame(detail::hessian(tr_phi, gamma), E).as_matrix();
  }

  // frame components
  const Tensor F1 = to_frame(f1, E), F2 = to_frame(f2, E), F3 = to_frame(f3, E);
  const Tensor P0 = to_frame(phij, E), P1 = to_frame(p1, E), P2 = to_frame(p2, E);
  const Tensor R = to_frame(geo.riemann_tensor(), E);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double fifj = F1(i) * F1(j);
      for (int k = 0; k < n; ++k) {
        t.hessian_phi += 2.0 * P0(i, j) * F2(j, k) * F2(k, i);
        for (int mm = 0; mm < n; ++mm) t.curvature += 2.0 * fifj * P0(i, mm) * R(mm, k, j, k);
        t.rough_laplacian -= fifj * P2(i, j, k, k);
        t.divergence_gradient += fifj * P2(i, k, k, j);
        t.divergence_gradient_c -= fifj * P2(k, k, i, j);
        t.div_x += (F2(i, k) * F1(j) + F1(i) * F2(j, k)) * (P1(j, i, k) - P1(j, k, i)) +
                   fifj * (P2(j, i, k, k) - P2(j, k, i, k));
        t.div_y -= F2(j, k) * P0(i, j) * F2(i, k) + F1(j) * P1(i, j, k) * F2(i, k) + F1(j) * P0(i, j) * F3(i, k, k);
      }
      t.trace_hessian += tr_hess(i, j) * fifj;
    }
  return t;
}

inline BochnerResidual bochner_residual(const BoxOperator& box, const ScalarField& f, const ChartPoint& p, double c) {
  return evaluate_bochner(bochner_terms(box, f, p), c);
}

/// sum phi_ij f_jk f_ki - (box f)^2 / tr phi, which is >= 0 for phi > 0.
inline double hessian_trace_defect(const BoxOperator& box, const ScalarField& f, const ChartPoint& p) {
  const Derivation& d = box.manifold.derivation();
  const Eigen::MatrixXd phi = frame_derivatives(box.phi, box.manifold, p, 0, d).value.as_matrix();
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (phi + phi.transpose()));
  if (llt.info() != Eigen::Success) fail(ErrorKind::NotPositiveDefinite, "phi is not positive definite");
  const Eigen::MatrixXd hess = frame_derivatives(f, box.manifold, p, 2, d).second.as_matrix();
  const double box_f = (phi.cwiseProduct(hess)).sum();
  return (phi * hess * hess).trace() - box_f * box_f / phi.trace();
}

}  // namespace spectra_bochner
