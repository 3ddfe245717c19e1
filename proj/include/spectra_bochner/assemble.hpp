#pragma once

// Weak form of box on closed discrete domains:
//   K_ab = int <phi grad psi_a, grad psi_b> dM,   M_ab = int psi_a psi_b dM,
// so that K u = mu M u discretizes -box f = mu f for divergence-free phi.
//
// Surface meshes use piecewise-linear elements with phi constant per face
// (an ambient 3x3 tensor, projected onto the face plane). Periodic grids on
// chart tori use tensor-product multilinear elements with 2^n Gauss points
// per cell and coefficient sqrt(g) g^-1 phi g^-1 in chart coordinates.
//
// Element matrices are symmetrized before scattering and their diagonals
// are set to minus the off-diagonal row sum, so K is bitwise symmetric and
// annihilates constants up to summation rounding.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "spectra_bochner/boxop.hpp"
#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/geometry.hpp"
#include "spectra_bochner/hypersurface.hpp"
#include "spectra_bochner/mesh.hpp"

namespace spectra_bochner {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct AssembledOperator {
  SparseMatrix K;
  SparseMatrix M;
  std::string coefficient;
  std::string domain;
  std::string quadrature;
  double mesh_size = 0.0;

  Eigen::Index size() const { return K.rows(); }
};

/// Ambient symmetric 3x3 coefficient at a point of a face with the given
/// unit normal; only its restriction to the face plane is used.
using PhiProvider =
    std::function<Eigen::Matrix3d(int face, const Eigen::Vector3d& point, const Eigen::Vector3d& face_normal)>;

enum class Quadrature { OnePoint, ThreePoint };

namespace detail {

inline void check_symmetric(const Eigen::MatrixXd& phi) {
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    fail(ErrorKind::NonSymmetricCoefficient, "coefficient tensor is not symmetric");
  if (!phi.allFinite()) fail(ErrorKind::NonSymmetricCoefficient, "coefficient tensor is not finite");
}

/// Symmetrize and make rows sum to zero exactly in the element.
inline void close_element(Eigen::MatrixXd& ke) {
  const Eigen::Index m = ke.rows();
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a + 1; b < m; ++b) ke(a, b) = ke(b, a) = 0.5 * (ke(a, b) + ke(b, a));
  for (Eigen::Index a = 0; a < m; ++a) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < m; ++b)
      if (b != a) s += ke(a, b);
    ke(a, a) = -s;
  }
}

}  // namespace detail

inline PhiProvider metric_provider(double scale = 1.0) {
  return [scale](int, const Eigen::Vector3d&, const Eigen::Vector3d&) -> Eigen::Matrix3d {
    return scale * Eigen::Matrix3d::Identity();
  };
}

namespace detail {

/// Rotation taking unit a to unit b (or to -b, whichever is closer).
inline Eigen::Matrix3d align(const Eigen::Vector3d& a, Eigen::Vector3d b) {
  if (a.dot(b) < 0.0) b = -b;
  const Eigen::Vector3d v = a.cross(b);
  const double c = a.dot(b);
  Eigen::Matrix3d vx;
  vx << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return Eigen::Matrix3d::Identity() + vx + vx * vx / (1.0 + c);
}

}  // namespace detail

/// P1 of an analytic surface in R^3 at the surface point nearest to the
/// quadrature point, carried from that tangent plane to the face plane by
/// the minimal rotation between the two normals.
inline PhiProvider newton_provider(const ImmersedHypersurface& hs) {
  if (hs.n != 2 || hs.kappa != 0.0 || hs.ambient_dim != 3)
    fail(ErrorKind::InvalidArgument, "mesh assembly supports surfaces in R^3 only");
  auto shared = std::make_shared<const ImmersedHypersurface>(hs);
  return [shared](int, const Eigen::Vector3d& y, const Eigen::Vector3d& face_normal) -> Eigen::Matrix3d {
    const ChartPoint p = shared->locate(Eigen::VectorXd(y));
    const ShapeData sd = shape_at(*shared, p);
    const Eigen::MatrixXd T = ambient_frame(*shared, p);
    const Eigen::Vector3d nu = Eigen::Vector3d(T.col(0)).cross(Eigen::Vector3d(T.col(1))).normalized();
    const Eigen::Matrix3d R = detail::align(nu, face_normal);
    const Eigen::Matrix3d phi = T * sd.P1 * T.transpose();
    return R * phi * R.transpose();
  };
}

/// P1 from a per-face least-squares fit of the shape operator to the
/// variation of area-weighted vertex normals across the face. Used when only
/// a mesh is available.
inline PhiProvider fitted_newton_provider(const SurfaceMesh& mesh) {
  std::vector<Eigen::Vector3d> vn(mesh.vertex_count(), Eigen::Vector3d::Zero());
  for (const auto& f : mesh.faces) {
    const Eigen::Vector3d n =
        (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    for (int k = 0; k < 3; ++k) vn[f[k]] += n;
  }
  for (auto& n : vn) n.normalize();
  std::vector<Eigen::Matrix3d> per_face(mesh.face_count());
  for (int fi = 0; fi < mesh.face_count(); ++fi) {
    const auto& f = mesh.faces[fi];
    const Eigen::Vector3d e1 = (mesh.vertices[f[1]] - mesh.vertices[f[0]]).normalized();
    const Eigen::Vector3d nf =
        (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]).normalized();
    const Eigen::Vector3d e2 = nf.cross(e1);
    Eigen::Matrix<double, 6, 3> A = Eigen::Matrix<double, 6, 3>::Zero();
    Eigen::Matrix<double, 6, 1> b;
    for (int k = 0; k < 3; ++k) {
      const int i = f[(k + 1) % 3], j = f[(k + 2) % 3];
      const Eigen::Vector3d e = mesh.vertices[j] - mesh.vertices[i];
      const Eigen::Vector3d dn = vn[j] - vn[i];
      const double u = e.dot(e1), v = e.dot(e2);
      // S = [[s0, s1], [s1, s2]] applied to (u, v)
      A.row(2 * k) << u, v, 0.0;
      A.row(2 * k + 1) << 0.0, u, v;
      b(2 * k) = dn.dot(e1);
      b(2 * k + 1) = dn.dot(e2);
    }
    const Eigen::Vector3d s = A.colPivHouseholderQr().solve(b);
    Eigen::Matrix2d S;
    S << s(0), s(1), s(1), s(2);
    const Eigen::Matrix2d P1 = S.trace() * Eigen::Matrix2d::Identity() - S;
    Eigen::Matrix<double, 3, 2> T;
    T.col(0) = e1;
    T.col(1) = e2;
    per_face[fi] = T * P1 * T.transpose();
  }
  return [per_face](int face, const Eigen::Vector3d&, const Eigen::Vector3d&) -> Eigen::Matrix3d {
    return per_face[face];
  };
}

inline AssembledOperator assemble(const SurfaceMesh& mesh, const PhiProvider& phi, Quadrature q = Quadrature::OnePoint,
                                  const std::string& coefficient = "custom") {
  mesh.validate();
  const int N = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(mesh.faces.size() * 9);
  mt.reserve(mesh.faces.size() * 9);
  for (int fi = 0; fi < mesh.face_count(); ++fi) {
    const auto& f = mesh.faces[fi];
    const Eigen::Vector3d p0 = mesh.vertices[f[0]], p1 = mesh.vertices[f[1]], p2 = mesh.vertices[f[2]];
    const Eigen::Vector3d nrm = (p1 - p0).cross(p2 - p0);
    const double area = 0.5 * nrm.norm();
    const Eigen::Vector3d nu = nrm.normalized();
    Eigen::Matrix3d Phi;
    if (q == Quadrature::OnePoint) {
      Phi = phi(fi, (p0 + p1 + p2) / 3.0, nu);
      detail::check_symmetric(Phi);
    } else {
      Phi.setZero();
      const std::array<Eigen::Vector3d, 3> mids = {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
      for (const Eigen::Vector3d& x : mids) {
        const Eigen::Matrix3d v = phi(fi, x, nu);
        detail::check_symmetric(v);
        Phi += v / 3.0;
      }
    }
    const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - nu * nu.transpose();
    const Eigen::Matrix3d C = P * Phi * P;
    // gradient of the hat function at vertex k: (nu x opposite edge) / (2 area)
    std::array<Eigen::Vector3d, 3> grad;
    const std::array<Eigen::Vector3d, 3> pts = {p0, p1, p2};
    for (int k = 0; k < 3; ++k) grad[k] = nu.cross(pts[(k + 2) % 3] - pts[(k + 1) % 3]) / (2.0 * area);
    Eigen::MatrixXd ke(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) ke(a, b) = area * grad[a].dot(C * grad[b]);
    detail::close_element(ke);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        kt.emplace_back(f[a], f[b], ke(a, b));
        mt.emplace_back(f[a], f[b], area / 12.0 * (a == b ? 2.0 : 1.0));
      }
  }
  AssembledOperator op;
  op.K.resize(N, N);
  op.M.resize(N, N);
  op.K.setFromTriplets(kt.begin(), kt.end());
  op.M.setFromTriplets(mt.begin(), mt.end());
  op.coefficient = coefficient;
  op.domain = "mesh:V=" + std::to_string(N) + ",F=" + std::to_string(mesh.face_count());
  op.quadrature = q == Quadrature::OnePoint ? "barycenter" : "edge-midpoints";
  op.mesh_size = mesh.mesh_size();
  return op;
}

/// Cotangent-weight stiffness: K_ab = -(cot alpha + cot beta) / 2 on edges.
inline SparseMatrix cotangent_stiffness(const SurfaceMesh& mesh) {
  const int N = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> t;
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      const int i = f[k], j = f[(k + 1) % 3], l = f[(k + 2) % 3];
      const Eigen::Vector3d u = mesh.vertices[i] - mesh.vertices[l], v = mesh.vertices[j] - mesh.vertices[l];
      const double w = 0.5 * u.dot(v) / u.cross(v).norm();
      t.emplace_back(i, j, -w);
      t.emplace_back(j, i, -w);
      t.emplace_back(i, i, w);
      t.emplace_back(j, j, w);
    }
  SparseMatrix K(N, N);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

// ---------------------------------------------------------------------------
// Periodic grids

struct PeriodicGrid {
  ChartManifold manifold;
  std::vector<int> resolution;

  PeriodicGrid(ChartManifold m, std::vector<int> res) : manifold(std::move(m)), resolution(std::move(res)) {
    if (manifold.kind != AtlasKind::PeriodicBox) fail(ErrorKind::InvalidArgument, "periodic grids need a torus");
    if (static_cast<int>(resolution.size()) == 1) resolution.assign(manifold.dim, resolution[0]);
    if (static_cast<int>(resolution.size()) != manifold.dim) fail(ErrorKind::InvalidArgument, "grid rank mismatch");
    for (int r : resolution)
      if (r < 3) fail(ErrorKind::InvalidArgument, "grid resolution must be >= 3 per axis");
    for (const ChartPoint& p : nodes())
      if (!(min_metric_eigenvalue(manifold, p) > 0.0))
        fail(ErrorKind::NonPositiveMetric, "metric not positive definite at a grid node");
  }

  int dim() const { return manifold.dim; }
  double spacing(int axis) const { return manifold.lengths[axis] / resolution[axis]; }
  double mesh_size() const {
    double h = 0.0;
    for (int d = 0; d < dim(); ++d) h = std::max(h, spacing(d));
    return h;
  }
  int node_count() const {
    int c = 1;
    for (int r : resolution) c *= r;
    return c;
  }
  int index(const std::vector<int>& multi) const {
    int idx = 0, stride = 1;
    for (int d = 0; d < dim(); ++d) {
      const int r = resolution[d];
      idx += (((multi[d] % r) + r) % r) * stride;
      stride *= r;
    }
    return idx;
  }
  std::vector<int> multi_index(int idx) const {
    std::vector<int> m(dim());
    for (int d = 0; d < dim(); ++d) {
      m[d] = idx % resolution[d];
      idx /= resolution[d];
    }
    return m;
  }
  std::vector<ChartPoint> nodes() const {
    std::vector<ChartPoint> out;
    out.reserve(node_count());
    for (int i = 0; i < node_count(); ++i) {
      const auto mi = multi_index(i);
      ChartPoint p;
      for (int d = 0; d < dim(); ++d) p.x.push_back(mi[d] * spacing(d));
      out.push_back(std::move(p));
    }
    return out;
  }
};

inline AssembledOperator assemble(const PeriodicGrid& grid, const SymmetricTensorField& phi) {
  const int n = grid.dim();
  const int nloc = 1 << n;
  const ChartManifold& m = grid.manifold;
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  double cell_volume = 1.0;
  for (int d = 0; d < n; ++d) cell_volume *= grid.spacing(d);
  const double w = cell_volume / nloc;

  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(static_cast<size_t>(grid.node_count()) * nloc * nloc);
  mt.reserve(static_cast<size_t>(grid.node_count()) * nloc * nloc);
  Eigen::MatrixXd ke(nloc, nloc), me(nloc, nloc);
  std::vector<int> corner_ids(nloc);
  for (int cell = 0; cell < grid.node_count(); ++cell) {
    const std::vector<int> c = grid.multi_index(cell);
    for (int a = 0; a < nloc; ++a) {
      std::vector<int> mi = c;
      for (int d = 0; d < n; ++d) mi[d] += (a >> d) & 1;
      corner_ids[a] = grid.index(mi);
    }
    ke.setZero();
    me.setZero();
    for (int q = 0; q < nloc; ++q) {
      std::vector<double> xi(n);
      ChartPoint p;
      for (int d = 0; d < n; ++d) {
        xi[d] = gp[(q >> d) & 1];
        p.x.push_back((c[d] + xi[d]) * grid.spacing(d));
      }
      const Eigen::MatrixXd g = m.metric.sample(m, p, Derivation::analytic()).as_matrix();
      const Eigen::MatrixXd ph = phi.sample(m, p, m.derivation()).as_matrix();
      detail::check_symmetric(ph);
      const Eigen::MatrixXd ginv = g.inverse();
      const double sg = std::sqrt(g.determinant());
      if (!(sg > 0.0)) fail(ErrorKind::NonPositiveMetric, "metric not positive definite at a quadrature point");
      Eigen::MatrixXd C = sg * ginv * (0.5 * (ph + ph.transpose())) * ginv;
      Eigen::VectorXd val(nloc);
      Eigen::MatrixXd grad(n, nloc);
      for (int a = 0; a < nloc; ++a) {
        double v = 1.0;
        for (int d = 0; d < n; ++d) v *= ((a >> d) & 1) ? xi[d] : 1.0 - xi[d];
        val(a) = v;
        for (int d = 0; d < n; ++d) {
          double gd = (((a >> d) & 1) ? 1.0 : -1.0) / grid.spacing(d);
          for (int e = 0; e < n; ++e)
            if (e != d) gd *= ((a >> e) & 1) ? xi[e] : 1.0 - xi[e];
          grad(d, a) = gd;
        }
      }
      ke.noalias() += w * grad.transpose() * C * grad;
      me.noalias() += (w * sg) * val * val.transpose();
    }
    detail::close_element(ke);
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) {
        kt.emplace_back(corner_ids[a], corner_ids[b], ke(a, b));
        mt.emplace_back(corner_ids[a], corner_ids[b], 0.5 * (me(a, b) + me(b, a)));
      }
  }
  AssembledOperator op;
  const int N = grid.node_count();
  op.K.resize(N, N);
  op.M.resize(N, N);
  op.K.setFromTriplets(kt.begin(), kt.end());
  op.M.setFromTriplets(mt.begin(), mt.end());
  op.coefficient = phi.name;
  std::string res;
  for (int r : grid.resolution) res += (res.empty() ? "" : "x") + std::to_string(r);
  op.domain = "grid:" + m.spec + ":" + res;
  op.quadrature = "gauss-2^n";
  op.mesh_size = grid.mesh_size();
  return op;
}

/// Coordinate text format "i j value" (1-based, row-major sorted).
inline void export_coo(std::ostream& out, const SparseMatrix& A) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  for (Eigen::Index k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
  std::sort(entries.begin(), entries.end());
  out.precision(17);
  for (const auto& [i, j, v] : entries) out << i + 1 << ' ' << j + 1 << ' ' << v << '\n';
}

// ---------------------------------------------------------------------------
// Pointwise versus weak consistency

struct ConsistencyLevel {
  double h = 0.0;
  int nodes = 0;
  double max_error = 0.0;
  double l2_error = 0.0;  // sqrt(e^T M e / 1^T M 1)
};

struct ConsistencyReport {
  std::vector<ConsistencyLevel> levels;
  std::vector<double> max_orders;
  std::vector<double> l2_orders;

  double observed_order() const { return max_orders.empty() ? 0.0 : max_orders.back(); }
};

/// M^-1 K f versus the nodal samples of -box f.
inline ConsistencyLevel consistency_level(const AssembledOperator& op, const Eigen::VectorXd& f,
                                          const Eigen::VectorXd& minus_box_f) {
  Eigen::SimplicialLDLT<SparseMatrix> mass(op.M);
  if (mass.info() != Eigen::Success) fail(ErrorKind::FactorizationFailure, "mass matrix factorization failed");
  const Eigen::VectorXd e = mass.solve(op.K * f) - minus_box_f;
  ConsistencyLevel lv;
  lv.h = op.mesh_size;
  lv.nodes = static_cast<int>(op.size());
  lv.max_error = e.cwiseAbs().maxCoeff();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.size());
  lv.l2_error = std::sqrt(e.dot(op.M * e) / ones.dot(op.M * ones));
  return lv;
}

inline void fill_orders(ConsistencyReport& r) {
  r.max_orders.clear();
  r.l2_orders.clear();
  for (size_t i = 1; i < r.levels.size(); ++i) {
    const double dh = std::log(r.levels[i - 1].h / r.levels[i].h);
    r.max_orders.push_back(std::log(r.levels[i - 1].max_error / r.levels[i].max_error) / dh);
    r.l2_orders.push_back(std::log(r.levels[i - 1].l2_error / r.levels[i].l2_error) / dh);
  }
}

/// Refinement study on periodic grids of the given resolutions. The
/// pointwise reference is -box f from boxop (analytic derivatives).
inline ConsistencyReport grid_consistency(const ChartManifold& m, const SymmetricTensorField& phi, const ScalarField& f,
                                          const std::vector<int>& resolutions) {
  ConsistencyReport r;
  const BoxOperator box = BoxOperator::custom(m, phi);
  for (int res : resolutions) {
    PeriodicGrid grid(m, {res});
    const AssembledOperator op = assemble(grid, phi);
    const auto nodes = grid.nodes();
    Eigen::VectorXd fv(nodes.size()), bv(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      fv(i) = f.sample(m, nodes[i], Derivation::analytic())[0];
      bv(i) = -apply(box, f, nodes[i]);
    }
    r.levels.push_back(consistency_level(op, fv, bv));
  }
  fill_orders(r);
  return r;
}

/// Refinement study on icospheres of radius 1 with phi = g and f a
/// spherical harmonic of degree `degree` built from coordinates:
/// degree 1 uses z, degree 2 uses x z.
inline ConsistencyReport icosphere_consistency(const std::vector<int>& subdivisions, int degree = 1) {
  ConsistencyReport r;
  for (int s : subdivisions) {
    const SurfaceMesh mesh = icosphere(s, 1.0);
    const AssembledOperator op = assemble(mesh, metric_provider(), Quadrature::OnePoint, "metric");
    Eigen::VectorXd fv(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      const auto& v = mesh.vertices[i];
      fv(i) = degree == 1 ? v.z() : v.x() * v.z();
    }
    const double lambda = degree * (degree + 1.0);
    r.levels.push_back(consistency_level(op, fv, lambda * fv));
  }
  fill_orders(r);
  return r;
}

}  // namespace spectra_bochner
