#pragma once

// Coordinate tensors whose components are jets, the Levi-Civita machinery
// built on them, and projection onto an orthonormal frame.
//
// Index convention: all tensors are covariant, and a covariant derivative
// APPENDS its direction as the last index, so (nabla phi)(i, j, k) is
// (nabla_{e_k} phi)(e_i, e_j). Divergence-free therefore reads
// sum_j phi(i, j, j) = 0.

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/jet.hpp"

namespace spectra_bochner {

namespace detail {
inline size_t ipow(int n, int r) {
  size_t p = 1;
  for (int i = 0; i < r; ++i) p *= static_cast<size_t>(n);
  return p;
}
}  // namespace detail

/// Dense real tensor of rank r over dimension n (row-major flat storage).
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank) : n_(dim), rank_(rank), data_(detail::ipow(dim, rank), 0.0) {}

  int dim() const { return n_; }
  int rank() const { return rank_; }
  size_t size() const { return data_.size(); }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  template <class... I>
  double& operator()(I... idx) {
    return data_[flat(idx...)];
  }
  template <class... I>
  double operator()(I... idx) const {
    return data_[flat(idx...)];
  }

  Eigen::MatrixXd as_matrix() const {
    Eigen::MatrixXd m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = data_[static_cast<size_t>(i) * n_ + j];
    return m;
  }
  Eigen::VectorXd as_vector() const { return Eigen::Map<const Eigen::VectorXd>(data_.data(), n_); }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  template <class... I>
  size_t flat(I... idx) const {
    size_t f = 0;
    ((f = f * static_cast<size_t>(n_) + static_cast<size_t>(idx)), ...);
    return f;
  }

  int n_ = 0;
  int rank_ = 0;
  std::vector<double> data_;
};

/// Rank-r covariant coordinate tensor with jet components.
class JetTensor {
 public:
  JetTensor() = default;
  JetTensor(const MonomialTable& table, int dim, int rank)
      : n_(dim), rank_(rank), data_(detail::ipow(dim, rank), Jet(table, 0.0)) {}

  int dim() const { return n_; }
  int rank() const { return rank_; }
  size_t size() const { return data_.size(); }
  const MonomialTable& table() const { return data_.front().table(); }
  Jet& operator[](size_t i) { return data_[i]; }
  const Jet& operator[](size_t i) const { return data_[i]; }

  template <class... I>
  Jet& operator()(I... idx) {
    return data_[flat(idx...)];
  }
  template <class... I>
  const Jet& operator()(I... idx) const {
    return data_[flat(idx...)];
  }

  int valid_degree() const {
    int v = 1 << 20;
    for (const Jet& j : data_) v = std::min(v, j.valid_degree());
    return v;
  }

  /// Component values at the base point.
  Tensor values() const {
    Tensor t(n_, rank_);
    for (size_t i = 0; i < data_.size(); ++i) t[i] = data_[i].value();
    return t;
  }

  JetTensor on_table(const MonomialTable& target) const {
    JetTensor out;
    out.n_ = n_;
    out.rank_ = rank_;
    out.data_.reserve(data_.size());
    for (const Jet& j : data_) out.data_.push_back(j.on_table(target));
    return out;
  }

 private:
  template <class... I>
  size_t flat(I... idx) const {
    size_t f = 0;
    ((f = f * static_cast<size_t>(n_) + static_cast<size_t>(idx)), ...);
    return f;
  }

  int n_ = 0;
  int rank_ = 0;
  std::vector<Jet> data_;
};

/// Inverse of a symmetric jet matrix (rank-2 tensor) by Gauss-Jordan
/// elimination without pivoting; valid for positive definite inputs.
inline JetTensor inverse(const JetTensor& g) {
  const int n = g.dim();
  const MonomialTable& t = g.table();
  std::vector<Jet> a(static_cast<size_t>(n) * 2 * n, Jet(t, 0.0));
  auto A = [&](int i, int j) -> Jet& { return a[static_cast<size_t>(i) * 2 * n + j]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = g(i, j);
    A(i, n + i) = Jet(t, 1.0);
  }
  for (int k = 0; k < n; ++k) {
    if (!(A(k, k).value() > 0.0) && std::abs(A(k, k).value()) < 1e-300)
      fail(ErrorKind::NonPositiveMetric, "singular metric in jet inversion");
    const Jet inv = A(k, k).reciprocal();
    for (int j = 0; j < 2 * n; ++j) A(k, j) = A(k, j) * inv;
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const Jet factor = A(i, k);
      for (int j = 0; j < 2 * n; ++j) A(i, j) -= factor * A(k, j);
    }
  }
  JetTensor out(t, n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = A(i, n + j);
  return out;
}

/// Determinant of a jet matrix by elimination without pivoting.
inline Jet determinant(const JetTensor& g) {
  const int n = g.dim();
  std::vector<Jet> a;
  a.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a.push_back(g(i, j));
  auto A = [&](int i, int j) -> Jet& { return a[static_cast<size_t>(i) * n + j]; };
  Jet det(g.table(), 1.0);
  for (int k = 0; k < n; ++k) {
    det = det * A(k, k);
    const Jet inv = A(k, k).reciprocal();
    for (int i = k + 1; i < n; ++i) {
      const Jet factor = A(i, k) * inv;
      for (int j = k; j < n; ++j) A(i, j) -= factor * A(k, j);
    }
  }
  return det;
}

inline JetTensor gradient(const Jet& f) {
  const int n = f.table().nvars();
  JetTensor d(f.table(), n, 1);
  for (int i = 0; i < n; ++i) d(i) = f.derivative(i);
  return d;
}

/// Christoffel symbols Gamma(m, i, j) = Gamma^m_{ij}.
inline JetTensor christoffel(const JetTensor& g, const JetTensor& ginv) {
  const int n = g.dim();
  const MonomialTable& t = g.table();
  JetTensor dg(t, n, 3);  // dg(k, i, j) = d_k g_ij
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        dg(k, i, j) = g(i, j).derivative(k);
        dg(k, j, i) = dg(k, i, j);
      }
  JetTensor lowered(t, n, 3);  // Gamma_{l i j}
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        lowered(l, i, j) = 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
        lowered(l, j, i) = lowered(l, i, j);
      }
  JetTensor gamma(t, n, 3);
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s(t, 0.0);
        for (int l = 0; l < n; ++l) s += ginv(m, l) * lowered(l, i, j);
        gamma(m, i, j) = s;
        gamma(m, j, i) = s;
      }
  return gamma;
}

/// Covariant derivative of a covariant rank-r tensor; result has rank r+1
/// with the derivative direction last.
inline JetTensor covariant_derivative(const JetTensor& T, const JetTensor& gamma) {
  const int n = T.dim();
  const int r = T.rank();
  const MonomialTable& t = T.table();
  JetTensor out(t, n, r + 1);
  std::vector<int> idx(r + 1, 0);
  const size_t total = out.size();
  std::vector<size_t> stride(r, 1);
  for (int s = r - 2; s >= 0; --s) stride[s] = stride[s + 1] * n;
  for (size_t flat = 0; flat < total; ++flat) {
    size_t rem = flat;
    for (int s = r; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % n);
      rem /= n;
    }
    const int k = idx[r];
    const size_t base = flat / n;  // flat index of (i_1..i_r) in T
    Jet v = T[base].derivative(k);
    for (int s = 0; s < r; ++s) {
      const size_t without = base - static_cast<size_t>(idx[s]) * stride[s];
      for (int m = 0; m < n; ++m) {
        const Jet& gmk = gamma(m, k, idx[s]);
        v -= gmk * T[without + static_cast<size_t>(m) * stride[s]];
      }
    }
    out[flat] = v;
  }
  return out;
}

/// Riemann tensor R_ijkl with R_ijkl = kappa (g_ik g_jl - g_il g_jk) on a
/// space form of curvature kappa (positive on round spheres). Ricci is the
/// contraction ric_ij = g^kl R_ikjl.
inline JetTensor riemann(const JetTensor& g, const JetTensor& gamma) {
  const int n = g.dim();
  const MonomialTable& t = g.table();
  // Rup(m, i, j, l) = d_i Gamma^m_jl - d_j Gamma^m_il + Gamma^m_ip Gamma^p_jl - Gamma^m_jp Gamma^p_il
  JetTensor dgamma(t, n, 4);  // dgamma(i, m, j, l) = d_i Gamma^m_jl
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) dgamma(i, m, j, l) = gamma(m, j, l).derivative(i);
  JetTensor rup(t, n, 4);
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          Jet v = dgamma(i, m, j, l) - dgamma(j, m, i, l);
          for (int p = 0; p < n; ++p) v += gamma(m, i, p) * gamma(p, j, l) - gamma(m, j, p) * gamma(p, i, l);
          rup(m, i, j, l) = v;
          rup(m, j, i, l) = -v;
        }
  JetTensor R(t, n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet v(t, 0.0);
          for (int m = 0; m < n; ++m) v += g(k, m) * rup(m, i, j, l);
          R(i, j, k, l) = v;
        }
    }
  return R;
}

/// Orthonormal frame by Gram-Schmidt on the coordinate basis in index
/// order: column a of the result holds the coordinates of e_a. Equivalent to
/// E = L^{-T} with g = L L^T.
inline Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::NonPositiveMetric, "metric is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  for (int i = 0; i < g.rows(); ++i)
    if (!(L(i, i) > 0.0)) fail(ErrorKind::NonPositiveMetric, "metric is not positive definite");
  return L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(g.rows(), g.cols())).transpose();
}

/// Frame components T(e_a, e_b, ...) of a coordinate tensor.
inline Tensor to_frame(const Tensor& T, const Eigen::MatrixXd& E) {
  const int n = T.dim();
  const int r = T.rank();
  Tensor cur = T;
  // contract one slot at a time: slot s goes from coordinate to frame index
  for (int s = 0; s < r; ++s) {
    Tensor next(n, r);
    const size_t stride = detail::ipow(n, r - 1 - s);
    for (size_t flat = 0; flat < cur.size(); ++flat) {
      const int a = static_cast<int>((flat / stride) % n);
      const size_t base = flat - static_cast<size_t>(a) * stride;
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += E(i, a) * cur[base + static_cast<size_t>(i) * stride];
      next[flat] = v;
    }
    cur = std::move(next);
  }
  return cur;
}

inline Tensor to_frame(const JetTensor& T, const Eigen::MatrixXd& E) { return to_frame(T.values(), E); }

}  // namespace spectra_bochner
