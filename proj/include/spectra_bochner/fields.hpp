#pragma once

// Built-in scalar and symmetric tensor fields, and their spec strings.
//
// Scalar specs:  cos:k1,k2,...  harmonic:i  const:v  mix:seed=s  poly:seed=s
// Tensor specs:  metric  ricci  schouten  einstein  ricci-shifted:c=v
//                custom:seed=s[,scale=v]  scaled-metric:t
//
// On tori, trigonometric fields use theta_i = 2 pi x_i / L_i. On
// stereographic charts (spheres, immersed spheres) fields are written in
// terms of the unit-sphere embedding y = s(u), so they agree across charts.

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "spectra_bochner/errors.hpp"
#include "spectra_bochner/geometry.hpp"
#include "spectra_bochner/rng.hpp"
#include "spectra_bochner/spec_string.hpp"

namespace spectra_bochner {

namespace detail {

inline bool periodic(const ChartManifold& m) { return m.kind == AtlasKind::PeriodicBox; }

/// Angles theta_i on tori, embedding coordinates y_a on stereographic charts.
template <class T>
std::vector<T> field_coordinates(bool torus, const std::vector<double>& lengths, int chart, std::span<const T> x) {
  if (!torus) return stereographic_embedding(chart, x);
  std::vector<T> th;
  for (size_t i = 0; i < x.size(); ++i) th.push_back((2.0 * std::numbers::pi / lengths[i]) * x[i]);
  return th;
}

}  // namespace detail

inline ScalarField constant_scalar(double v) {
  return closed_form_scalar("const", [v](int, auto x) { return 0.0 * x[0] + v; });
}

/// cos(k . theta) on a torus.
inline ScalarField torus_cosine(const ChartManifold& m, std::vector<double> k) {
  if (!detail::periodic(m)) fail(ErrorKind::InvalidArgument, "cos fields are defined on tori");
  k.resize(m.dim, 0.0);
  const auto L = m.lengths;
  return closed_form_scalar("cos", [k, L](int chart, auto x) {
    using std::cos;
    auto th = detail::field_coordinates(true, L, chart, x);
    auto s = k[0] * th[0];
    for (size_t i = 1; i < th.size(); ++i) s = s + k[i] * th[i];
    return cos(s);
  });
}

/// Restriction of the i-th ambient coordinate of the unit-sphere embedding:
/// a first spherical harmonic.
inline ScalarField sphere_harmonic(const ChartManifold& m, int i) {
  if (detail::periodic(m)) fail(ErrorKind::InvalidArgument, "harmonic fields are defined on spheres");
  if (i < 0 || i > m.dim) fail(ErrorKind::InvalidArgument, "harmonic index out of range");
  return closed_form_scalar("harmonic", [i](int chart, auto u) { return stereographic_embedding(chart, u)[i]; });
}

/// Random smooth function: trigonometric sum on tori, polynomial plus sine
/// of the embedding coordinates elsewhere.
inline ScalarField random_scalar(const ChartManifold& m, std::uint64_t seed) {
  CounterRng rng(seed, 0xf1e1dULL);
  const bool torus = detail::periodic(m);
  const int N = torus ? m.dim : m.dim + 1;
  std::vector<std::vector<double>> k(3, std::vector<double>(N));
  std::vector<double> amp(3), phase(3);
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < N; ++i) k[t][i] = torus ? rng.uniform_int(-2, 2) : rng.uniform(-1.5, 1.5);
    amp[t] = rng.uniform(0.3, 1.0);
    phase[t] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  std::vector<double> lin(N), quad(static_cast<size_t>(N) * N);
  for (auto& v : lin) v = rng.uniform(-1.0, 1.0);
  for (auto& v : quad) v = rng.uniform(-0.5, 0.5);
  const auto L = m.lengths;
  return closed_form_scalar("mix", [=](int chart, auto x) {
    using std::sin;
    auto y = detail::field_coordinates(torus, L, chart, x);
    auto s = 0.0 * y[0];
    for (int t = 0; t < 3; ++t) {
      auto arg = k[t][0] * y[0] + phase[t];
      for (int i = 1; i < N; ++i) arg = arg + k[t][i] * y[i];
      s = s + amp[t] * sin(arg);
    }
    if (!torus)
      for (int i = 0; i < N; ++i) {
        s = s + lin[i] * y[i];
        for (int j = 0; j < N; ++j) s = s + quad[static_cast<size_t>(i) * N + j] * y[i] * y[j];
      }
    return s;
  });
}

/// Random quadratic polynomial in chart coordinates (constant Hessian on a
/// flat chart).
inline ScalarField random_quadratic(const ChartManifold& m, std::uint64_t seed) {
  CounterRng rng(seed, 0x9a1dULL);
  const int n = m.dim;
  std::vector<double> lin(n), quad(static_cast<size_t>(n) * n);
  for (auto& v : lin) v = rng.uniform(-1.0, 1.0);
  for (auto& v : quad) v = rng.uniform(-1.0, 1.0);
  return closed_form_scalar("poly", [=](int, auto x) {
    auto s = 0.0 * x[0];
    for (int i = 0; i < n; ++i) {
      s = s + lin[i] * x[i];
      for (int j = 0; j < n; ++j) s = s + quad[static_cast<size_t>(i) * n + j] * x[i] * x[j];
    }
    return s;
  });
}

/// Random symmetric positive definite field. On tori its coordinate matrix
/// is 1.5 I plus a bounded trigonometric perturbation; on stereographic
/// charts it is the pullback of such an ambient field along y = s(u).
inline SymmetricTensorField random_spd_field(const ChartManifold& m, std::uint64_t seed, double scale = 0.4) {
  CounterRng rng(seed, 0x5bdULL);
  const bool torus = detail::periodic(m);
  const int n = m.dim;
  const int N = torus ? n : n + 1;
  std::vector<std::vector<double>> B(3, std::vector<double>(static_cast<size_t>(N) * N));
  std::vector<std::vector<double>> k(3, std::vector<double>(N));
  std::vector<double> phase(3);
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) {
        const double v = rng.uniform(-1.0, 1.0);
        B[t][static_cast<size_t>(i) * N + j] = B[t][static_cast<size_t>(j) * N + i] = v;
      }
    for (int i = 0; i < N; ++i) k[t][i] = torus ? rng.uniform_int(-2, 2) : rng.uniform(-1.5, 1.5);
    phase[t] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  // |perturbation| <= 3 * scale / N * N = 3 scale < 1.5 for scale < 0.5
  const double eps = scale / N;
  const auto L = m.lengths;
  auto ambient = [=](int chart, auto x) {
    using T = std::remove_cvref_t<decltype(x[0])>;
    using std::cos;
    auto y = detail::field_coordinates(torus, L, chart, x);
    std::vector<T> amb(static_cast<size_t>(N) * N, 0.0 * y[0]);
    for (int i = 0; i < N; ++i) amb[static_cast<size_t>(i) * N + i] = amb[static_cast<size_t>(i) * N + i] + 1.5;
    for (int t = 0; t < 3; ++t) {
      T arg = k[t][0] * y[0] + phase[t];
      for (int i = 1; i < N; ++i) arg = arg + k[t][i] * y[i];
      const T w = eps * cos(arg);
      for (size_t e = 0; e < amb.size(); ++e) amb[e] = amb[e] + B[t][e] * w;
    }
    return amb;
  };
  if (torus) return closed_form_field<2>("custom", ambient);

  // pullback phi_ij = dy^a/du_i amb_ab dy^b/du_j; one extra jet degree is
  // spent on dy
  auto pullback = [=](const ChartPoint& p, int degree) {
    const MonomialTable& t = MonomialTable::get(n, degree + 1);
    std::vector<Jet> u;
    for (int i = 0; i < n; ++i) u.push_back(Jet::variable(t, i, p.x[i]));
    const std::vector<Jet> y = stereographic_embedding(p.chart, std::span<const Jet>(u));
    const std::vector<Jet> amb = ambient(p.chart, std::span<const Jet>(u));
    JetTensor out(t, n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s(t, 0.0);
        for (int a = 0; a < N; ++a) {
          const Jet dya = y[a].derivative(i);
          for (int b = 0; b < N; ++b) s += dya * amb[static_cast<size_t>(a) * N + b] * y[b].derivative(j);
        }
        out(i, j) = s;
        out(j, i) = s;
      }
    return out.on_table(MonomialTable::get(n, degree));
  };
  SymmetricTensorField f;
  f.name = "custom";
  f.taylor = [pullback](const ChartManifold&, const ChartPoint& p, int degree) { return pullback(p, degree); };
  f.sample = [pullback](const ChartManifold&, const ChartPoint& p, const Derivation&) {
    return pullback(p, 0).values();
  };
  return f;
}

inline SymmetricTensorField scaled_metric_field(double t) {
  SymmetricTensorField f;
  f.name = "scaled-metric";
  f.taylor = [t](const ChartManifold& m, const ChartPoint& p, int degree) {
    JetTensor g = m.metric.taylor(m, p, degree);
    for (size_t i = 0; i < g.size(); ++i) g[i] *= t;
    return g;
  };
  f.sample = [t](const ChartManifold& m, const ChartPoint& p, const Derivation& d) {
    Tensor g = m.metric.sample(m, p, d);
    for (size_t i = 0; i < g.size(); ++i) g[i] *= t;
    return g;
  };
  return f;
}

inline ScalarField parse_scalar_field(std::string_view text, const ChartManifold& m) {
  const SpecString s = SpecString::parse(text);
  const auto seed = static_cast<std::uint64_t>(s.number("seed", 1));
  if (s.name == "cos") {
    std::vector<double> k = s.positional_numbers();
    if (k.empty()) k = {1.0};
    return torus_cosine(m, k);
  }
  if (s.name == "harmonic") {
    const auto idx = s.positional_numbers();
    return sphere_harmonic(m, idx.empty() ? 0 : static_cast<int>(idx[0]));
  }
  if (s.name == "const") {
    const auto v = s.positional_numbers();
    return constant_scalar(v.empty() ? s.number("v", 1.0) : v[0]);
  }
  if (s.name == "mix") return random_scalar(m, seed);
  if (s.name == "poly") return random_quadratic(m, seed);
  fail(ErrorKind::ConfigParse, "unknown scalar field '" + s.name + "'");
}

/// Tensor field specs that do not need a hypersurface.
inline SymmetricTensorField parse_tensor_field(std::string_view text, const ChartManifold& m) {
  const SpecString s = SpecString::parse(text);
  if (s.name == "metric") return metric_field();
  if (s.name == "ricci") return curvature_field(CurvatureTensorKind::Ricci);
  if (s.name == "schouten") return curvature_field(CurvatureTensorKind::Schouten);
  if (s.name == "einstein") return curvature_field(CurvatureTensorKind::Einstein);
  if (s.name == "ricci-shifted") return curvature_field(CurvatureTensorKind::ShiftedRicci, s.number("c", 0.0));
  if (s.name == "custom")
    return random_spd_field(m, static_cast<std::uint64_t>(s.number("seed", 1)), s.number("scale", 0.4));
  if (s.name == "scaled-metric") {
    const auto v = s.positional_numbers();
    return scaled_metric_field(v.empty() ? s.number("t", 1.0) : v[0]);
  }
  fail(ErrorKind::ConfigParse, "unknown tensor field '" + s.name + "'");
}

}  // namespace spectra_bochner
