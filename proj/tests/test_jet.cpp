#include <gtest/gtest.h>

#include <cmath>

#include "spectra_bochner/jet.hpp"
#include "spectra_bochner/tensor.hpp"

using namespace spectra_bochner;

TEST(Jet, ProductRuleAndPartials) {
  const auto& t = MonomialTable::get(2, 4);
  Jet x = Jet::variable(t, 0, 0.3), y = Jet::variable(t, 1, -0.7);
  Jet f = x * x * y + sin(x * y);
  const double xv = 0.3, yv = -0.7;
  EXPECT_NEAR(f.value(), xv * xv * yv + std::sin(xv * yv), 1e-14);
  EXPECT_NEAR(f.partial({0}), 2 * xv * yv + yv * std::cos(xv * yv), 1e-13);
  EXPECT_NEAR(f.partial({0, 1}), 2 * xv + std::cos(xv * yv) - xv * yv * std::sin(xv * yv), 1e-13);
  // d^4/dx^2 dy^2 of sin(xy) = d^2/dy^2 [-y^2 sin(xy)]
  const double s = std::sin(xv * yv), c = std::cos(xv * yv);
  const double expect = -2 * s - 4 * xv * yv * c + xv * xv * yv * yv * s;
  EXPECT_NEAR(f.partial({0, 0, 1, 1}), expect, 1e-12);
}

TEST(Jet, ElementaryFunctionsMatchFiniteDifferences) {
  const auto& t = MonomialTable::get(1, 3);
  Jet x = Jet::variable(t, 0, 1.3);
  auto g = [](double v) { return std::exp(v) / std::sqrt(v) + std::log(v) * std::cos(v) + std::pow(v, 2.5); };
  Jet G = exp(x) / sqrt(x) + log(x) * cos(x) + pow(x, 2.5);
  const double h = 1e-3;
  EXPECT_NEAR(G.value(), g(1.3), 1e-13);
  EXPECT_NEAR(G.partial({0}), (g(1.3 + h) - g(1.3 - h)) / (2 * h), 1e-5);
  EXPECT_NEAR(G.partial({0, 0}), (g(1.3 + h) - 2 * g(1.3) + g(1.3 - h)) / (h * h), 1e-5);
}

TEST(Jet, ValidDegreeIsEnforced) {
  const auto& t = MonomialTable::get(2, 2);
  Jet x = Jet::variable(t, 0, 1.0);
  Jet d = (x * x * x).derivative(0);
  EXPECT_EQ(d.valid_degree(), 1);
  EXPECT_NEAR(d.partial({0}), 6.0, 1e-14);
  try {
    (void)d.partial({0, 0});
    FAIL() << "expected InsufficientSmoothness";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientSmoothness);
  }
}

TEST(Jet, TablesArePrefixes) {
  const auto& a = MonomialTable::get(3, 2);
  const auto& b = MonomialTable::get(3, 5);
  for (int i = 0; i < a.size(); ++i)
    for (int v = 0; v < 3; ++v) EXPECT_EQ(a.exponent(i, v), b.exponent(i, v));
  int e[3] = {1, 0, 1};
  EXPECT_EQ(a.index_of(e), b.index_of(e));
}

TEST(Tensor, InverseAndDeterminantJets) {
  const auto& t = MonomialTable::get(2, 2);
  Jet x = Jet::variable(t, 0, 0.2), y = Jet::variable(t, 1, 0.5);
  JetTensor g(t, 2, 2);
  g(0, 0) = 2.0 + x * x;
  g(0, 1) = g(1, 0) = x * y;
  g(1, 1) = 1.0 + y;
  JetTensor gi = inverse(g);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      Jet s = g(i, 0) * gi(0, k) + g(i, 1) * gi(1, k);
      EXPECT_NEAR(s.value(), i == k ? 1.0 : 0.0, 1e-14);
      EXPECT_NEAR(s.partial({0, 1}), 0.0, 1e-13);
    }
  Jet det = determinant(g);
  Jet ref = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  for (int i = 0; i < t.size(); ++i) EXPECT_NEAR(det.coefficient(i), ref.coefficient(i), 1e-13);
}
