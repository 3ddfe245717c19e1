#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet holds the Taylor coefficients of a smooth function of `nvars`
// variables about a base point, up to total degree `degree`. Arithmetic and
// elementary functions propagate the coefficients exactly (up to rounding),
// which gives the "analytic" derivative mode: partial derivatives of any
// composite expression are read off as alpha! * coefficient.
//
// Monomials are stored in graded order (all degree-0, then degree-1, ...),
// with a within-degree order that does not depend on the maximum degree, so
// the table for (n, d) is a prefix of the table for (n, d') when d <= d'.
//
// Each jet also tracks `valid_degree`: the highest degree whose coefficients
// are trustworthy. Differentiation lowers it by one, products take the min.
// Reading a partial derivative above the valid degree is a logic error and
// throws InsufficientSmoothness.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "spectra_bochner/errors.hpp"

namespace spectra_bochner {

class MonomialTable {
 public:
  static const MonomialTable& get(int nvars, int degree) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<MonomialTable>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{nvars, degree}];
    if (!slot) slot.reset(new MonomialTable(nvars, degree));
    return *slot;
  }

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(degree_of_.size()); }
  int degree_of(int i) const { return degree_of_[i]; }
  int exponent(int i, int var) const { return exps_[static_cast<size_t>(i) * nvars_ + var]; }
  /// Number of monomials with total degree <= d.
  int count_up_to(int d) const { return d < 0 ? 0 : prefix_[std::min(d, degree_)]; }
  /// Index of mono_i * x_var, or -1 when that exceeds the table degree.
  int shift(int var, int i) const { return shift_[static_cast<size_t>(var) * size() + i]; }
  double factorial_weight(int i) const { return factorial_[i]; }

  int index_of(std::span<const int> exps) const {
    int d = 0;
    for (int e : exps) d += e;
    if (d > degree_) return -1;
    for (int i = (d == 0 ? 0 : prefix_[d - 1]); i < prefix_[d]; ++i) {
      bool match = true;
      for (int v = 0; v < nvars_ && match; ++v) match = exponent(i, v) == exps[v];
      if (match) return i;
    }
    return -1;
  }

  struct Product {
    int j;
    int k;
  };
  /// For each i, the (j, k) pairs with mono_i * mono_j = mono_k.
  const std::vector<Product>& products_of(int i) const { return products_[i]; }

 private:
  MonomialTable(int nvars, int degree) : nvars_(nvars), degree_(degree) {
    if (nvars < 1 || degree < 0) fail(ErrorKind::InvalidArgument, "monomial table needs nvars >= 1, degree >= 0");
    std::vector<int> current(nvars, 0);
    for (int d = 0; d <= degree; ++d) {
      enumerate(d, 0, current);
      prefix_.push_back(size());
    }
    const int m = size();
    shift_.assign(static_cast<size_t>(nvars) * m, -1);
    std::vector<int> e(nvars);
    for (int v = 0; v < nvars; ++v) {
      for (int i = 0; i < m; ++i) {
        for (int w = 0; w < nvars; ++w) e[w] = exponent(i, w);
        ++e[v];
        shift_[static_cast<size_t>(v) * m + i] = index_of(e);
      }
    }
    factorial_.resize(m);
    for (int i = 0; i < m; ++i) {
      double f = 1.0;
      for (int v = 0; v < nvars; ++v)
        for (int k = 2; k <= exponent(i, v); ++k) f *= k;
      factorial_[i] = f;
    }
    products_.resize(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (degree_of_[i] + degree_of_[j] > degree) continue;
        for (int w = 0; w < nvars; ++w) e[w] = exponent(i, w) + exponent(j, w);
        products_[i].push_back({j, index_of(e)});
      }
    }
  }

  void enumerate(int remaining, int var, std::vector<int>& current) {
    if (var == nvars_ - 1) {
      current[var] = remaining;
      exps_.insert(exps_.end(), current.begin(), current.end());
      int d = 0;
      for (int e : current) d += e;
      degree_of_.push_back(d);
      current[var] = 0;
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[var] = e;
      enumerate(remaining - e, var + 1, current);
    }
    current[var] = 0;
  }

  int nvars_;
  int degree_;
  std::vector<int> exps_;
  std::vector<int> degree_of_;
  std::vector<int> prefix_;
  std::vector<int> shift_;
  std::vector<double> factorial_;
  std::vector<std::vector<Product>> products_;
};

class Jet {
 public:
  Jet() = default;

  Jet(const MonomialTable& table, double value)
      : table_(&table), c_(table.size(), 0.0), valid_(table.degree()) {
    c_[0] = value;
  }

  /// The coordinate function x_var about base value `value`.
  static Jet variable(const MonomialTable& table, int var, double value) {
    Jet j(table, value);
    if (table.degree() >= 1) j.c_[1 + var] = 1.0;
    return j;
  }

  /// Build from explicit coefficients (graded order); `valid` caps trust.
  static Jet from_coefficients(const MonomialTable& table, std::vector<double> coeffs, int valid) {
    Jet j(table, 0.0);
    coeffs.resize(table.size(), 0.0);
    j.c_ = std::move(coeffs);
    j.valid_ = std::min(valid, table.degree());
    return j;
  }

  bool empty() const { return table_ == nullptr; }
  const MonomialTable& table() const { return *table_; }
  double value() const { return c_[0]; }
  double coefficient(int i) const { return c_[i]; }
  const std::vector<double>& coefficients() const { return c_; }
  int valid_degree() const { return valid_; }

  /// Mixed partial derivative at the base point; `vars` lists the
  /// differentiation variables with repetition, e.g. {0, 0, 1} = d^3/dx0^2 dx1.
  double partial(std::initializer_list<int> vars) const {
    return partial(std::span<const int>(vars.begin(), vars.size()));
  }

  double partial(std::span<const int> vars) const {
    const int order = static_cast<int>(vars.size());
    if (order > valid_)
      fail(ErrorKind::InsufficientSmoothness,
           "derivative of order " + std::to_string(order) + " requested from a jet valid to degree " +
               std::to_string(valid_));
    std::array<int, 16> e{};
    for (int v : vars) ++e[v];
    const int i = table_->index_of(std::span<const int>(e.data(), table_->nvars()));
    return table_->factorial_weight(i) * c_[i];
  }

  Jet derivative(int var) const {
    Jet out(*table_, 0.0);
    const int m = table_->size();
    for (int i = 0; i < m; ++i) {
      const int j = table_->shift(var, i);
      if (j >= 0) out.c_[i] = (table_->exponent(i, var) + 1) * c_[j];
    }
    out.valid_ = valid_ - 1;
    return out;
  }

  /// Drop coefficients above degree d (marks validity accordingly).
  Jet truncated(int d) const {
    Jet out = *this;
    for (int i = table_->count_up_to(d); i < table_->size(); ++i) out.c_[i] = 0.0;
    out.valid_ = std::min(valid_, d);
    return out;
  }

  /// Re-express on a table with the same number of variables; missing
  /// coefficients are zero and validity is capped accordingly.
  Jet on_table(const MonomialTable& target) const {
    Jet out(target, 0.0);
    const int shared = std::min(table_->size(), target.size());
    std::copy_n(c_.begin(), shared, out.c_.begin());
    out.valid_ = std::min(valid_, target.degree());
    return out;
  }

  Jet& operator+=(const Jet& o) {
    check(o);
    for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    valid_ = std::min(valid_, o.valid_);
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check(o);
    for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    valid_ = std::min(valid_, o.valid_);
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& x : c_) x *= s;
    return *this;
  }
  Jet& operator/=(double s) {
    for (double& x : c_) x /= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a) { return s * a.reciprocal(); }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }

  Jet operator-() const {
    Jet out = *this;
    for (double& x : out.c_) x = -x;
    return out;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check(b);
    Jet out(*a.table_, 0.0);
    const int m = a.table_->size();
    for (int i = 0; i < m; ++i) {
      const double ai = a.c_[i];
      if (ai == 0.0) continue;
      for (const auto& p : a.table_->products_of(i)) out.c_[p.k] += ai * b.c_[p.j];
    }
    out.valid_ = std::min(a.valid_, b.valid_);
    return out;
  }

  /// f(a) for a univariate f given by its Taylor coefficients about a(0):
  /// taylor[k] = f^(k)(a0) / k!, k = 0..degree.
  Jet compose(std::span<const double> taylor) const {
    const int d = table_->degree();
    Jet delta = *this;
    delta.c_[0] = 0.0;
    Jet result(*table_, taylor[d]);
    for (int k = d - 1; k >= 0; --k) {
      result = result * delta;
      result.c_[0] += taylor[k];
    }
    result.valid_ = valid_;
    return result;
  }

  Jet reciprocal() const { return pow_real(-1.0); }

  Jet pow_real(double p) const {
    const int d = table_->degree();
    const double a0 = c_[0];
    std::vector<double> t(d + 1);
    double binom = 1.0;
    for (int k = 0; k <= d; ++k) {
      t[k] = binom * std::pow(a0, p - k);
      binom *= (p - k) / (k + 1);
    }
    return compose(t);
  }

 private:
  void check(const Jet& o) const {
    assert(table_ == o.table_ && "jets must share a monomial table");
    (void)o;
  }

  const MonomialTable* table_ = nullptr;
  std::vector<double> c_;
  int valid_ = 0;
};

inline Jet exp(const Jet& a) {
  const int d = a.table().degree();
  std::vector<double> t(d + 1);
  double e = std::exp(a.value());
  double fact = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) fact *= k;
    t[k] = e / fact;
  }
  return a.compose(t);
}

inline Jet log(const Jet& a) {
  const int d = a.table().degree();
  std::vector<double> t(d + 1);
  const double a0 = a.value();
  t[0] = std::log(a0);
  for (int k = 1; k <= d; ++k) t[k] = ((k % 2) ? 1.0 : -1.0) / (k * std::pow(a0, k));
  return a.compose(t);
}

namespace detail {
inline std::vector<double> trig_taylor(double a0, int d, bool is_sin) {
  // derivatives of sin cycle: sin, cos, -sin, -cos
  const double s = std::sin(a0), c = std::cos(a0);
  const std::array<double, 4> sin_cycle{s, c, -s, -c};
  std::vector<double> t(d + 1);
  double fact = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) fact *= k;
    t[k] = sin_cycle[(k + (is_sin ? 0 : 1)) % 4] / fact;
  }
  return t;
}
}  // namespace detail

inline Jet sin(const Jet& a) { return a.compose(detail::trig_taylor(a.value(), a.table().degree(), true)); }
inline Jet cos(const Jet& a) { return a.compose(detail::trig_taylor(a.value(), a.table().degree(), false)); }
inline Jet sqrt(const Jet& a) { return a.pow_real(0.5); }
inline Jet pow(const Jet& a, double p) { return a.pow_real(p); }

/// Value-level helpers usable from generic code with either double or Jet.
inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

}  // namespace spectra_bochner
