#pragma once

// Quadrature, bracketing root finders and a fixed-step RK4 used by every
// other module. Quadrature and root polishing are backed by Boost.Math.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "cornerflow/error.hpp"

namespace cornerflow::numerics {

inline constexpr double pi = 3.14159265358979323846;

/// Adaptive Gauss-Kronrod integral of `f` over [a, b] (b < a allowed).
///
/// The Kronrod-Gauss difference overestimates the error of the 21-point rule by
/// many orders on smooth integrands; requesting much below 1e-12 only makes the
/// recursion chase roundoff.
/// Ranges on the positive axis spanning more than a factor 2 are split into
/// geometric panels so that the depth cap is never what limits accuracy.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-12) {
  if (a == b) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  const double lo = std::min(a, b), hi = std::max(a, b);
  if (!(lo > 0.0) || hi <= 2.0 * lo) return GK::integrate(f, a, b, 12, rel_tol);
  const auto panels = static_cast<int>(std::ceil(std::log2(hi / lo)));
  double sum = 0.0;
  double x0 = lo;
  for (int k = 1; k <= panels; ++k) {
    const double x1 = k == panels ? hi : lo * std::pow(hi / lo, static_cast<double>(k) / panels);
    sum += GK::integrate(f, x0, x1, 12, rel_tol);
    x0 = x1;
  }
  return b > a ? sum : -sum;
}

/// Fixed 10-point Gauss-Legendre rule; exact to roundoff for smooth integrands
/// on short intervals.
template <class F>
double integrate_short(const F& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

/// Running integral x ↦ ∫_{lo}^{x} f(s) ds of a smooth positive-axis integrand.
///
/// Knot values are accumulated on a log-spaced grid over [lo, hi] with
/// adaptive Gauss-Kronrod; a query adds a 10-point Gauss-Legendre piece from
/// the nearest knot below, so evaluation cost is O(log knots) independent of x.
/// Queries below lo or beyond hi fall back to direct integration from the
/// nearest end of the table.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;

  CumulativeIntegral(std::function<double(double)> f, double lo, double hi,
                     int knots_per_decade = 96)
      : f_(std::move(f)), lo_(lo) {
    if (!(lo > 0.0) || !(hi > lo)) {
      throw Error(ErrorKind::precondition, "cumulative integral needs 0 < lo < hi");
    }
    const double decades = std::log10(hi / lo);
    const auto n = static_cast<std::size_t>(std::max(8.0, std::ceil(decades * knots_per_decade)));
    knots_.resize(n + 1);
    values_.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      knots_[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n));
    }
    knots_.front() = lo;
    knots_.back() = hi;
    values_[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      values_[k + 1] = values_[k] + integrate(f_, knots_[k], knots_[k + 1]);
    }
  }

  double operator()(double x) const {
    if (knots_.empty()) throw Error(ErrorKind::precondition, "empty cumulative integral");
    if (x <= lo_) return -integrate(f_, x, lo_);
    if (x >= knots_.back()) return values_.back() + integrate(f_, knots_.back(), x);
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    const auto k = static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
    return values_[k] + integrate_short(f_, knots_[k], x);
  }

  double integrand(double x) const { return f_(x); }
  double lo() const { return lo_; }
  double hi() const { return knots_.empty() ? lo_ : knots_.back(); }

 private:
  std::function<double(double)> f_;
  double lo_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Root of `f` on [a, b] where f(a), f(b) have opposite signs (TOMS 748).
/// The bracket is narrowed until its width is below `x_tol`.
template <class F>
double solve_bracketed(const F& f, double a, double b, double x_tol,
                       std::uintmax_t max_iter = 200) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorKind::range, "root is not bracketed");
  }
  auto tol = [x_tol](double l, double r) { return std::fabs(r - l) <= x_tol; };
  std::uintmax_t iters = max_iter;
  const auto res = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (res.first + res.second);
}

/// Grows [a, b] geometrically (b *= factor) until f changes sign or `b_max` is
/// passed. Returns false when no sign change was found.
template <class F>
bool bracket_upward(const F& f, double a, double& b, double factor, double b_max) {
  const bool sa = f(a) > 0.0;
  while (b <= b_max) {
    if ((f(b) > 0.0) != sa) return true;
    b *= factor;
  }
  return false;
}

/// One classical Runge-Kutta step for y' = rhs(t, y).
template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(const Rhs& rhs, double t, const std::array<double, N>& y, double h) {
  auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  const auto k1 = rhs(t, y);
  const auto k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const auto k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const auto k4 = rhs(t + h, axpy(y, h, k3));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

/// Fourth-order central difference of `f` at x with step h.
template <class F>
double derivative(const F& f, double x, double h) {
  return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
}

/// Log-spaced samples lo..hi inclusive.
inline std::vector<double> geomspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// Piecewise-linear interpolation on increasing abscissae; clamps outside.
inline double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto k = static_cast<std::size_t>(std::distance(xs.begin(), it)) - 1;
  const double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
  return ys[k] + t * (ys[k + 1] - ys[k]);
}

}  // namespace cornerflow::numerics
