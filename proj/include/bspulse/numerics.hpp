#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "bspulse/errors.hpp"

// Small numerical toolbox shared by all modules: fixed-order Gauss-Legendre
// panels with adaptive bisection, safeguarded 1D root finding, a damped 2x2
// Newton, finite-difference derivatives, and an adaptive RK4 integrator.

namespace bspulse::num {

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {
// 16-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<std::array<double, 2>, 16> kGL16 = {{
    {-9.89400934991649939e-01, 2.71524594117540374e-02},
    {-9.44575023073232600e-01, 6.22535239386477063e-02},
    {-8.65631202387831755e-01, 9.51585116824925914e-02},
    {-7.55404408355002999e-01, 1.24628971255534030e-01},
    {-6.17876244402643771e-01, 1.49595988816576764e-01},
    {-4.58016777657227370e-01, 1.69156519395002619e-01},
    {-2.81603550779258915e-01, 1.82603415044923612e-01},
    {-9.50125098376374544e-02, 1.89450610455068585e-01},
    {9.50125098376374544e-02, 1.89450610455068585e-01},
    {2.81603550779258915e-01, 1.82603415044923612e-01},
    {4.58016777657227370e-01, 1.69156519395002619e-01},
    {6.17876244402643771e-01, 1.49595988816576764e-01},
    {7.55404408355002999e-01, 1.24628971255534030e-01},
    {8.65631202387831755e-01, 9.51585116824925914e-02},
    {9.44575023073232600e-01, 6.22535239386477063e-02},
    {9.89400934991649939e-01, 2.71524594117540374e-02},
}};
}  // namespace detail

template <typename F>
double gauss16(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (const auto& [x, w] : detail::kGL16) sum += w * f(mid + half * x);
  return half * sum;
}

namespace detail {
template <typename F>
double adapt(F& f, double a, double b, double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss16(f, a, mid);
  const double right = gauss16(f, mid, b);
  const double delta = left + right - whole;
  // the relative floor and the depth cap stop refinement once round-off
  // dominates: peaked integrands otherwise keep failing the exponentially
  // shrinking tolerance on every sub-panel and the recursion breadth explodes
  if (std::abs(delta) <= tol ||
      std::abs(delta) <= 1e-15 * (std::abs(left) + std::abs(right)) ||
      depth >= 26)
    return left + right;
  return adapt(f, a, mid, left, 0.5 * tol, depth + 1) +
         adapt(f, mid, b, right, 0.5 * tol, depth + 1);
}
}  // namespace detail

/// Adaptive quadrature to absolute tolerance `tol`.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  return detail::adapt(f, a, b, gauss16(f, a, b), tol, 0);
}

/// Plain bisection on a sign-changing bracket [a, b].
template <typename F>
double bisect(F&& f, double a, double b, double xtol = 1e-14) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw Error("bisect: endpoints do not bracket a root");
  for (int it = 0; it < 200 && (b - a) > xtol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (fa * fm < 0.0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

/// Bisection to a coarse bracket, then Newton polish. `df` is f'.
template <typename F, typename DF>
double newton_bisect(F&& f, DF&& df, double a, double b, double xtol = 1e-14) {
  double x = bisect(f, a, b, 1e-6);
  for (int it = 0; it < 60; ++it) {
    const double fx = f(x);
    const double d = df(x);
    if (d == 0.0) break;
    const double step = fx / d;
    const double xn = x - step;
    if (xn < a || xn > b) break;  // keep the bisection answer's bracket
    x = xn;
    if (std::abs(step) < xtol) break;
  }
  return x;
}

struct Newton2Result {
  double x = 0.0;
  double y = 0.0;
  bool converged = false;
  double residual = std::numeric_limits<double>::infinity();
};

/// Damped Newton for F(x,y) = (f1,f2) = 0 with finite-difference Jacobian.
template <typename F>
Newton2Result solve2(F&& fn, double x0, double y0, double tol = 1e-13,
                     int max_iter = 100) {
  Newton2Result res;
  double x = x0, y = y0;
  for (int it = 0; it < max_iter; ++it) {
    const auto [f1, f2] = fn(x, y);
    const double r = std::hypot(f1, f2);
    if (r < res.residual) {
      res.x = x;
      res.y = y;
      res.residual = r;
    }
    if (r < tol) {
      res.converged = true;
      return res;
    }
    const double hx = 1e-7 * (1.0 + std::abs(x));
    const double hy = 1e-7 * (1.0 + std::abs(y));
    const auto [f1x, f2x] = fn(x + hx, y);
    const auto [f1y, f2y] = fn(x, y + hy);
    const double j11 = (f1x - f1) / hx, j12 = (f1y - f1) / hy;
    const double j21 = (f2x - f2) / hx, j22 = (f2y - f2) / hy;
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0) break;
    double dx = -(j22 * f1 - j12 * f2) / det;
    double dy = -(-j21 * f1 + j11 * f2) / det;
    double damp = 1.0;
    for (int bt = 0; bt < 30; ++bt) {
      const auto [g1, g2] = fn(x + damp * dx, y + damp * dy);
      if (std::hypot(g1, g2) < r) break;
      damp *= 0.5;
    }
    x += damp * dx;
    y += damp * dy;
  }
  const auto [f1, f2] = fn(x, y);
  const double r = std::hypot(f1, f2);
  if (r < res.residual) {
    res.x = x;
    res.y = y;
    res.residual = r;
  }
  res.converged = res.residual < tol;
  return res;
}

/// 4th-order central first derivative.
template <typename F>
double deriv4(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
         (12.0 * h);
}

/// Richardson-extrapolated central second derivative.
template <typename F>
double second_deriv(F&& f, double x, double h) {
  auto d2 = [&](double hh) {
    return (f(x + hh) - 2.0 * f(x) + f(x - hh)) / (hh * hh);
  };
  const double c = d2(h);
  const double fine = d2(0.5 * h);
  return (4.0 * fine - c) / 3.0;
}

// --- ODE integration -------------------------------------------------------

using OdeRhs = std::function<void(double t, const std::vector<double>& y,
                                  std::vector<double>& dydt)>;

namespace detail {
inline void rk4_step(const OdeRhs& rhs, double t, const std::vector<double>& y,
                     double h, std::vector<double>& out) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  rhs(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(t + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(t + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(t + h, tmp, k4);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}
}  // namespace detail

/// Called after each accepted step; return false to stop early.
using OdeObserver =
    std::function<bool(double t, const std::vector<double>& y)>;

/// Classic RK4 with step-doubling error control.
inline void integrate_ode(const OdeRhs& rhs, std::vector<double>& y, double t0,
                          double t1, double tol = 1e-8,
                          const OdeObserver& observer = {}) {
  double t = t0;
  double h = (t1 - t0) / 100.0;
  const double h_min = 1e-12 * (t1 - t0);
  std::vector<double> full, half1, half2;
  while (t < t1) {
    if (h < h_min) throw StiffnessError("integrate_ode: step underflow");
    if (t + h > t1) h = t1 - t;
    detail::rk4_step(rhs, t, y, h, full);
    detail::rk4_step(rhs, t, y, 0.5 * h, half1);
    detail::rk4_step(rhs, t + 0.5 * h, half1, 0.5 * h, half2);
    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!std::isfinite(half2[i]) || !std::isfinite(full[i]))
        err = std::numeric_limits<double>::infinity();
      else
        err = std::max(err, std::abs(half2[i] - full[i]) / 15.0);
    }
    if (err <= tol) {
      t += h;
      y = half2;
      if (observer && !observer(t, y)) return;
      // grow cautiously and keep steps a small fraction of the interval so
      // observer-driven stopping stays sharp
      if (err < 0.1 * tol) h = std::min(2.0 * h, 0.05 * (t1 - t0));
    } else {
      h *= 0.5;
    }
  }
}

}  // namespace bspulse::num
