#pragma once

#include <cmath>
#include <complex>

#include "bspulse/errors.hpp"
#include "bspulse/geometry.hpp"
#include "bspulse/numerics.hpp"

// Boundary traces of Neumann Green's functions and the pulse-position
// potential
//
//   E(s0; w) = 2 G_Gamma(s0-w, s0+w) - H(s0-w, s0-w) - H(s0+w, s0+w),
//
// evaluated through the conformal closed forms of each domain family. The
// additive normalization is fixed so that the disk trace equals
// -(1/pi) log|e^{i theta} - e^{i phi}| + 1/(8 pi); constants shared by every
// evaluation drop out of all derivatives.

namespace bspulse {

/// Boundary trace of the Neumann Green's function of the unit disk.
inline double disk_trace_green(double theta, double phi) {
  const double half = 0.5 * (theta - phi);
  const double dist = 2.0 * std::abs(std::sin(half));
  if (dist < 1e-15)
    throw SingularEvaluationError("disk_trace_green: coincident angles");
  return -std::log(dist) / num::kPi + 1.0 / (8.0 * num::kPi);
}

/// Outer-circle trace on the annulus a < |z| < 1, summed term by term.
inline double annulus_trace_green(double a, double theta, double phi,
                                  double series_tol = 1e-12) {
  if (a <= 0.0 || a >= 1.0)
    throw DomainParameterError("annulus inner radius must lie in (0,1)");
  const double d = theta - phi;
  double sum = disk_trace_green(theta, phi);
  const double a2 = a * a;
  double a2n = 1.0;
  for (int n = 1; n < 100000; ++n) {
    a2n *= a2;
    const double term = 2.0 / num::kPi * a2n / (n * (1.0 - a2n)) *
                        std::cos(n * d);
    sum += term;
    // geometric tail bound
    if (2.0 / num::kPi * a2n / (n * (1.0 - a2n)) / (1.0 - a2) < series_tol)
      break;
  }
  return sum;
}

/// Same trace via the log-product resummation of the cosine series.
inline double annulus_trace_green_product(double a, double theta, double phi,
                                          double series_tol = 1e-12) {
  if (a <= 0.0 || a >= 1.0)
    throw DomainParameterError("annulus inner radius must lie in (0,1)");
  const double d = theta - phi;
  double sum = disk_trace_green(theta, phi);
  const double a2 = a * a;
  double a2m = 1.0;
  double series = 0.0;
  for (int m = 1; m < 100000; ++m) {
    a2m *= a2;
    series += std::log(1.0 - 2.0 * a2m * std::cos(d) + a2m * a2m);
    if (4.0 * a2m / ((1.0 - a2m) * (1.0 - a2m)) < series_tol) break;
  }
  return sum - series / num::kPi;
}

/// The potential E(.; w) on a fixed domain with fixed half-width.
class PotentialField {
 public:
  PotentialField(const ConformalDomain& domain, double w,
                 double series_tol = 1e-12)
      : domain_(&domain), w_(w), series_tol_(series_tol) {
    const double L = domain.perimeter();
    if (!(w > 0.0 && w < 0.5 * L))
      throw DomainParameterError("half-width w must lie in (0, L/2)");
    near_degenerate_ = (w < 1e-3) || (0.5 * L - w < 1e-3);
  }

  const ConformalDomain& domain() const { return *domain_; }
  double half_width() const { return w_; }
  double series_tol() const { return series_tol_; }
  /// Interfaces nearly coincident; the log term dominates E.
  bool near_degenerate_width() const { return near_degenerate_; }

 private:
  const ConformalDomain* domain_;
  double w_;
  double series_tol_;
  bool near_degenerate_ = false;
};

namespace detail {

// theta_2 - theta_1 normalised to (0, 2 pi)
inline double theta_gap(const ConformalDomain& dom, double s1, double s2,
                        double& theta1, double& theta2) {
  theta1 = dom.theta_of(s1);
  theta2 = dom.theta_of(s2);
  double d = theta2 - theta1;
  if (d <= 0.0) d += 2.0 * num::kPi;
  return d;
}

// D(s0) = (1 - 2b cos(s0-w) + b^2)(1 - 2b cos(s0+w) + b^2)
inline double hole_D(double b, double s0, double w) {
  const double one = 1.0 + b * b;
  return (one - 2.0 * b * std::cos(s0 - w)) * (one - 2.0 * b * std::cos(s0 + w));
}

inline double hole_D_deriv(double b, double s0, double w) {
  const double b0 = (1.0 + b * b) / (2.0 * b) * std::cos(w);
  return 8.0 * b * b * std::sin(s0) * (b0 - std::cos(s0));
}

}  // namespace detail

/// Generic conformal evaluation (disk route for simply connected domains,
/// annulus cosine series otherwise).
inline double potential_generic(const PotentialField& pf, double s0) {
  const ConformalDomain& dom = pf.domain();
  const double w = pf.half_width();
  double th1, th2;
  const double d = detail::theta_gap(dom, s0 - w, s0 + w, th1, th2);
  const double rho1 = dom.metric(th1);
  const double rho2 = dom.metric(th2);
  const double sin_half = std::sin(0.5 * d);
  double e = -std::log(4.0 * rho1 * rho2 * sin_half * sin_half) / num::kPi;
  if (!dom.simply_connected()) {
    const double a2 = dom.annulus_inner() * dom.annulus_inner();
    double a2n = 1.0;
    for (int n = 1; n < 100000; ++n) {
      a2n *= a2;
      e += 4.0 / num::kPi * a2n / (n * (1.0 - a2n)) * std::cos(n * d);
      if (4.0 / num::kPi * a2n / (n * (1.0 - a2n)) / (1.0 - a2) <
          pf.series_tol())
        break;
    }
  }
  return e;
}

/// E(s0; w) through the per-family closed form (C_w = 0).
inline double potential(const PotentialField& pf, double s0) {
  const ConformalDomain& dom = pf.domain();
  const double w = pf.half_width();
  switch (dom.kind()) {
    case DomainKind::Disk: {
      const double sw = std::sin(w);
      return -std::log(4.0 * sw * sw) / num::kPi;
    }
    case DomainKind::Dumbbell: {
      const double k = dom.deformation();
      double th1, th2;
      const double d = detail::theta_gap(dom, s0 - w, s0 + w, th1, th2);
      const double om = (1.0 - k) * (1.0 - k);
      auto c2 = [](double t) { return std::cos(t) * std::cos(t); };
      auto s2 = [](double t) { return std::sin(t) * std::sin(t); };
      const double sin_half = std::sin(0.5 * d);
      const double arg =
          4.0 * om * sin_half * sin_half *
          std::sqrt((om + 4.0 * k * c2(th1)) * (om + 4.0 * k * c2(th2))) /
          ((om + 4.0 * k * s2(th1)) * (om + 4.0 * k * s2(th2)));
      return -std::log(arg) / num::kPi;
    }
    case DomainKind::PerforatedDisk: {
      const double a = dom.annulus_inner();
      const double b = dom.moebius_shift();
      const double D = detail::hole_D(b, s0, w);
      const double sw2 = std::sin(w) * std::sin(w);
      const double q = (1.0 - b * b) * (1.0 - b * b) * sw2;
      const double a2 = a * a;
      double a2m = 1.0;
      double e = 0.0;
      for (int m = 1; m < 100000; ++m) {
        a2m *= a2;
        const double g = (1.0 - a2m) * (1.0 - a2m);
        e -= 2.0 / num::kPi * std::log1p(4.0 * a2m * q / (g * D));
        if (4.0 * a2m / g < pf.series_tol()) break;
      }
      return e;
    }
  }
  return 0.0;
}

/// dE/ds0 (order 1, analytic) or d2E/ds0^2 (order 2, Richardson differences
/// of the analytic first derivative with step h = 1e-4 L).
inline double potential_derivative(const PotentialField& pf, double s0,
                                   int order = 1) {
  const ConformalDomain& dom = pf.domain();
  if (order == 2) {
    const double h = 1e-4 * dom.perimeter();
    auto d1 = [&](double hh) {
      return (potential_derivative(pf, s0 + hh, 1) -
              potential_derivative(pf, s0 - hh, 1)) /
             (2.0 * hh);
    };
    return (4.0 * d1(0.5 * h) - d1(h)) / 3.0;
  }
  if (order != 1) throw Error("potential_derivative: order must be 1 or 2");
  const double w = pf.half_width();
  switch (dom.kind()) {
    case DomainKind::Disk:
      return 0.0;
    case DomainKind::Dumbbell: {
      double th1, th2;
      const double d = detail::theta_gap(dom, s0 - w, s0 + w, th1, th2);
      const double dth1 = 1.0 / dom.metric(th1);
      const double dth2 = 1.0 / dom.metric(th2);
      const double cot = std::cos(0.5 * d) / std::sin(0.5 * d);
      return -(cot * (dth2 - dth1) + dom.metric_log_deriv(th1) * dth1 +
               dom.metric_log_deriv(th2) * dth2) /
             num::kPi;
    }
    case DomainKind::PerforatedDisk: {
      const double a = dom.annulus_inner();
      const double b = dom.moebius_shift();
      const double D = detail::hole_D(b, s0, w);
      const double Dp = detail::hole_D_deriv(b, s0, w);
      const double sw2 = std::sin(w) * std::sin(w);
      const double q = (1.0 - b * b) * (1.0 - b * b) * sw2;
      const double a2 = a * a;
      double a2m = 1.0;
      double sum = 0.0;
      for (int m = 1; m < 100000; ++m) {
        a2m *= a2;
        const double g = (1.0 - a2m) * (1.0 - a2m);
        const double A = 4.0 * a2m * q / g;
        sum += A / (D * (D + A));
        if (4.0 * a2m / g < pf.series_tol()) break;
      }
      return 2.0 / num::kPi * Dp * sum;
    }
  }
  return 0.0;
}

/// Mixed derivative of the regular part, d^2 H / ds ds', on the diagonal.
/// Only the conformal-distortion term survives the mixed derivative; it is
/// differenced with a 4th-order cross stencil whose diagonal entries use the
/// exact limit (1/pi) log rho.
inline double regular_part_mixed_deriv(const ConformalDomain& dom, double s0) {
  if (!dom.simply_connected())
    throw UnsupportedDomainError(
        "regular_part_mixed_deriv: annulus-image domains unsupported");
  auto psi = [&](double s, double t) {
    const double ths = dom.theta_of(s);
    const double tht = dom.theta_of(t);
    if (s == t) return std::log(dom.metric(ths)) / num::kPi;
    const std::complex<double> zs = std::polar(1.0, ths);
    const std::complex<double> zt = std::polar(1.0, tht);
    const double num_dist = std::abs(dom.map_boundary(ths) - dom.map_boundary(tht));
    const double den_dist = std::abs(zs - zt);
    return std::log(num_dist / den_dist) / num::kPi;
  };
  const double h = 0.01 * dom.perimeter();
  // 4th-order first-derivative coefficients at offsets -2..2
  const double c[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
  double acc = 0.0;
  for (int i = -2; i <= 2; ++i) {
    if (c[i + 2] == 0.0) continue;
    for (int j = -2; j <= 2; ++j) {
      if (c[j + 2] == 0.0) continue;
      const double s = s0 + i * h;
      const double t = (i == j) ? s : s0 + j * h;
      acc += c[i + 2] * c[j + 2] * psi(s, t);
    }
  }
  return acc / (h * h);
}

/// Two-term small-w expansion of E about the log singularity.
inline double small_w_expansion(const ConformalDomain& dom, double s0,
                                double w) {
  if (!dom.simply_connected())
    throw UnsupportedDomainError(
        "small_w_expansion: annulus-image domains unsupported");
  const double kappa = dom.boundary_point(s0).curvature;
  const double hss = regular_part_mixed_deriv(dom, s0);
  return -2.0 / num::kPi * std::log(2.0 * w) +
         (kappa * kappa / (3.0 * num::kPi) - 4.0 * hss) * w * w;
}

}  // namespace bspulse
