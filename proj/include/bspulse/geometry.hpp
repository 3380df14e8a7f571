#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "bspulse/errors.hpp"
#include "bspulse/numerics.hpp"

// Computational domains as conformal images of the unit disk or an annulus.
//
// Three families are supported:
//   Disk            f(z) = z
//   Dumbbell        f(z) = (1-k) z / (1 - k z^2),        0 <= k < 1
//   PerforatedDisk  unit disk minus B((c,0), r), realised as the Moebius
//                   image f(z) = (z+b)/(1+bz) of the annulus a < |z| < 1
//
// The boundary metric is rho(theta) = |f'(e^{i theta})|, the arc-length map
// S(theta) = int_0^theta rho, and Theta = S^{-1}. For the perforated disk the
// outer boundary is the unit circle itself, so arc length coincides with the
// physical angle there.

namespace bspulse {

enum class DomainKind { Disk, Dumbbell, PerforatedDisk };

struct DomainSpec {
  DomainKind kind = DomainKind::Disk;
  double k = 0.0;            // dumbbell deformation
  double hole_offset = 0.0;  // c
  double hole_radius = 0.0;  // r
};

class ConformalDomain {
 public:
  static ConformalDomain disk() { return ConformalDomain(DomainSpec{}); }

  static ConformalDomain dumbbell(double k) {
    DomainSpec spec;
    spec.kind = DomainKind::Dumbbell;
    spec.k = k;
    return ConformalDomain(spec);
  }

  static ConformalDomain perforated_disk(double c, double r) {
    DomainSpec spec;
    spec.kind = DomainKind::PerforatedDisk;
    spec.hole_offset = c;
    spec.hole_radius = r;
    return ConformalDomain(spec);
  }

  static ConformalDomain build(const DomainSpec& spec) {
    return ConformalDomain(spec);
  }

  DomainKind kind() const { return spec_.kind; }
  double deformation() const { return spec_.k; }
  double hole_offset() const { return spec_.hole_offset; }
  double hole_radius() const { return spec_.hole_radius; }
  double annulus_inner() const { return a_; }
  double moebius_shift() const { return b_; }
  double perimeter() const { return perimeter_; }
  double area() const { return area_; }
  bool simply_connected() const {
    return spec_.kind != DomainKind::PerforatedDisk;
  }

  /// rho(theta) = |f'(e^{i theta})|.
  double metric(double theta) const {
    switch (spec_.kind) {
      case DomainKind::Disk:
        return 1.0;
      case DomainKind::Dumbbell: {
        const double k = spec_.k;
        const double c2 = std::cos(theta) * std::cos(theta);
        const double s2 = std::sin(theta) * std::sin(theta);
        const double om = (1.0 - k) * (1.0 - k);
        return (1.0 - k) * std::sqrt(om + 4.0 * k * c2) / (om + 4.0 * k * s2);
      }
      case DomainKind::PerforatedDisk: {
        const double b = b_;
        return (1.0 - b * b) / (1.0 + 2.0 * b * std::cos(theta) + b * b);
      }
    }
    return 1.0;
  }

  /// d/dtheta log rho(theta).
  double metric_log_deriv(double theta) const {
    switch (spec_.kind) {
      case DomainKind::Disk:
        return 0.0;
      case DomainKind::Dumbbell: {
        const double k = spec_.k;
        const double mu = (1.0 - k) * (1.0 - k) / (4.0 * k);
        const double s2t = std::sin(2.0 * theta);
        const double c2 = std::cos(theta) * std::cos(theta);
        const double s2 = std::sin(theta) * std::sin(theta);
        return -0.5 * s2t / (mu + c2) - s2t / (mu + s2);
      }
      case DomainKind::PerforatedDisk: {
        const double b = b_;
        return 2.0 * b * std::sin(theta) /
               (1.0 + 2.0 * b * std::cos(theta) + b * b);
      }
    }
    return 0.0;
  }

  /// S(theta), accepted for any real theta (extended by periodicity).
  double arclength(double theta) const {
    const double two_pi = 2.0 * num::kPi;
    double wraps = std::floor(theta / two_pi);
    double th = theta - wraps * two_pi;
    const std::size_t i =
        std::min<std::size_t>(static_cast<std::size_t>(th / dtheta_),
                              kArcNodes - 1);
    const double base = arc_table_[i];
    const double local =
        num::gauss16([this](double t) { return metric(t); },
                     static_cast<double>(i) * dtheta_, th);
    return wraps * perimeter_ + base + local;
  }

  /// Theta(s) = S^{-1}(s), result in [0, 2 pi).
  double theta_of(double s) const {
    const double two_pi = 2.0 * num::kPi;
    double sm = std::fmod(s, perimeter_);
    if (sm < 0.0) sm += perimeter_;
    // bracket from the monotone table
    auto it = std::upper_bound(arc_table_.begin(), arc_table_.end(), sm);
    std::size_t hi = static_cast<std::size_t>(it - arc_table_.begin());
    std::size_t lo = hi > 0 ? hi - 1 : 0;
    double ta = static_cast<double>(lo) * dtheta_;
    double tb = std::min(static_cast<double>(hi) * dtheta_, two_pi);
    double th = 0.5 * (ta + tb);
    for (int iter = 0; iter < 50; ++iter) {
      const double r = arclength(th) - sm;
      if (r > 0.0)
        tb = th;
      else
        ta = th;
      const double step = r / metric(th);
      double tn = th - step;
      if (tn <= ta || tn >= tb) tn = 0.5 * (ta + tb);
      if (std::abs(tn - th) < 1e-14) {
        th = tn;
        break;
      }
      th = tn;
    }
    if (th >= two_pi) th -= two_pi;
    if (th < 0.0) th += two_pi;
    return th;
  }

  /// f(e^{i theta}) on the (outer) boundary.
  std::complex<double> map_boundary(double theta) const {
    const std::complex<double> z = std::polar(1.0, theta);
    switch (spec_.kind) {
      case DomainKind::Disk:
        return z;
      case DomainKind::Dumbbell: {
        const double k = spec_.k;
        return (1.0 - k) * z / (1.0 - k * z * z);
      }
      case DomainKind::PerforatedDisk:
        return (z + b_) / (1.0 + b_ * z);
    }
    return z;
  }

  struct BoundaryPoint {
    double x = 0.0;
    double y = 0.0;
    double curvature = 0.0;
  };

  /// Position and signed curvature at arc length s on the outer boundary.
  BoundaryPoint boundary_point(double s) const {
    const double theta = theta_of(s);
    const std::complex<double> z = std::polar(1.0, theta);
    const std::complex<double> pos = map_boundary(theta);
    // kappa = Re(1 + z f''/f') / |f'| on |z| = 1
    std::complex<double> zfpp_fp(0.0, 0.0);
    switch (spec_.kind) {
      case DomainKind::Disk:
        break;
      case DomainKind::Dumbbell: {
        const double k = spec_.k;
        const std::complex<double> z2 = z * z;
        zfpp_fp = 2.0 * k * z2 * (3.0 + k * z2) /
                  ((1.0 - k * z2) * (1.0 + k * z2));
        break;
      }
      case DomainKind::PerforatedDisk:
        zfpp_fp = -2.0 * b_ * z / (1.0 + b_ * z);
        break;
    }
    const double kappa = (1.0 + zfpp_fp.real()) / metric(theta);
    return {pos.real(), pos.imag(), kappa};
  }

 private:
  static constexpr std::size_t kArcNodes = 4096;

  explicit ConformalDomain(const DomainSpec& spec) : spec_(spec) {
    validate();
    if (spec_.kind == DomainKind::PerforatedDisk) solve_annulus_parameters();
    build_arc_table();
    compute_area();
  }

  void validate() {
    switch (spec_.kind) {
      case DomainKind::Disk:
        break;
      case DomainKind::Dumbbell:
        if (spec_.k < 0.0 || spec_.k >= 1.0)
          throw DomainParameterError("dumbbell deformation k must lie in [0,1), got " +
                                     std::to_string(spec_.k));
        if (spec_.k > 1.0 - 1e-6)
          throw DomainParameterError(
              "dumbbell deformation too close to the tangent-disk limit k=1");
        break;
      case DomainKind::PerforatedDisk: {
        const double c = spec_.hole_offset, r = spec_.hole_radius;
        if (r <= 0.0 || r >= 1.0)
          throw DomainParameterError("hole radius r must lie in (0,1), got " +
                                     std::to_string(r));
        if (c < 0.0 || c >= 1.0 - r)
          throw DomainParameterError(
              "hole offset c must lie in [0, 1-r), got " + std::to_string(c));
        if (c > 1.0 - r - 1e-6)
          throw DomainParameterError(
              "hole offset too close to the boundary-touching limit c=1-r");
        break;
      }
    }
  }

  void solve_annulus_parameters() {
    const double c = spec_.hole_offset, r = spec_.hole_radius;
    if (c == 0.0) {  // concentric: symmetry forces b = 0
      a_ = r;
      b_ = 0.0;
      return;
    }
    auto forward = [](double a, double b) -> std::pair<double, double> {
      const double den = 1.0 - a * a * b * b;
      return {b * (1.0 - a * a) / den, a * (1.0 - b * b) / den};
    };
    auto residual = [&](double a, double b) -> std::pair<double, double> {
      auto [cc, rr] = forward(a, b);
      return {cc - c, rr - r};
    };
    auto res = num::solve2(residual, r, c, 1e-13);
    if (res.converged && res.x > 0.0 && res.x < 1.0 && res.y > 0.0 &&
        res.y < 1.0) {
      a_ = res.x;
      b_ = res.y;
      return;
    }
    // fallback: bisection on b with a(b) from the r-equation
    auto a_of_b = [&](double b) {
      const double q = 1.0 - b * b;
      return (-q + std::sqrt(q * q + 4.0 * r * r * b * b)) / (2.0 * r * b * b);
    };
    auto c_err = [&](double b) {
      const double a = a_of_b(b);
      return forward(a, b).first - c;
    };
    if (c_err(1e-12) * c_err(1.0 - 1e-12) > 0.0)
      throw GeometrySolveError("annulus parameter solve failed to bracket",
                               res.residual);
    b_ = num::bisect(c_err, 1e-12, 1.0 - 1e-12, 1e-15);
    a_ = a_of_b(b_);
    auto [rc, rr] = residual(a_, b_);
    const double resid = std::hypot(rc, rr);
    if (resid > 1e-10)
      throw GeometrySolveError("annulus parameter solve did not converge",
                               resid);
  }

  void build_arc_table() {
    arc_table_.resize(kArcNodes + 1);
    dtheta_ = 2.0 * num::kPi / kArcNodes;
    arc_table_[0] = 0.0;
    for (std::size_t i = 0; i < kArcNodes; ++i) {
      const double lo = static_cast<double>(i) * dtheta_;
      arc_table_[i + 1] =
          arc_table_[i] +
          num::gauss16([this](double t) { return metric(t); }, lo, lo + dtheta_);
    }
    perimeter_ = arc_table_.back();
  }

  void compute_area() {
    switch (spec_.kind) {
      case DomainKind::Disk:
        area_ = num::kPi;
        break;
      case DomainKind::PerforatedDisk:
        area_ = num::kPi * (1.0 - spec_.hole_radius * spec_.hole_radius);
        break;
      case DomainKind::Dumbbell: {
        // (1/2) oint (x dy - y dx) along theta
        auto integrand = [this](double theta) {
          const std::complex<double> z = std::polar(1.0, theta);
          const std::complex<double> w = map_boundary(theta);
          const double k = spec_.k;
          const std::complex<double> z2 = z * z;
          const std::complex<double> fp =
              (1.0 - k) * (1.0 + k * z2) / ((1.0 - k * z2) * (1.0 - k * z2));
          const std::complex<double> wp = std::complex<double>(0.0, 1.0) * z * fp;
          return 0.5 * (std::conj(w) * wp).imag();
        };
        area_ = num::integrate(integrand, 0.0, 2.0 * num::kPi, 1e-12);
        break;
      }
    }
  }

  DomainSpec spec_;
  double a_ = 0.0;  // annulus inner radius
  double b_ = 0.0;  // Moebius shift
  double perimeter_ = 0.0;
  double area_ = 0.0;
  double dtheta_ = 0.0;
  std::vector<double> arc_table_;  // S at uniform theta nodes
};

}  // namespace bspulse
