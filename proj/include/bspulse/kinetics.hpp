#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bspulse/errors.hpp"
#include "bspulse/numerics.hpp"

// Bistable reaction layer: equilibrium branches h-(v) < h0(v) < h+(v),
// mass-imbalance function J(v) = int_{h-}^{h+} f(u,v) du with pinning value
// v* (the isolated root of J), and the heteroclinic front
//
//   U'' + c U' + f(U, v) = 0,  U(-inf) = h-(v),  U(+inf) = h+(v),
//
// solved by shooting on the speed c, with kappa(v) = int (U')^2.
// The projection identity c kappa = -J(v) ties the two together.

namespace bspulse {

class ReactionKinetics {
 public:
  using Rate = std::function<double(double, double)>;

  /// The Hill-type kinetics f(u,v) = (k0 + g0 u^2/(1+u^2)) v - u.
  static ReactionKinetics hill(double k0 = 0.05, double gamma0 = 0.79) {
    if (!(gamma0 > 8.0 * k0 && k0 > 0.0))
      throw NotBistableError(
          "hill kinetics requires gamma0 > 8 k0 > 0, got k0=" +
          std::to_string(k0) + ", gamma0=" + std::to_string(gamma0));
    auto f = [k0, gamma0](double u, double v) {
      return (k0 + gamma0 * u * u / (1.0 + u * u)) * v - u;
    };
    auto fu = [gamma0](double u, double v) {
      const double d = 1.0 + u * u;
      return gamma0 * v * 2.0 * u / (d * d) - 1.0;
    };
    auto fv = [k0, gamma0](double u, double /*v*/) {
      return k0 + gamma0 * u * u / (1.0 + u * u);
    };
    return ReactionKinetics(std::move(f), std::move(fu), std::move(fv), 50.0);
  }

  /// Generic kinetics satisfying the bistability assumptions; probed at
  /// construction.
  static ReactionKinetics custom(Rate f, Rate fu, Rate fv,
                                 double u_scan_max = 50.0) {
    return ReactionKinetics(std::move(f), std::move(fu), std::move(fv),
                            u_scan_max);
  }

  double f(double u, double v) const { return f_(u, v); }
  double f_u(double u, double v) const { return fu_(u, v); }
  double f_v(double u, double v) const { return fv_(u, v); }

  double v_min() const { return v_min_; }
  double v_max() const { return v_max_; }
  double v_star() const { return v_star_; }
  double j_prime_star() const { return j_prime_star_; }
  double kappa_star() const { return kappa_star_; }
  double delta_h(double v) const {
    const auto b = equilibrium_branches(v);
    return b[2] - b[0];
  }

  /// The three sorted roots of f(., v) = 0 for v in the bistable range.
  std::array<double, 3> equilibrium_branches(double v) const {
    check_range(v);
    auto roots = scan_roots(v, 2048);
    if (roots.size() != 3) roots = scan_roots(v, 65536);
    if (roots.size() != 3)
      throw RangeError("equilibrium_branches: found " +
                       std::to_string(roots.size()) + " roots at v=" +
                       std::to_string(v));
    std::array<double, 3> out{roots[0], roots[1], roots[2]};
    for (double& u : out) {
      for (int it = 0; it < 60; ++it) {
        const double fval = f_(u, v);
        if (std::abs(fval) < 1e-13) break;
        const double d = fu_(u, v);
        if (d == 0.0) break;
        u -= fval / d;
      }
    }
    return out;
  }

  /// d h+-/dv = -f_v/f_u evaluated on a branch root.
  double branch_slope(double u, double v) const {
    return -fv_(u, v) / fu_(u, v);
  }

  /// J(v) by adaptive quadrature.
  double mass_imbalance(double v) const {
    const auto b = equilibrium_branches(v);
    return num::integrate([&](double u) { return f_(u, v); }, b[0], b[2],
                          1e-12);
  }

  /// J'(v) by differentiating under the integral (boundary terms vanish).
  double j_derivative(double v) const {
    const auto b = equilibrium_branches(v);
    return num::integrate([&](double u) { return fv_(u, v); }, b[0], b[2],
                          1e-12);
  }

  struct FrontData {
    double speed = 0.0;  // c, speed of the left interface
    double kappa = 0.0;  // int (U')^2
  };

  /// Traveling front by shooting on c.
  FrontData front(double v) const {
    check_range(v);
    const auto b = equilibrium_branches(v);
    const double hm = b[0], hp = b[2];
    const double dh = hp - hm;

    // +1: overshoot (U exceeds h+), -1: undershoot (U' turns negative early),
    //  0: settled onto h+ within the residual tolerance. The classifier
    // integrates well past the shooting interval: returning "unresolved" to
    // the bisection would silently bias the bracket.
    auto classify = [&](double c) -> int {
      const double lam =
          0.5 * (-c + std::sqrt(c * c - 4.0 * fu_(hm, v)));
      const double d0 = 1e-8 * dh;
      double u = hm + d0;
      double p = d0 * lam;
      const double h = 2e-3;
      const int nsteps = static_cast<int>(512.0 / h);
      for (int i = 0; i < nsteps; ++i) {
        auto rhs = [&](double uu, double pp, double& du, double& dp) {
          du = pp;
          dp = -c * pp - f_(uu, v);
        };
        double k1u, k1p, k2u, k2p, k3u, k3p, k4u, k4p;
        rhs(u, p, k1u, k1p);
        rhs(u + 0.5 * h * k1u, p + 0.5 * h * k1p, k2u, k2p);
        rhs(u + 0.5 * h * k2u, p + 0.5 * h * k2p, k3u, k3p);
        rhs(u + h * k3u, p + h * k3p, k4u, k4p);
        u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        if (u > hp + 1e-9 * dh) return +1;
        // undershoot: U' turns negative, or the orbit stalls at the middle
        // equilibrium (overdamped regime, U' -> 0+ with U below h+)
        if (p < 1e-12 && u < hp - 1e-6 * dh) return -1;
        if (std::abs(u - hp) < 1e-10 && std::abs(p) < 1e-10) return 0;
      }
      return 0;  // ran out of interval while still settling
    };

    double ell = 20.0;
    for (; ell <= 320.0; ell *= 2.0) {
      // bracket the speed
      double c_lo = 0.0, c_hi = 0.0;
      int s_lo = 0, s_hi = 0;
      bool bracketed = false;
      for (double cmax = 1.0; cmax <= 16.0 && !bracketed; cmax *= 2.0) {
        const int n = 32;
        int prev = classify(-cmax);
        double prev_c = -cmax;
        for (int i = 1; i <= n; ++i) {
          const double c = -cmax + 2.0 * cmax * i / n;
          const int cur = classify(c);
          if (prev != 0 && cur != 0 && cur != prev) {
            c_lo = prev_c;
            c_hi = c;
            s_lo = prev;
            s_hi = cur;
            bracketed = true;
            break;
          }
          if (cur != 0) {
            prev = cur;
            prev_c = c;
          }
        }
      }
      if (!bracketed) continue;  // widen the interval and retry
      for (int it = 0; it < 80 && (c_hi - c_lo) > 1e-14; ++it) {
        const double cm = 0.5 * (c_lo + c_hi);
        const int sm = classify(cm);
        if (sm == 0 || sm == s_lo)
          c_lo = cm;
        else
          c_hi = cm;
      }
      const double c = 0.5 * (c_lo + c_hi);

      // final pass accumulating kappa = int (U')^2
      const double lam = 0.5 * (-c + std::sqrt(c * c - 4.0 * fu_(hm, v)));
      const double d0 = 1e-8 * dh;
      double u = hm + d0;
      double p = d0 * lam;
      double kappa = d0 * d0 * lam / 2.0;  // left exponential tail
      const double h = 2e-3;
      const int nsteps = static_cast<int>(2.0 * ell / h);
      bool settled = false;
      for (int i = 0; i < nsteps; ++i) {
        auto rhs = [&](double uu, double pp, double& du, double& dp,
                       double& dq) {
          du = pp;
          dp = -c * pp - f_(uu, v);
          dq = pp * pp;
        };
        double k1u, k1p, k1q, k2u, k2p, k2q, k3u, k3p, k3q, k4u, k4p, k4q;
        rhs(u, p, k1u, k1p, k1q);
        rhs(u + 0.5 * h * k1u, p + 0.5 * h * k1p, k2u, k2p, k2q);
        rhs(u + 0.5 * h * k2u, p + 0.5 * h * k2p, k3u, k3p, k3q);
        rhs(u + h * k3u, p + h * k3p, k4u, k4p, k4q);
        u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        kappa += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
        if (u >= hp || p <= 1e-14) {
          // round-off in c is amplified by ~dh/d0 through the launch tail, so
          // the closest approach bottoms out around 1e-5 dh; account for the
          // remaining right tail analytically instead of chasing it
          settled = std::abs(u - hp) < 1e-4 * dh;
          break;
        }
      }
      if (!settled) continue;
      const double nu =
          0.5 * (c + std::sqrt(c * c - 4.0 * fu_(hp, v)));
      kappa += (u - hp) * (u - hp) * nu / 2.0;
      return {c, kappa};
    }
    throw FrontSolveError("front: shooting failed to converge at v=" +
                          std::to_string(v));
  }

 private:
  ReactionKinetics(Rate f, Rate fu, Rate fv, double u_scan_max)
      : f_(std::move(f)),
        fu_(std::move(fu)),
        fv_(std::move(fv)),
        u_scan_max_(u_scan_max) {
    compute_bistable_range();
    compute_pinning_value();
    probe_invariants();
  }

  void check_range(double v) const {
    if (v <= v_min_)
      throw RangeError("v=" + std::to_string(v) +
                       " at or below bistable lower endpoint v_min=" +
                       std::to_string(v_min_));
    if (v >= v_max_)
      throw RangeError("v=" + std::to_string(v) +
                       " at or above bistable upper endpoint v_max=" +
                       std::to_string(v_max_));
  }

  std::vector<double> scan_roots(double v, int n) const {
    std::vector<double> roots;
    double prev_u = 0.0;
    double prev_f = f_(0.0, v);
    for (int i = 1; i <= n; ++i) {
      const double u = u_scan_max_ * i / n;
      const double fv_val = f_(u, v);
      if (prev_f == 0.0) roots.push_back(prev_u);
      else if (prev_f * fv_val < 0.0)
        roots.push_back(num::bisect([&](double x) { return f_(x, v); }, prev_u,
                                    u, 1e-15));
      prev_u = u;
      prev_f = fv_val;
    }
    return roots;
  }

  // v on the nullcline f(u, v) = 0 for fixed u, assuming f_v > 0 there.
  double nullcline_v(double u) const {
    double lo = 0.0, hi = 1.0;
    auto g = [&](double v) { return f_(u, v); };
    int guard = 0;
    while (g(hi) < 0.0 && ++guard < 100) hi *= 2.0;
    if (g(lo) > 0.0 || g(hi) < 0.0)
      throw NotBistableError("kinetics nullcline not solvable in v");
    return num::bisect(g, lo, hi, 1e-14);
  }

  void compute_bistable_range() {
    // folds: f = 0 and f_u = 0 simultaneously
    auto phi = [&](double u) { return fu_(u, nullcline_v(u)); };
    std::vector<double> folds;
    const int n = 4096;
    double prev_u = u_scan_max_ * 1e-4;
    double prev_phi = phi(prev_u);
    for (int i = 1; i <= n; ++i) {
      const double u = u_scan_max_ * 1e-4 +
                       (u_scan_max_ - u_scan_max_ * 1e-4) * i / n;
      const double cur = phi(u);
      if (prev_phi * cur < 0.0)
        folds.push_back(num::bisect(phi, prev_u, u, 1e-13));
      prev_u = u;
      prev_phi = cur;
    }
    if (folds.size() < 2)
      throw NotBistableError("kinetics has fewer than two fold points");
    std::vector<double> fold_v;
    for (double u : folds) fold_v.push_back(nullcline_v(u));
    v_min_ = *std::min_element(fold_v.begin(), fold_v.end());
    v_max_ = *std::max_element(fold_v.begin(), fold_v.end());
  }

  void compute_pinning_value() {
    const double margin = 1e-4 * (v_max_ - v_min_);
    auto J = [&](double v) { return mass_imbalance(v); };
    const int n = 64;
    double prev_v = v_min_ + margin;
    double prev_j = J(prev_v);
    bool found = false;
    for (int i = 1; i <= n && !found; ++i) {
      const double v = v_min_ + margin + (v_max_ - v_min_ - 2 * margin) * i / n;
      const double j = J(v);
      if (prev_j * j < 0.0) {
        v_star_ = num::bisect(J, prev_v, v, 1e-15);
        found = true;
      }
      prev_v = v;
      prev_j = j;
    }
    if (!found)
      throw NotBistableError("mass-imbalance J has no root in the bistable range");
    j_prime_star_ = j_derivative(v_star_);
    if (j_prime_star_ == 0.0)
      throw NotBistableError("J'(v*) vanishes; pinning value not isolated");
    kappa_star_ = front(v_star_).kappa;
  }

  void probe_invariants() const {
    for (int i = 1; i <= 8; ++i) {
      const double v = v_min_ + (v_max_ - v_min_) * i / 9.0;
      const auto b = equilibrium_branches(v);
      if (!(fu_(b[0], v) < 0.0 && fu_(b[1], v) > 0.0 && fu_(b[2], v) < 0.0))
        throw NotBistableError("f_u sign pattern violated at v=" +
                               std::to_string(v));
      if (!(fv_(b[0], v) > 0.0 && fv_(b[2], v) > 0.0))
        throw NotBistableError("f_v positivity violated at v=" +
                               std::to_string(v));
    }
  }

  Rate f_, fu_, fv_;
  double u_scan_max_;
  double v_min_ = 0.0, v_max_ = 0.0;
  double v_star_ = 0.0;
  double j_prime_star_ = 0.0;
  double kappa_star_ = 0.0;
};

/// Conserved-mass bookkeeping: ties total mass M to the stationary
/// half-width w* and the width-dependent bulk level v0(w).
class MassRelation {
 public:
  MassRelation(const ReactionKinetics& kin, double perimeter, double area,
               double total_mass)
      : kin_(&kin), L_(perimeter), area_(area), M_(total_mass) {
    const auto b = kin.equilibrium_branches(kin.v_star());
    const double lo = kin.v_star() * area_ + L_ * b[0];
    const double hi = kin.v_star() * area_ + L_ * b[2];
    if (!(M_ > lo && M_ < hi))
      throw AdmissibilityError(
          "total mass M=" + std::to_string(M_) +
          " outside the admissible range (" + std::to_string(lo) + ", " +
          std::to_string(hi) + ")");
    w_star_ = (M_ - kin.v_star() * area_ - L_ * b[0]) / (2.0 * (b[2] - b[0]));
    if (!(w_star_ > 0.0 && w_star_ < 0.5 * L_))
      throw AdmissibilityError("derived w* outside (0, L/2)");
  }

  /// The total mass that pins the stationary half-width at w_target.
  static double mass_for_width(const ReactionKinetics& kin, double perimeter,
                               double area, double w_target) {
    const auto b = kin.equilibrium_branches(kin.v_star());
    return kin.v_star() * area + perimeter * b[0] +
           2.0 * w_target * (b[2] - b[0]);
  }

  double total_mass() const { return M_; }
  double perimeter() const { return L_; }
  double area() const { return area_; }
  double w_star() const { return w_star_; }
  const ReactionKinetics& kinetics() const { return *kin_; }

  double mass_residual(double v0, double w) const {
    const auto b = kin_->equilibrium_branches(v0);
    return 2.0 * w * b[2] + (L_ - 2.0 * w) * b[0] + area_ * v0 - M_;
  }

  /// Solve F(v0, w) = 0 for v0 by Newton (dF/dv0 > 0).
  double v0_of_w(double w) const {
    double v0 = kin_->v_star();
    for (int it = 0; it < 80; ++it) {
      const auto b = kin_->equilibrium_branches(v0);
      const double F = 2.0 * w * b[2] + (L_ - 2.0 * w) * b[0] + area_ * v0 - M_;
      const double dF = 2.0 * w * kin_->branch_slope(b[2], v0) +
                        (L_ - 2.0 * w) * kin_->branch_slope(b[0], v0) + area_;
      const double vn = v0 - F / dF;
      if (vn <= kin_->v_min() || vn >= kin_->v_max())
        throw MassInfeasibleError(
            "v0 solve left the bistable range at w=" + std::to_string(w));
      if (std::abs(vn - v0) < 1e-14) return vn;
      v0 = vn;
    }
    return v0;
  }

  /// v0'(w) = -2 dh / (2w (h+)' + (L-2w)(h-)' + |Omega|), always negative.
  double v0_prime(double w) const {
    const double v0 = v0_of_w(w);
    const auto b = kin_->equilibrium_branches(v0);
    return -2.0 * (b[2] - b[0]) /
           (2.0 * w * kin_->branch_slope(b[2], v0) +
            (L_ - 2.0 * w) * kin_->branch_slope(b[0], v0) + area_);
  }

  /// Linearized eigenvalue of the pinned width: J'(v*) v0'(w*) / kappa*.
  double stability_eigenvalue() const {
    return kin_->j_prime_star() * v0_prime(w_star_) / kin_->kappa_star();
  }

 private:
  const ReactionKinetics* kin_;
  double L_, area_, M_;
  double w_star_ = 0.0;
};

}  // namespace bspulse
