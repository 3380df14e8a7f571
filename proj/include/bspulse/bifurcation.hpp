#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bspulse/errors.hpp"
#include "bspulse/geometry.hpp"
#include "bspulse/greens.hpp"
#include "bspulse/numerics.hpp"

// Critical points of the pulse potential E(.; w) and the closed-form regime
// classifications for the two deformed families, including the pitchfork
// thresholds w_b(k), k_b(w) (dumbbell, subcritical) and c_b(r, w) (perforated
// disk, supercritical).

namespace bspulse {

struct CriticalPoint {
  enum class Kind { Min, Max, Degenerate };
  enum class Provenance { Numeric, ClosedForm };

  double s0 = 0.0;
  Kind kind = Kind::Degenerate;
  double E_value = 0.0;
  double E_second = 0.0;
  Provenance provenance = Provenance::Numeric;
};

inline const char* to_string(CriticalPoint::Kind k) {
  switch (k) {
    case CriticalPoint::Kind::Min: return "min";
    case CriticalPoint::Kind::Max: return "max";
    case CriticalPoint::Kind::Degenerate: return "degenerate";
  }
  return "?";
}

struct Landscape {
  bool flat = false;  // max |E'| < 1e-12 everywhere (disk)
  std::vector<CriticalPoint> points;
};

namespace detail {

inline CriticalPoint::Kind classify_second(double e2) {
  if (std::abs(e2) < 1e-8) return CriticalPoint::Kind::Degenerate;
  return e2 > 0.0 ? CriticalPoint::Kind::Min : CriticalPoint::Kind::Max;
}

}  // namespace detail

/// Grid-scan / bisection / Newton-polish search for roots of E' over one
/// period.
inline Landscape critical_points(const PotentialField& pf, int grid_n = 512) {
  if (grid_n < 256)
    throw ResolutionError("critical_points: grid_n must be >= 256");
  const double L = pf.domain().perimeter();
  auto e1 = [&](double s) { return potential_derivative(pf, s, 1); };

  std::vector<double> vals(grid_n);
  double max_abs = 0.0;
  for (int i = 0; i < grid_n; ++i) {
    vals[i] = e1(L * i / grid_n);
    max_abs = std::max(max_abs, std::abs(vals[i]));
  }
  Landscape out;
  if (max_abs < 1e-12) {
    out.flat = true;
    return out;
  }

  std::vector<double> roots;
  for (int i = 0; i < grid_n; ++i) {
    const int j = (i + 1) % grid_n;
    const double a = L * i / grid_n;
    const double b = L * (i + 1) / grid_n;
    if (vals[i] == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (vals[i] * vals[j] < 0.0) {
      double x = num::bisect(e1, a, b, 1e-10);
      // Newton polish with the second derivative
      for (int it = 0; it < 20; ++it) {
        const double f = e1(x);
        const double d = potential_derivative(pf, x, 2);
        if (d == 0.0) break;
        const double xn = x - f / d;
        if (xn < a || xn > b) break;
        if (std::abs(xn - x) < 1e-13) {
          x = xn;
          break;
        }
        x = xn;
      }
      roots.push_back(x);
    }
  }

  // deduplicate modulo L
  std::sort(roots.begin(), roots.end());
  std::vector<double> uniq;
  for (double r : roots) {
    double rr = std::fmod(r, L);
    if (rr < 0.0) rr += L;
    bool dup = false;
    for (double u : uniq)
      if (std::abs(u - rr) < 1e-8 || std::abs(std::abs(u - rr) - L) < 1e-8)
        dup = true;
    if (!dup) uniq.push_back(rr);
  }

  for (double r : uniq) {
    CriticalPoint cp;
    cp.s0 = r;
    cp.E_value = potential(pf, r);
    cp.E_second = potential_derivative(pf, r, 2);
    cp.kind = detail::classify_second(cp.E_second);
    cp.provenance = CriticalPoint::Provenance::Numeric;
    out.points.push_back(cp);
  }
  return out;
}

/// Deformation value where the pitchfork structure first becomes possible:
/// k* = (5 + 2 sqrt 7 - 2 sqrt(11 + 5 sqrt 7)) / 3.
inline double dumbbell_k_star() {
  const double s7 = std::sqrt(7.0);
  return (5.0 + 2.0 * s7 - 2.0 * std::sqrt(11.0 + 5.0 * s7)) / 3.0;
}

inline double dumbbell_mu(double k) {
  return (1.0 - k) * (1.0 - k) / (4.0 * k);
}

/// g(mu) = (2 + 2 mu - 3 mu^2) / (3 mu + 2); sign of E''(0) equals
/// sign(g(mu) - sin^2 theta*).
inline double dumbbell_g(double mu) {
  return (2.0 + 2.0 * mu - 3.0 * mu * mu) / (3.0 * mu + 2.0);
}

/// Threshold half-width w_b(k) = arclength up to arcsin(sqrt g); defined for
/// k > k*.
inline double dumbbell_w_b(double k) {
  const double ks = dumbbell_k_star();
  if (k <= ks)
    throw ThresholdUndefinedError("w_b(k) undefined for k <= k* = " +
                                  std::to_string(ks));
  const double g = dumbbell_g(dumbbell_mu(k));
  const double theta = std::asin(std::sqrt(std::min(g, 1.0)));
  const ConformalDomain dom = ConformalDomain::dumbbell(k);
  return dom.arclength(theta);
}

/// Inverse threshold: the deformation where w_b(k) crosses w.
inline double dumbbell_k_b(double w) {
  if (!(w > 0.0 && w < 0.5 * num::kPi))
    throw DomainParameterError("k_b(w) requires w in (0, pi/2)");
  const double ks = dumbbell_k_star();
  const double lo = ks + 1e-12;
  double hi = 1.0 - 1e-5;
  if (dumbbell_w_b(hi) <= w)
    throw ThresholdUndefinedError("w above the range of w_b");
  return num::bisect([&](double k) { return dumbbell_w_b(k) - w; }, lo, hi,
                     1e-10);
}

struct RegimeReport {
  DomainKind domain_kind = DomainKind::Disk;
  double w = 0.0;
  int clause = 0;  // which classification clause applies

  // dumbbell data
  double k = 0.0, mu = 0.0, g_mu = 0.0, k_star = 0.0;
  double theta_star = 0.0;
  double w_b = std::numeric_limits<double>::quiet_NaN();

  // hole data
  double c = 0.0, r = 0.0, b = 0.0;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  double b0 = std::numeric_limits<double>::quiet_NaN();

  std::vector<CriticalPoint> points;
};

namespace detail {

inline CriticalPoint make_cp(const PotentialField& pf, double s0,
                             CriticalPoint::Kind kind) {
  CriticalPoint cp;
  cp.s0 = s0;
  cp.kind = kind;
  cp.E_value = potential(pf, s0);
  cp.E_second = potential_derivative(pf, s0, 2);
  cp.provenance = CriticalPoint::Provenance::ClosedForm;
  return cp;
}

// One interior root of E' on the open interval (a, b), refined from a dense
// scan; used for the clause-(4) interior maxima whose position has no closed
// form.
inline std::vector<double> interior_roots(const PotentialField& pf, double a,
                                          double b) {
  auto e1 = [&](double s) { return potential_derivative(pf, s, 1); };
  std::vector<double> roots;
  const int n = 512;
  const double margin = 1e-6 * (b - a);
  double prev_s = a + margin;
  double prev_v = e1(prev_s);
  for (int i = 1; i <= n; ++i) {
    const double s = a + margin + (b - a - 2 * margin) * i / n;
    const double v = e1(s);
    if (prev_v * v < 0.0) roots.push_back(num::bisect(e1, prev_s, s, 1e-11));
    prev_s = s;
    prev_v = v;
  }
  return roots;
}

}  // namespace detail

/// Closed-form classification for the dumbbell family.
inline RegimeReport dumbbell_regime(double k, double w) {
  const ConformalDomain dom = ConformalDomain::dumbbell(k);
  const double L = dom.perimeter();
  if (!(w > 0.0 && w < 0.5 * L))
    throw DomainParameterError("dumbbell_regime: w outside (0, L/2)");
  RegimeReport rep;
  rep.domain_kind = DomainKind::Dumbbell;
  rep.k = k;
  rep.w = w;
  rep.k_star = dumbbell_k_star();
  rep.mu = dumbbell_mu(k);
  rep.g_mu = dumbbell_g(rep.mu);
  rep.theta_star = dom.theta_of(w);

  const PotentialField pf(dom, w);
  const double st = std::sin(rep.theta_star);
  const double sign_e2 = rep.g_mu - st * st;  // sign of E''(0)

  auto push = [&](double s0, CriticalPoint::Kind kind) {
    rep.points.push_back(detail::make_cp(pf, s0, kind));
  };

  if (k <= rep.k_star) {
    rep.clause = 2;  // axis extrema only; s=0 a maximum for every w
  } else {
    rep.w_b = dumbbell_w_b(k);
    if (std::abs(sign_e2) < 1e-12)
      rep.clause = 0;  // exactly at threshold: degenerate
    else if (sign_e2 < 0.0)
      rep.clause = 3;  // wide pulse: same landscape as clause 2
    else
      rep.clause = 4;  // narrow pulse: s=0 restabilized, interior maxima
  }

  const CriticalPoint::Kind axis_kind =
      rep.clause == 4   ? CriticalPoint::Kind::Min
      : rep.clause == 0 ? CriticalPoint::Kind::Degenerate
                        : CriticalPoint::Kind::Max;
  push(0.0, axis_kind);
  push(0.25 * L, CriticalPoint::Kind::Min);
  push(0.50 * L, axis_kind);
  push(0.75 * L, CriticalPoint::Kind::Min);

  if (rep.clause == 4) {
    // at least one interior maximum on (0, L/4); mirror by symmetry
    const auto roots = detail::interior_roots(pf, 0.0, 0.25 * L);
    for (double s : roots) {
      push(s, CriticalPoint::Kind::Max);
      push(0.5 * L - s, CriticalPoint::Kind::Max);
      push(0.5 * L + s, CriticalPoint::Kind::Max);
      push(L - s, CriticalPoint::Kind::Max);
    }
  }
  std::sort(rep.points.begin(), rep.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) {
              return a.s0 < b.s0;
            });
  return rep;
}

/// Closed-form classification for the perforated disk; s is physical arc
/// length on the outer unit circle (L = 2 pi).
inline RegimeReport hole_regime(double c, double r, double w) {
  const ConformalDomain dom = ConformalDomain::perforated_disk(c, r);
  if (!(w > 0.0 && w < num::kPi))
    throw DomainParameterError("hole_regime: w outside (0, pi)");
  RegimeReport rep;
  rep.domain_kind = DomainKind::PerforatedDisk;
  rep.c = c;
  rep.r = r;
  rep.w = w;
  rep.b = dom.moebius_shift();
  const double b = rep.b;

  const PotentialField pf(dom, w);
  auto push = [&](double s0, CriticalPoint::Kind kind) {
    double ss = std::fmod(s0, 2.0 * num::kPi);
    if (ss < 0.0) ss += 2.0 * num::kPi;
    rep.points.push_back(detail::make_cp(pf, ss, kind));
  };

  if (b == 0.0) {
    rep.clause = 0;  // concentric hole: rotationally flat potential
    rep.threshold = 0.5 * num::kPi;
    return rep;
  }
  rep.threshold = std::acos(2.0 * b / (1.0 + b * b));
  rep.b0 = (1.0 + b * b) / (2.0 * b) * std::cos(w);

  if (std::abs(rep.b0 - 1.0) < 1e-12) {
    rep.clause = 3;  // at threshold: s=0 degenerate
    push(0.0, CriticalPoint::Kind::Degenerate);
    push(num::kPi, CriticalPoint::Kind::Max);
  } else if (rep.b0 > 1.0) {
    rep.clause = 1;  // narrow pulse: axis points only, s=0 the minimum
    push(0.0, CriticalPoint::Kind::Min);
    push(num::kPi, CriticalPoint::Kind::Max);
  } else {
    rep.clause = 2;  // wide pulse: nontrivial minima at +-arccos(b0)
    push(0.0, CriticalPoint::Kind::Max);
    push(num::kPi, CriticalPoint::Kind::Max);
    const double sm = std::acos(rep.b0);
    push(sm, CriticalPoint::Kind::Min);
    push(-sm, CriticalPoint::Kind::Min);
  }
  std::sort(rep.points.begin(), rep.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b2) {
              return a.s0 < b2.s0;
            });
  return rep;
}

/// Offset threshold c_b(r, w): the hole offset where arccos(2b/(1+b^2))
/// crosses w. The threshold decreases from pi/2 as c grows.
inline double hole_c_b(double r, double w) {
  if (!(r > 0.0 && r < 1.0))
    throw DomainParameterError("hole_c_b: r outside (0,1)");
  if (!(w > 0.0 && w < 0.5 * num::kPi))
    throw ThresholdUndefinedError(
        "hole_c_b: threshold range is (0, pi/2); no crossing for w >= pi/2");
  auto gap = [&](double c) {
    const ConformalDomain dom = ConformalDomain::perforated_disk(c, r);
    const double b = dom.moebius_shift();
    return std::acos(2.0 * b / (1.0 + b * b)) - w;
  };
  const double c_hi = 1.0 - r - 1e-5;
  if (gap(c_hi) >= 0.0)
    throw ThresholdUndefinedError("hole_c_b: no crossing below c = 1 - r");
  return num::bisect(gap, 1e-12, c_hi, 1e-10);
}

}  // namespace bspulse
