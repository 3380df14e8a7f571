#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "bspulse/bifurcation.hpp"
#include "bspulse/errors.hpp"
#include "bspulse/geometry.hpp"
#include "bspulse/greens.hpp"
#include "bspulse/kinetics.hpp"
#include "bspulse/numerics.hpp"

// The two reduced pulse ODEs:
//
//   fast (wave-pinning):   dw/dt  = J(v0(w)) / kappa(v0(w)),   s0 frozen,
//   slow (metastability):  ds0/dt = -eps^2 dh(v*) J'(v*) / (4 kappa* D)
//                                   * E'(s0; w*),              w = w*,
//
// plus composite integration with a fast-to-slow handoff and equilibrium
// reporting on the potential landscape.

namespace bspulse {

struct PulseState {
  double s0 = 0.0;  // center, arc length mod L
  double w = 0.0;   // half-width, in (0, L/2)
  double t = 0.0;
};

enum class ReducedMode { Fast, Slow, Composite };

struct ReducedTrajectory {
  std::vector<PulseState> samples;
  double fast_duration = 0.0;  // composite mode: time spent before handoff
};

struct PulseEquilibrium {
  double s0 = 0.0;
  double w = 0.0;
  bool stable = false;
  bool degenerate = false;
  double E_second = 0.0;
};

class ReducedModel {
 public:
  ReducedModel(const ConformalDomain& domain, const ReactionKinetics& kin,
               const MassRelation& rel, double eps, double D)
      : dom_(&domain),
        kin_(&kin),
        rel_(&rel),
        eps_(eps),
        D_(D),
        pf_(domain, rel.w_star()) {
    if (!(eps > 0.0)) throw DomainParameterError("eps must be positive");
    if (!(D > 0.0)) throw DomainParameterError("D must be positive");
  }

  const ConformalDomain& domain() const { return *dom_; }
  const ReactionKinetics& kinetics() const { return *kin_; }
  const MassRelation& mass_relation() const { return *rel_; }
  const PotentialField& potential_field() const { return pf_; }
  double eps() const { return eps_; }
  double diffusivity() const { return D_; }

  /// dw/dt on the O(1) scale; front-based kappa with a memoized cache.
  /// Widths outside the feasible band (v0 would leave the bistable range)
  /// saturate to a restoring value so adaptive trial steps can recover.
  double fast_rhs(const PulseState& st) const {
    double v0;
    try {
      v0 = rel_->v0_of_w(st.w);
    } catch (const MassInfeasibleError&) {
      const double span = kin_->v_max() - kin_->v_min();
      const double v_edge = st.w > rel_->w_star()
                                ? kin_->v_min() + 1e-3 * span
                                : kin_->v_max() - 1e-3 * span;
      return kin_->mass_imbalance(v_edge) / kin_->kappa_star();
    }
    return kin_->mass_imbalance(v0) / kappa_cached(v0);
  }

  /// ds0/dt on the eps^-2 scale, with w pinned at w*.
  double slow_rhs(const PulseState& st) const {
    if (kin_->j_prime_star() < 0.0)
      throw Error(
          "slow dynamics undefined: J'(v*) < 0, pinned half-width unstable");
    const double coef = eps_ * eps_ * kin_->delta_h(kin_->v_star()) *
                        kin_->j_prime_star() /
                        (4.0 * kin_->kappa_star() * D_);
    return -coef * potential_derivative(pf_, st.s0, 1);
  }

  /// Drift-speed prefactor multiplying -E'(s0).
  double slow_coefficient() const {
    return eps_ * eps_ * kin_->delta_h(kin_->v_star()) *
           kin_->j_prime_star() / (4.0 * kin_->kappa_star() * D_);
  }

  ReducedTrajectory integrate(PulseState st, double t_end, ReducedMode mode,
                              double tol = 1e-8) const {
    if (!(t_end > 0.0)) throw DomainParameterError("t_end must be positive");
    const double L = dom_->perimeter();
    ReducedTrajectory traj;
    st.s0 = wrap(st.s0, L);
    traj.samples.push_back(st);

    auto run_fast = [&](double t0, double t1, bool stop_at_handoff) {
      std::vector<double> y{st.w};
      double t_stop = t1;
      num::integrate_ode(
          [&](double /*t*/, const std::vector<double>& yy,
              std::vector<double>& dy) {
            dy[0] = fast_rhs({st.s0, yy[0], 0.0});
          },
          y, t0, t1, tol,
          [&](double t, const std::vector<double>& yy) {
            st.w = yy[0];
            st.t = t;
            traj.samples.push_back(st);
            if (stop_at_handoff &&
                std::abs(fast_rhs({st.s0, yy[0], 0.0})) < 1e-8) {
              t_stop = t;
              return false;
            }
            return true;
          });
      return t_stop;
    };

    auto run_slow = [&](double t0, double t1) {
      std::vector<double> y{st.s0};
      num::integrate_ode(
          [&](double /*t*/, const std::vector<double>& yy,
              std::vector<double>& dy) {
            dy[0] = slow_rhs({wrap(yy[0], L), st.w, 0.0});
          },
          y, t0, t1, tol,
          [&](double t, const std::vector<double>& yy) {
            st.s0 = wrap(yy[0], L);
            st.t = t;
            traj.samples.push_back(st);
            return true;
          });
    };

    switch (mode) {
      case ReducedMode::Fast:
        run_fast(st.t, st.t + t_end, false);
        break;
      case ReducedMode::Slow:
        st.w = rel_->w_star();
        run_slow(st.t, st.t + t_end);
        break;
      case ReducedMode::Composite: {
        const double t0 = st.t;
        const double t_handoff = run_fast(t0, t0 + t_end, true);
        traj.fast_duration = t_handoff - t0;
        st.w = rel_->w_star();  // analytic pinned value, not the numeric limit
        if (t_handoff < t0 + t_end) run_slow(t_handoff, t0 + t_end);
        break;
      }
    }
    return traj;
  }

  /// Equilibria of the slow dynamics: critical points of E(.; w*).
  /// Stable iff E'' > 0 under the gradient flow (requires J'(v*) > 0).
  std::vector<PulseEquilibrium> pulse_equilibria(int grid_n = 512) const {
    if (kin_->j_prime_star() == 0.0)
      throw Error("pulse_equilibria: J'(v*) = 0");
    const Landscape land = critical_points(pf_, grid_n);
    std::vector<PulseEquilibrium> out;
    if (land.flat) {
      PulseEquilibrium eq;
      eq.w = rel_->w_star();
      eq.degenerate = true;  // every position neutrally stationary
      out.push_back(eq);
      return out;
    }
    for (const auto& cp : land.points) {
      PulseEquilibrium eq;
      eq.s0 = cp.s0;
      eq.w = rel_->w_star();
      eq.E_second = cp.E_second;
      eq.degenerate = (cp.kind == CriticalPoint::Kind::Degenerate);
      eq.stable = (cp.kind == CriticalPoint::Kind::Min) &&
                  (kin_->j_prime_star() > 0.0);
      out.push_back(eq);
    }
    return out;
  }

 private:
  static double wrap(double s, double L) {
    double r = std::fmod(s, L);
    if (r < 0.0) r += L;
    return r;
  }

  double kappa_cached(double v0) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto hi = kappa_cache_.lower_bound(v0);
    if (hi != kappa_cache_.end() && hi != kappa_cache_.begin()) {
      auto lo = std::prev(hi);
      if (hi->first - lo->first < 1e-6) {  // linear interpolation on the cache
        const double t = (v0 - lo->first) / (hi->first - lo->first);
        return lo->second + t * (hi->second - lo->second);
      }
    }
    if (hi != kappa_cache_.end() && hi->first - v0 < 1e-12) return hi->second;
    const double grid = 5e-7;  // cache on a grid finer than the tolerance
    const double vg = grid * std::round(v0 / grid);
    auto it = kappa_cache_.find(vg);
    if (it != kappa_cache_.end()) return it->second;
    const double kap = kin_->front(vg).kappa;
    kappa_cache_.emplace(vg, kap);
    return kap;
  }

  const ConformalDomain* dom_;
  const ReactionKinetics* kin_;
  const MassRelation* rel_;
  double eps_, D_;
  PotentialField pf_;
  mutable std::map<double, double> kappa_cache_;
  mutable std::mutex cache_mutex_;
};

}  // namespace bspulse
