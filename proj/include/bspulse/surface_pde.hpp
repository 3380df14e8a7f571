#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include "bspulse/errors.hpp"
#include "bspulse/geometry.hpp"
#include "bspulse/greens.hpp"
#include "bspulse/kinetics.hpp"
#include "bspulse/numerics.hpp"
#include "bspulse/reduced.hpp"

// Quasi-stationary surface validator: evolves the boundary concentration u
// under
//
//   eps u_t = eps^2 u_ss + f(u, v|_Gamma),
//
// with the bulk trace reconstructed through the Neumann Green's kernel,
//
//   v|_Gamma = v_bar + (eps^2/D) int G_Gamma(s, s') u_ss(s') ds',
//   v_bar    = (M - int u ds) / |Omega|,
//
// on a uniform periodic arc-length grid. Diffusion is implicit in Fourier
// space, the reaction explicit (IMEX); the log singularity of the kernel is
// handled by exact cell integration near the diagonal.

namespace bspulse {

namespace detail {
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

struct NonlocalKernel {
  int N = 0;
  double ds = 0.0;
  double perimeter = 0.0;
  double area = 0.0;
  std::vector<double> K;  // row-major N x N, cell-averaged near the diagonal

  double at(int i, int j) const { return K[static_cast<std::size_t>(i) * N + j]; }
};

/// Assemble the boundary Green's kernel on N uniform arc-length nodes.
/// Off-diagonal entries come from the conformal closed forms; entries within
/// two cells of the diagonal replace the log factor by its exact cell
/// average, plus the smooth remainder (log rho limit on the diagonal).
inline NonlocalKernel build_kernel(const ConformalDomain& dom, int N) {
  if (N < 128 || (N & (N - 1)) != 0)
    throw ResolutionError("build_kernel: N must be a power of two >= 128");
  NonlocalKernel ker;
  ker.N = N;
  ker.perimeter = dom.perimeter();
  ker.area = dom.area();
  ker.ds = ker.perimeter / N;
  ker.K.assign(static_cast<std::size_t>(N) * N, 0.0);

  const bool simply = dom.simply_connected();
  const double a = simply ? 0.0 : dom.annulus_inner();

  std::vector<double> theta(N);
  for (int i = 0; i < N; ++i) theta[i] = dom.theta_of(ker.ds * i);

  // annulus correction series, smooth in the preimage angle gap
  auto series = [&](double d) {
    if (simply) return 0.0;
    const double a2 = a * a;
    double a2m = 1.0;
    double sum = 0.0;
    for (int m = 1; m < 100000; ++m) {
      a2m *= a2;
      sum += std::log(1.0 - 2.0 * a2m * std::cos(d) + a2m * a2m);
      if (4.0 * a2m / ((1.0 - a2m) * (1.0 - a2m)) < 1e-14) break;
    }
    return -sum / num::kPi;
  };

  auto closed = [&](int i, int j) {
    const double d = theta[i] - theta[j];
    const double chord = 2.0 * std::abs(std::sin(0.5 * d));
    return -std::log(chord) / num::kPi + 1.0 / (8.0 * num::kPi) + series(d);
  };

  // cell averages of -(1/pi) log|x| over cells m = 0, 1, 2 away
  auto log_avg = [&](int m) {
    if (m == 0) return -(std::log(0.5 * ker.ds) - 1.0) / num::kPi;
    const double lo = (m - 0.5) * ker.ds;
    const double hi = (m + 0.5) * ker.ds;
    return -((hi * std::log(hi) - hi) - (lo * std::log(lo) - lo)) /
           (num::kPi * ker.ds);
  };

  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      const int m = std::min(j - i, N - (j - i));
      double val;
      if (m > 2) {
        val = closed(i, j);
      } else if (m == 0) {
        // smooth remainder at the diagonal: chord/arc ratio tends to rho
        val = log_avg(0) + std::log(dom.metric(theta[i])) / num::kPi +
              1.0 / (8.0 * num::kPi) + series(0.0);
      } else {
        const double arc = m * ker.ds;
        const double remainder = closed(i, j) + std::log(arc) / num::kPi;
        val = log_avg(m) + remainder;
      }
      ker.K[static_cast<std::size_t>(i) * N + j] = val;
      ker.K[static_cast<std::size_t>(j) * N + i] = val;
    }
  }
  return ker;
}

struct PdeConfig {
  double eps2 = 1e-3;  // interface parameter squared
  double D = 1.0;      // bulk diffusivity
  int N = 512;
  double dt = 0.0;  // 0: derive from the stability bound
  double total_mass = 0.0;
  double sample_dt = 1.0;
  bool include_ut_term = false;  // lagged O(eps^3) u_t correction
};

struct PulseExtract {
  double s1 = 0.0, s2 = 0.0, s0 = 0.0, w = 0.0;
};

class SurfaceSimulator {
 public:
  SurfaceSimulator(const ConformalDomain& dom, const ReactionKinetics& kin,
                   const PdeConfig& cfg)
      : dom_(&dom),
        kin_(&kin),
        cfg_(cfg),
        ker_(build_kernel(dom, cfg.N)),
        N_(cfg.N),
        ds_(ker_.ds),
        eps_(std::sqrt(cfg.eps2)),
        u_(cfg.N, 0.0),
        uss_(cfg.N, 0.0),
        v_trace_(cfg.N, 0.0),
        u_prev_(cfg.N, 0.0) {
    if (!(cfg.eps2 > 0.0)) throw DomainParameterError("eps2 must be positive");
    if (!(cfg.D > 0.0)) throw DomainParameterError("D must be positive");

    // blow-up guard and explicit-reaction stability bound
    // stay far enough inside the bistable range that the three branches are
    // still resolvable; the +-1 margin below makes the exact offset moot
    const double dv = 1e-3 * (kin.v_max() - kin.v_min());
    const auto blo = kin.equilibrium_branches(kin.v_min() + dv);
    const auto bhi = kin.equilibrium_branches(kin.v_max() - dv);
    guard_lo_ = blo[0] - 1.0;
    guard_hi_ = bhi[2] + 1.0;
    double fu_max = 0.0;
    for (int iu = 0; iu <= 64; ++iu)
      for (int iv = 0; iv <= 16; ++iv) {
        const double uu = guard_lo_ + (guard_hi_ - guard_lo_) * iu / 64.0;
        const double vv =
            kin.v_min() + (kin.v_max() - kin.v_min()) * iv / 16.0;
        fu_max = std::max(fu_max, std::abs(kin.f_u(uu, vv)));
      }
    dt_ = cfg.dt > 0.0 ? cfg.dt
                       : std::min(0.2 * ds_ * ds_ / eps_,
                                  0.1 * eps_ / fu_max);

    {
      std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
      real_ = fftw_alloc_real(N_);
      spec_ = fftw_alloc_complex(N_ / 2 + 1);
      fwd_ = fftw_plan_dft_r2c_1d(N_, real_, spec_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_1d(N_, spec_, real_, FFTW_ESTIMATE);
    }
    qsq_.resize(N_ / 2 + 1);
    for (int n = 0; n <= N_ / 2; ++n) {
      const double q = 2.0 * num::kPi * n / ker_.perimeter;
      qsq_[n] = q * q;
    }
  }

  ~SurfaceSimulator() {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  SurfaceSimulator(const SurfaceSimulator&) = delete;
  SurfaceSimulator& operator=(const SurfaceSimulator&) = delete;

  /// tanh pulse of half-width w centered at s0, riding between the branches
  /// of the mass-consistent bulk level.
  /// Tanh pulse between the outer branches; interface_delta <= 0 selects the
  /// physical front width 2 eps.
  void set_pulse_initial(double s0, double w, double interface_delta = 0.0) {
    const double vs = kin_->v_star();
    const auto b = kin_->equilibrium_branches(vs);
    const double delta = interface_delta > 0.0 ? interface_delta : 2.0 * eps_;
    const double L = ker_.perimeter;
    for (int i = 0; i < N_; ++i) {
      double d = std::fmod(ds_ * i - s0, L);
      if (d < -0.5 * L) d += L;
      if (d > 0.5 * L) d -= L;
      u_[i] = b[0] + (b[2] - b[0]) * 0.5 *
                         (std::tanh((w - std::abs(d)) / delta) + 1.0);
    }
    t_ = 0.0;
    have_prev_ = false;
    refresh_trace();
  }

  void set_uniform_initial(double u0) {
    std::fill(u_.begin(), u_.end(), u0);
    t_ = 0.0;
    have_prev_ = false;
    refresh_trace();
  }

  void step() {
    u_prev_swap_ = u_;
    for (int i = 0; i < N_; ++i)
      real_[i] = u_[i] + dt_ * kin_->f(u_[i], v_trace_[i]) / eps_;
    fftw_execute(fwd_);
    for (int n = 0; n <= N_ / 2; ++n) {
      const double denom = 1.0 + dt_ * eps_ * qsq_[n];
      spec_[n][0] /= denom;
      spec_[n][1] /= denom;
    }
    fftw_execute(bwd_);
    for (int i = 0; i < N_; ++i) {
      u_[i] = real_[i] / N_;
      if (!(u_[i] > guard_lo_ && u_[i] < guard_hi_))
        throw DivergenceError(
            "surface field left the guard band at t=" + std::to_string(t_) +
            ", node " + std::to_string(i) + ", u=" + std::to_string(u_[i]));
    }
    u_prev_ = std::move(u_prev_swap_);
    have_prev_ = true;
    t_ += dt_;
    refresh_trace();
  }

  void run_until(double t_target) {
    while (t_ < t_target - 0.5 * dt_) step();
  }

  /// Sub-grid interface positions from the two mid-level crossings.
  PulseExtract extract_pulse() const {
    const auto b = kin_->equilibrium_branches(v_bar_);
    const double mid = 0.5 * (b[0] + b[2]);
    const double L = ker_.perimeter;
    double s_up = -1.0, s_down = -1.0;
    int ups = 0, downs = 0;
    for (int i = 0; i < N_; ++i) {
      const int j = (i + 1) % N_;
      const double fi = u_[i] - mid;
      const double fj = u_[j] - mid;
      if (fi == 0.0 || fi * fj >= 0.0) continue;
      const double s = ds_ * i + ds_ * fi / (fi - fj);
      if (fj > fi) {
        s_up = s;
        ++ups;
      } else {
        s_down = s;
        ++downs;
      }
    }
    if (ups != 1 || downs != 1)
      throw NotASinglePulseError("expected one rising and one falling "
                                 "mid-level crossing, found " +
                                 std::to_string(ups) + "/" +
                                 std::to_string(downs));
    PulseExtract px;
    px.s1 = s_up;
    px.s2 = s_down;
    double gap = s_down - s_up;
    if (gap < 0.0) gap += L;
    px.w = 0.5 * gap;
    px.s0 = std::fmod(s_up + px.w, L);
    return px;
  }

  double time() const { return t_; }
  double dt() const { return dt_; }
  double v_bar() const { return v_bar_; }
  double total_mass_now() const {
    double su = 0.0;
    for (double x : u_) su += x;
    return su * ds_ + ker_.area * v_bar_;
  }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v_trace() const { return v_trace_; }
  const NonlocalKernel& kernel() const { return ker_; }
  double node(int i) const { return ds_ * i; }

  /// Recompute (u_ss, v_bar, v_trace) from the current u.
  void refresh_trace() {
    // spectral second derivative
    for (int i = 0; i < N_; ++i) real_[i] = u_[i];
    fftw_execute(fwd_);
    for (int n = 0; n <= N_ / 2; ++n) {
      spec_[n][0] *= -qsq_[n];
      spec_[n][1] *= -qsq_[n];
    }
    fftw_execute(bwd_);
    for (int i = 0; i < N_; ++i) uss_[i] = real_[i] / N_;

    double su = 0.0;
    for (double x : u_) su += x;
    v_bar_ = (cfg_.total_mass - su * ds_) / ker_.area;

    const double pref = cfg_.eps2 / cfg_.D * ds_;
    const double* K = ker_.K.data();
    for (int i = 0; i < N_; ++i) {
      const double* row = K + static_cast<std::size_t>(i) * N_;
      double acc = 0.0;
      for (int j = 0; j < N_; ++j) acc += row[j] * uss_[j];
      v_trace_[i] = v_bar_ + pref * acc;
    }
    if (cfg_.include_ut_term && have_prev_) {
      const double pref3 = cfg_.eps2 * eps_ / cfg_.D * ds_;
      std::vector<double> ut(N_);
      for (int i = 0; i < N_; ++i) ut[i] = (u_[i] - u_prev_[i]) / dt_;
      for (int i = 0; i < N_; ++i) {
        const double* row = K + static_cast<std::size_t>(i) * N_;
        double acc = 0.0;
        for (int j = 0; j < N_; ++j) acc += row[j] * ut[j];
        v_trace_[i] -= pref3 * acc;
      }
    }
  }

 private:
  const ConformalDomain* dom_;
  const ReactionKinetics* kin_;
  PdeConfig cfg_;
  NonlocalKernel ker_;
  int N_;
  double ds_, eps_, dt_ = 0.0, t_ = 0.0;
  double guard_lo_ = 0.0, guard_hi_ = 0.0;
  double v_bar_ = 0.0;
  std::vector<double> u_, uss_, v_trace_, u_prev_, u_prev_swap_;
  bool have_prev_ = false;

  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan fwd_{}, bwd_{};

  std::vector<double> qsq_;
};

struct DriftSample {
  double t = 0.0;
  double s0_pde = 0.0;
  double s0_ode = 0.0;
  double residual = 0.0;
  double w_pde = 0.0;
  double v_bar = 0.0;
};

struct DriftReport {
  std::vector<DriftSample> samples;
  double fitted_speed = 0.0;   // least-squares slope over the fit window
  double ode_speed = 0.0;      // slow_rhs at the window-mean position
  double speed_ratio = 0.0;    // fitted / ode
  double window_t0 = 0.0, window_t1 = 0.0;
  double final_s0 = 0.0;
  double final_w = 0.0;
  bool sign_consistent = false;
};

/// Run the validator and compare the extracted drift against the slow ODE.
inline DriftReport run_and_compare(const ConformalDomain& dom,
                                   const ReactionKinetics& kin,
                                   const PdeConfig& cfg, double t_end,
                                   double s0_init, double w_init) {
  if (cfg.eps2 > 0.01)
    throw DomainParameterError("run_and_compare requires eps2 <= 0.01");
  if (cfg.N < 512)
    throw ResolutionError("run_and_compare requires N >= 512");

  const MassRelation rel(kin, dom.perimeter(), dom.area(), cfg.total_mass);
  const ReducedModel model(dom, kin, rel, std::sqrt(cfg.eps2), cfg.D);
  const double L = dom.perimeter();

  SurfaceSimulator sim(dom, kin, cfg);
  sim.set_pulse_initial(s0_init, w_init);

  DriftReport rep;
  double ode_s0 = s0_init;
  double t_ode = 0.0;
  double unwrapped = s0_init;
  double last_raw = s0_init;

  auto record = [&](double t) {
    const PulseExtract px = sim.extract_pulse();
    double d = px.s0 - last_raw;
    if (d > 0.5 * L) d -= L;
    if (d < -0.5 * L) d += L;
    unwrapped += d;
    last_raw = px.s0;
    double res = px.s0 - ode_s0;
    if (res > 0.5 * L) res -= L;
    if (res < -0.5 * L) res += L;
    rep.samples.push_back({t, px.s0, ode_s0, res, px.w, sim.v_bar()});
  };

  record(0.0);
  std::vector<double> fit_t, fit_s;
  const double t_fit0 = 0.25 * t_end;
  for (double t = cfg.sample_dt; t <= t_end + 1e-9; t += cfg.sample_dt) {
    sim.run_until(t);
    // advance the slow ODE to the same time
    std::vector<double> y{ode_s0};
    num::integrate_ode(
        [&](double, const std::vector<double>& yy, std::vector<double>& dy) {
          dy[0] = model.slow_rhs({std::fmod(yy[0] + L, L), rel.w_star(), 0.0});
        },
        y, t_ode, t, 1e-10);
    ode_s0 = std::fmod(y[0] + L, L);
    t_ode = t;
    record(sim.time());
    if (t >= t_fit0) {
      fit_t.push_back(sim.time());
      fit_s.push_back(unwrapped);
    }
  }

  // least-squares drift over the fit window
  const std::size_t n = fit_t.size();
  double mt = 0.0, ms = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += fit_t[i];
    ms += fit_s[i];
  }
  mt /= n;
  ms /= n;
  double num_acc = 0.0, den_acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num_acc += (fit_t[i] - mt) * (fit_s[i] - ms);
    den_acc += (fit_t[i] - mt) * (fit_t[i] - mt);
  }
  rep.fitted_speed = num_acc / den_acc;
  rep.window_t0 = fit_t.front();
  rep.window_t1 = fit_t.back();

  double s_mean = std::fmod(ms + L, L);
  rep.ode_speed = model.slow_rhs({s_mean, rel.w_star(), 0.0});
  rep.speed_ratio = rep.ode_speed != 0.0 ? rep.fitted_speed / rep.ode_speed
                                         : 0.0;
  const double noise = 1e-6 * L;
  rep.sign_consistent = (std::abs(rep.fitted_speed) < noise &&
                         std::abs(rep.ode_speed) < noise) ||
                        rep.fitted_speed * rep.ode_speed > 0.0;
  rep.final_s0 = rep.samples.back().s0_pde;
  rep.final_w = rep.samples.back().w_pde;
  return rep;
}

}  // namespace bspulse
