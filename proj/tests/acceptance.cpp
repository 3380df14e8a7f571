// Acceptance gate: one numbered criterion per invocation (or all, with no
// argument), one PASS/FAIL line each, pinned tolerances. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bspulse/bifurcation.hpp"
#include "bspulse/geometry.hpp"
#include "bspulse/greens.hpp"
#include "bspulse/kinetics.hpp"
#include "bspulse/reduced.hpp"
#include "bspulse/surface_pde.hpp"

using namespace bspulse;

namespace {

struct Criterion {
  int failed = 0;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) ++failed;
    detail += std::string("\n  - ") + (ok ? "ok  " : "FAIL") + ": " + what;
  }
};

std::string num_str(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

const ReactionKinetics& hill() {
  static const ReactionKinetics kin = ReactionKinetics::hill();
  return kin;
}

// --- criteria --------------------------------------------------------------

Criterion criterion1() {
  Criterion c;
  const double ks = dumbbell_k_star();
  c.check(std::abs(ks - 0.1480) <= 0.0005,
          "k* = " + num_str(ks) + " within 0.1480 +- 0.0005");
  c.check(std::abs(dumbbell_g(dumbbell_mu(ks))) <= 1e-8,
          "g(mu(k*)) = " + num_str(dumbbell_g(dumbbell_mu(ks))) +
              " vanishes to 1e-8");
  return c;
}

Criterion criterion2() {
  Criterion c;
  const double kb = dumbbell_k_b(0.7);
  c.check(std::abs(kb - 0.181) <= 0.005,
          "k_b(0.7) = " + num_str(kb) + " within 0.181 +- 0.005");
  return c;
}

Criterion criterion3() {
  Criterion c;
  const double cb = hole_c_b(0.1, 0.5);
  c.check(std::abs(cb - 0.58) <= 0.01,
          "c_b(0.1, 0.5) = " + num_str(cb) + " within 0.58 +- 0.01");
  return c;
}

bool regimes_match(const RegimeReport& rep, const ConformalDomain& dom,
                   double w, std::string& why) {
  const PotentialField pf(dom, w);
  const Landscape land = critical_points(pf, 1024);
  if (land.flat) {
    why = "numeric landscape unexpectedly flat";
    return false;
  }
  if (land.points.size() != rep.points.size()) {
    why = "count mismatch: closed-form " + std::to_string(rep.points.size()) +
          " vs numeric " + std::to_string(land.points.size());
    return false;
  }
  for (const auto& cp : rep.points) {
    bool matched = false;
    for (const auto& np : land.points) {
      const double d = std::abs(np.s0 - cp.s0);
      if (d < 1e-6 || std::abs(d - dom.perimeter()) < 1e-6) {
        if (np.kind != cp.kind) {
          why = "kind mismatch at s0 = " + num_str(cp.s0);
          return false;
        }
        matched = true;
      }
    }
    if (!matched) {
      why = "no numeric partner for s0 = " + num_str(cp.s0);
      return false;
    }
  }
  return true;
}

Criterion criterion4() {
  Criterion c;
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double ks = dumbbell_k_star();

  int done = 0;
  while (done < 20) {
    const double k = 0.05 + 0.85 * unit(rng);
    const double w = 0.15 + 1.05 * unit(rng);
    if (std::abs(k - ks) < 0.01) continue;
    if (k > ks && std::abs(w - dumbbell_w_b(k)) < 0.05) continue;
    const auto rep = dumbbell_regime(k, w);
    std::string why;
    const bool ok =
        regimes_match(rep, ConformalDomain::dumbbell(k), w, why);
    if (!ok)
      c.check(false, "dumbbell k=" + num_str(k) + " w=" + num_str(w) + ": " +
                         why);
    ++done;
  }
  c.check(true, "20 random dumbbell samples matched");

  done = 0;
  while (done < 20) {
    const double r = 0.05 + 0.25 * unit(rng);
    const double cc = 0.05 + (0.9 * (1.0 - r) - 0.05) * unit(rng);
    const double w = 0.2 + 1.2 * unit(rng);
    const auto rep = hole_regime(cc, r, w);
    if (std::abs(rep.b0 - 1.0) < 0.05) continue;
    std::string why;
    const bool ok =
        regimes_match(rep, ConformalDomain::perforated_disk(cc, r), w, why);
    if (!ok)
      c.check(false, "hole c=" + num_str(cc) + " r=" + num_str(r) + " w=" +
                         num_str(w) + ": " + why);
    ++done;
  }
  c.check(true, "20 random hole samples matched");
  return c;
}

Criterion criterion5() {
  Criterion c;
  const double ks = dumbbell_k_star();
  const double wb_near = dumbbell_w_b(ks + 1e-3);
  c.check(wb_near < 0.02,
          "w_b(k* + 1e-3) = " + num_str(wb_near) + " < 0.02");
  const double L = ConformalDomain::dumbbell(0.999).perimeter();
  const double frac = dumbbell_w_b(0.999) / L;
  c.check(std::abs(frac - 0.25) <= 0.01,
          "w_b(0.999)/L = " + num_str(frac) + " within 0.25 +- 0.01");
  return c;
}

Criterion criterion6() {
  Criterion c;
  // (a) flat disk potential
  {
    const auto dom = ConformalDomain::disk();
    const PotentialField pf(dom, 0.7);
    double spread = 0.0;
    const double e0 = potential(pf, 0.0);
    for (int i = 1; i < 128; ++i)
      spread = std::max(
          spread, std::abs(potential(pf, dom.perimeter() * i / 128.0) - e0));
    c.check(spread < 1e-10, "disk E constant, spread = " + num_str(spread));
  }
  // (b) dumbbell closed form vs generic evaluation
  {
    const auto dom = ConformalDomain::dumbbell(0.44);
    const PotentialField pf(dom, 0.7);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double s0 = dom.perimeter() * (i + 0.13) / 64.0;
      worst = std::max(worst,
                       std::abs(potential(pf, s0) - potential_generic(pf, s0)));
    }
    c.check(worst < 1e-10,
            "closed form vs generic, worst = " + num_str(worst));
  }
  // (c) analytic E' against finite differences
  {
    double worst = 0.0;
    const auto db = ConformalDomain::dumbbell(0.44);
    const auto pd = ConformalDomain::perforated_disk(0.4, 0.15);
    for (const ConformalDomain* dom : {&db, &pd}) {
      const PotentialField pf(*dom, 0.7);
      for (int i = 0; i < 16; ++i) {
        const double s0 = dom->perimeter() * (i + 0.21) / 16.0;
        const double fd = num::deriv4(
            [&](double s) { return potential(pf, s); }, s0, 1e-3);
        worst = std::max(worst,
                         std::abs(potential_derivative(pf, s0, 1) - fd));
      }
    }
    c.check(worst < 1e-6, "analytic E' vs FD, worst = " + num_str(worst));
  }
  // (d) trivial critical points
  {
    const auto dom = ConformalDomain::dumbbell(0.44);
    const PotentialField pf(dom, 0.7);
    const double e_axis = std::abs(potential_derivative(pf, 0.0, 1));
    const double e_quarter =
        std::abs(potential_derivative(pf, 0.25 * dom.perimeter(), 1));
    c.check(e_axis < 1e-9 && e_quarter < 1e-9,
            "E'(0), E'(L/4) = " + num_str(e_axis) + ", " + num_str(e_quarter));
  }
  return c;
}

Criterion criterion7() {
  Criterion c;
  const auto dom = ConformalDomain::dumbbell(0.3);
  const double s0 = 0.7;
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  std::string seq;
  for (double w : {0.1, 0.05, 0.025}) {
    const PotentialField pf(dom, w);
    const double err =
        std::abs(potential(pf, s0) - small_w_expansion(dom, s0, w)) / (w * w);
    if (err >= prev) monotone = false;
    seq += num_str(err) + " ";
    prev = err;
  }
  c.check(monotone, "|E - expansion| / w^2 decreasing: " + seq);
  return c;
}

Criterion criterion8() {
  Criterion c;
  const double vs = hill().v_star();
  const auto b = hill().equilibrium_branches(vs);
  auto Phi = [&](double u) {
    return num::integrate([&](double x) { return hill().f(x, vs); }, b[0], u,
                          1e-13);
  };
  const double Phi_hp = Phi(b[2]);
  const double kappa_quad = num::integrate(
      [&](double u) {
        return std::sqrt(std::max(2.0 * (Phi_hp - Phi(u)), 0.0));
      },
      b[0], b[2], 1e-11);
  const double rel =
      std::abs(hill().kappa_star() - kappa_quad) / kappa_quad;
  c.check(rel < 1e-5, "kappa(v*) shooting vs quadrature, rel = " +
                          num_str(rel));

  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double v =
        hill().v_min() + (hill().v_max() - hill().v_min()) * (i + 0.5) / 10.5;
    if (std::abs(v - vs) < 5e-3) continue;
    const auto fr = hill().front(v);
    const double J = hill().mass_imbalance(v);
    worst = std::max(worst, std::abs(fr.speed * fr.kappa + J) / std::abs(J));
  }
  c.check(worst < 1e-5,
          "|c kappa + J| / |J| at off-pinning v, worst = " + num_str(worst));
  return c;
}

Criterion criterion9() {
  Criterion c;
  const ConformalDomain dom = ConformalDomain::dumbbell(0.44);
  const double M = MassRelation::mass_for_width(hill(), dom.perimeter(),
                                                dom.area(), 0.7);
  const MassRelation rel(hill(), dom.perimeter(), dom.area(), M);
  const ReducedModel model(dom, hill(), rel, 0.1, 1.0);
  const auto traj =
      model.integrate({1.0, 0.4 * 0.7, 0.0}, 40.0, ReducedMode::Fast);
  bool monotone = true;
  for (std::size_t i = 1; i < traj.samples.size(); ++i)
    if (traj.samples[i].w < traj.samples[i - 1].w - 1e-12) monotone = false;
  c.check(monotone, "w(t) monotone toward w*");
  c.check(std::abs(traj.samples.back().w - 0.7) < 1e-4,
          "w(40) = " + num_str(traj.samples.back().w) + " near w* = 0.7");
  const double lambda = rel.stability_eigenvalue();
  c.check(lambda < 0.0,
          "lambda = J'(v*) v0'(w*) / kappa* = " + num_str(lambda) + " < 0");
  return c;
}

Criterion criterion10() {
  Criterion c;
  struct Run {
    const ConformalDomain& dom;
    const ReducedModel& model;
    double s0;
  };
  const ConformalDomain db = ConformalDomain::dumbbell(0.44);
  const MassRelation rel_db(
      hill(), db.perimeter(), db.area(),
      MassRelation::mass_for_width(hill(), db.perimeter(), db.area(), 0.7));
  const ReducedModel model_db(db, hill(), rel_db, std::sqrt(0.02), 1.0);

  const ConformalDomain pd = ConformalDomain::perforated_disk(0.8, 0.1);
  const MassRelation rel_pd(
      hill(), pd.perimeter(), pd.area(),
      MassRelation::mass_for_width(hill(), pd.perimeter(), pd.area(), 0.5));
  const ReducedModel model_pd(pd, hill(), rel_pd, std::sqrt(0.02), 1.0);

  const std::vector<Run> runs = {
      {db, model_db, 0.3},  {db, model_db, 1.0}, {db, model_db, 2.2},
      {db, model_db, 3.5},  {pd, model_pd, 0.3}, {pd, model_pd, 1.0},
  };
  for (const auto& run : runs) {
    const auto traj =
        run.model.integrate({run.s0, 0.0, 0.0}, 4000.0, ReducedMode::Slow);
    const auto& pf = run.model.potential_field();
    bool lyapunov = true;
    double prev_e = potential(pf, traj.samples.front().s0);
    for (const auto& st : traj.samples) {
      const double e = potential(pf, st.s0);
      if (e > prev_e + 1e-10) lyapunov = false;
      prev_e = e;
    }
    const double s_final = traj.samples.back().s0;
    double best = 1e9;
    for (const auto& eq : run.model.pulse_equilibria())
      if (eq.stable) {
        double d = std::abs(s_final - eq.s0);
        d = std::min(d, run.dom.perimeter() - d);
        best = std::min(best, d);
      }
    c.check(lyapunov, "E non-increasing from s0 = " + num_str(run.s0));
    c.check(best < 1e-3, "terminates at a stable equilibrium (dist = " +
                             num_str(best) + ") from s0 = " +
                             num_str(run.s0));
  }
  return c;
}

struct PdeOutcome {
  DriftReport rep;
  std::string error;
};

Criterion criterion11() {
  Criterion c;
  const ConformalDomain db = ConformalDomain::dumbbell(0.44);
  const double M_db = MassRelation::mass_for_width(hill(), db.perimeter(),
                                                   db.area(), 0.7);
  const ConformalDomain pd4 = ConformalDomain::perforated_disk(0.4, 0.1);
  const ConformalDomain pd8 = ConformalDomain::perforated_disk(0.8, 0.1);
  const double M_pd = MassRelation::mass_for_width(hill(), pd4.perimeter(),
                                                   pd4.area(), 0.5);

  struct Job {
    const ConformalDomain* dom;
    double eps2, M, t_end, s0, w0;
    int N;
    PdeOutcome out;
  };
  std::vector<Job> jobs = {
      {&db, 1e-3, M_db, 150.0, 1.0, 0.7, 512, {}},       // base (11a, 11b)
      {&db, 0.25e-3, M_db, 150.0, 1.0, 0.7, 1024, {}},   // half eps (11c)
      {&db, 1e-3, M_db, 2000.0, 0.5, 0.7, 512, {}},      // bistable left
      {&db, 1e-3, M_db, 1300.0, 0.8, 0.7, 512, {}},      // bistable right
      {&pd4, 1e-3, M_pd, 900.0, 0.3, 0.5, 512, {}},      // hole c = 0.4
      {&pd8, 1e-3, M_pd, 900.0, 0.3, 0.5, 512, {}},      // hole c = 0.8
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& jb = jobs[i];
      try {
        PdeConfig cfg;
        cfg.eps2 = jb.eps2;
        cfg.N = jb.N;
        cfg.total_mass = jb.M;
        cfg.sample_dt = 1.0;
        jb.out.rep = run_and_compare(*jb.dom, hill(), cfg, jb.t_end, jb.s0,
                                     jb.w0);
      } catch (const std::exception& e) {
        jb.out.error = e.what();
      }
    }
  };
  const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<unsigned>(hw, jobs.size()); ++t)
    pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (const auto& jb : jobs)
    if (!jb.out.error.empty()) {
      c.check(false, "run failed: " + jb.out.error);
      return c;
    }

  const DriftReport& base = jobs[0].out.rep;
  const DriftReport& half = jobs[1].out.rep;

  // (a) long-time width
  c.check(std::abs(base.final_w - 0.7) < 0.05 * 0.7,
          "(a) final w = " + num_str(base.final_w) + " within 5% of 0.7");

  // (b) drift opposes the potential gradient throughout the window
  {
    const PotentialField pf(db, 0.7);
    const double L = db.perimeter();
    bool sign_ok = true;
    const auto& ss = base.samples;
    for (std::size_t i = 10; i + 10 < ss.size(); i += 10) {
      if (ss[i].t < 30.0) continue;
      double delta = ss[i + 10].s0_pde - ss[i - 10].s0_pde;
      if (delta > 0.5 * L) delta -= L;
      if (delta < -0.5 * L) delta += L;
      const double e1 = potential_derivative(pf, ss[i].s0_pde, 1);
      if (std::abs(delta) < 1e-4 || std::abs(e1) < 1e-3) continue;
      if (delta * e1 >= 0.0) sign_ok = false;
    }
    c.check(sign_ok && base.sign_consistent,
            "(b) sign(ds0/dt) = -sign(E') on the metastable window");
  }

  // (c) eps scaling of the fitted drift speed
  {
    const double ratio = base.fitted_speed / half.fitted_speed;
    c.check(ratio > 4.0 * 0.7 && ratio < 4.0 * 1.3,
            "(c) speed ratio on halving eps = " + num_str(ratio) +
                " within 4 +- 30%");
  }

  // (d) dumbbell bistability and hole position switch
  {
    const double L = db.perimeter();
    const DriftReport& left = jobs[2].out.rep;
    const DriftReport& right = jobs[3].out.rep;
    c.check(left.final_s0 < 0.32 && left.fitted_speed < 0.0,
            "(d) left basin: s0(2000) = " + num_str(left.final_s0) +
                " heading to 0");
    c.check(std::abs(right.final_s0 - 0.25 * L) < 0.1,
            "(d) right basin: s0(1300) = " + num_str(right.final_s0) +
                " near L/4 = " + num_str(0.25 * L));

    const DriftReport& hole_lo = jobs[4].out.rep;
    const DriftReport& hole_hi = jobs[5].out.rep;
    const double sm = std::acos(hole_regime(0.8, 0.1, 0.5).b0);
    c.check(hole_hi.final_s0 > 0.3 &&
                std::abs(hole_hi.final_s0 - sm) < 0.06,
            "(d) hole c=0.8 settles at s_m = " + num_str(sm) + " (got " +
                num_str(hole_hi.final_s0) + ")");
    c.check(hole_lo.final_s0 < 0.3 - 0.003,
            "(d) hole c=0.4 drifts toward the axis (got " +
                num_str(hole_lo.final_s0) + ")");
    c.check(std::abs(hole_hi.final_s0 - hole_lo.final_s0) > 0.1,
            "(d) hole final positions differ by > 0.1");
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  using Fn = Criterion (*)();
  const Fn fns[] = {criterion1, criterion2, criterion3, criterion4,
                    criterion5, criterion6, criterion7, criterion8,
                    criterion9, criterion10, criterion11};
  int lo = 1, hi = 11;
  if (argc > 1) {
    lo = hi = std::atoi(argv[1]);
    if (lo < 1 || hi > 11) {
      std::fprintf(stderr, "usage: %s [1..11]\n", argv[0]);
      return 64;
    }
  }
  int failed = 0;
  for (int n = lo; n <= hi; ++n) {
    Criterion c;
    try {
      c = fns[n - 1]();
    } catch (const std::exception& e) {
      c.failed++;
      c.detail += std::string("\n  - FAIL: unhandled error: ") + e.what();
    }
    std::printf("criterion %d: %s%s\n", n, c.failed == 0 ? "PASS" : "FAIL",
                c.detail.c_str());
    if (c.failed) ++failed;
  }
  return failed;
}
