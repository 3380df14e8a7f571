#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bspulse/bifurcation.hpp"
#include "bspulse/errors.hpp"
#include "bspulse/geometry.hpp"
#include "bspulse/greens.hpp"
#include "bspulse/kinetics.hpp"
#include "bspulse/reduced.hpp"
#include "bspulse/surface_pde.hpp"

// Scenario plumbing shared by the command-line tool: dotted-key config
// parsing, atomic CSV/JSON emission with sidecar manifests, and the five
// scenario runners (potential, reduced, bifurcate, simulate, validate).

namespace bspulse::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Flat config: `a.b.c = value` one per line, `#` comments, UTF-8.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected `key = value`");
      const std::string key = trim(t.substr(0, eq));
      const std::string val = trim(t.substr(eq + 1));
      if (key.empty())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = val;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError("missing required config key `" + key + "`");
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  double get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
  }
  double get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : parse_double(key, it->second);
  }

  int get_int(const std::string& key, int def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key `" + key + "`: not an integer: " +
                        it->second);
    }
  }

  bool get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key `" + key + "`: not a boolean: " +
                      it->second);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  void set(const std::string& key, const std::string& val) {
    values_[key] = val;
  }

 private:
  static double parse_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key `" + key + "`: not a number: " + s);
    }
  }

  std::map<std::string, std::string> values_;
};

/// Write-then-rename so readers never observe a partial file.
inline void write_atomic(const std::filesystem::path& path,
                         const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

/// Sidecar manifest enabling exact replay of an output file.
inline void write_manifest(const std::filesystem::path& data_path,
                           const Config& cfg, double wall_seconds) {
  nlohmann::json j;
  j["file"] = data_path.filename().string();
  j["library_version"] = kVersion;
  j["wall_clock_seconds"] = wall_seconds;
  j["config"] = nlohmann::json::object();
  for (const auto& [k, v] : cfg.values()) j["config"][k] = v;
  write_atomic(data_path.string() + ".manifest.json", j.dump(2) + "\n");
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

// --- config -> model objects -----------------------------------------------

inline ConformalDomain domain_from_config(const Config& cfg) {
  const std::string kind = cfg.get_string("domain.kind");
  if (kind == "disk") return ConformalDomain::disk();
  if (kind == "dumbbell")
    return ConformalDomain::dumbbell(cfg.get_double("domain.k"));
  if (kind == "perforated_disk")
    return ConformalDomain::perforated_disk(cfg.get_double("domain.c"),
                                            cfg.get_double("domain.r"));
  throw ConfigError("domain.kind must be disk, dumbbell, or perforated_disk");
}

inline ReactionKinetics kinetics_from_config(const Config& cfg) {
  return ReactionKinetics::hill(cfg.get_double("kinetics.k0", 0.05),
                                cfg.get_double("kinetics.gamma0", 0.79));
}

inline double mass_from_config(const Config& cfg, const ReactionKinetics& kin,
                               const ConformalDomain& dom) {
  if (cfg.has("mass.M")) return cfg.get_double("mass.M");
  if (cfg.has("mass.w_star"))
    return MassRelation::mass_for_width(kin, dom.perimeter(), dom.area(),
                                        cfg.get_double("mass.w_star"));
  throw ConfigError("one of mass.M or mass.w_star is required");
}

// --- scenario runners ------------------------------------------------------

struct RunContext {
  Config cfg;
  std::filesystem::path out_dir;
  int threads = 1;
  bool quiet = false;

  void note(const std::string& msg) const {
    if (!quiet) std::fprintf(stderr, "%s\n", msg.c_str());
  }
};

inline nlohmann::json critical_point_json(const CriticalPoint& cp) {
  nlohmann::json j;
  j["s0"] = cp.s0;
  j["kind"] = to_string(cp.kind);
  j["E_value"] = cp.E_value;
  j["E_second"] = cp.E_second;
  j["provenance"] = cp.provenance == CriticalPoint::Provenance::ClosedForm
                        ? "closed_form"
                        : "numeric";
  return j;
}

/// potential.csv (`s0,E,E1,E2`) + critical_points.json
inline int cmd_potential(const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConformalDomain dom = domain_from_config(ctx.cfg);
  const double w = ctx.cfg.get_double("potential.w");
  const int grid_n = ctx.cfg.get_int("potential.grid_n", 512);
  const PotentialField pf(dom, w);
  const double L = dom.perimeter();

  std::ostringstream csv;
  csv << "s0,E,E1,E2\n";
  for (int i = 0; i <= grid_n; ++i) {
    const double s0 = L * i / grid_n;
    csv << fmt(s0) << ',' << fmt(potential(pf, s0)) << ','
        << fmt(potential_derivative(pf, s0, 1)) << ','
        << fmt(potential_derivative(pf, s0, 2)) << '\n';
  }

  const Landscape land = critical_points(pf, std::max(grid_n, 256));
  nlohmann::json j;
  j["flat_landscape"] = land.flat;
  j["points"] = nlohmann::json::array();
  for (const auto& cp : land.points) j["points"].push_back(critical_point_json(cp));

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_atomic(ctx.out_dir / "potential.csv", csv.str());
  write_manifest(ctx.out_dir / "potential.csv", ctx.cfg, wall);
  write_atomic(ctx.out_dir / "critical_points.json", j.dump(2) + "\n");
  write_manifest(ctx.out_dir / "critical_points.json", ctx.cfg, wall);
  return 0;
}

/// trajectory.csv (`t,s0,w`)
inline int cmd_reduced(const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConformalDomain dom = domain_from_config(ctx.cfg);
  const ReactionKinetics kin = kinetics_from_config(ctx.cfg);
  const double M = mass_from_config(ctx.cfg, kin, dom);
  const MassRelation rel(kin, dom.perimeter(), dom.area(), M);
  const ReducedModel model(dom, kin, rel,
                           std::sqrt(ctx.cfg.get_double("model.eps2", 1e-3)),
                           ctx.cfg.get_double("model.D", 1.0));

  const std::string mode_s = ctx.cfg.get_string("reduced.mode", "composite");
  ReducedMode mode;
  if (mode_s == "fast")
    mode = ReducedMode::Fast;
  else if (mode_s == "slow")
    mode = ReducedMode::Slow;
  else if (mode_s == "composite")
    mode = ReducedMode::Composite;
  else
    throw ConfigError("reduced.mode must be fast, slow, or composite");

  PulseState st;
  st.s0 = ctx.cfg.get_double("reduced.s0");
  st.w = ctx.cfg.get_double("reduced.w0", rel.w_star());
  const double t_end = ctx.cfg.get_double("reduced.t_end");

  const ReducedTrajectory traj = model.integrate(st, t_end, mode);
  std::ostringstream csv;
  csv << "t,s0,w\n";
  for (const auto& s : traj.samples)
    csv << fmt(s.t) << ',' << fmt(s.s0) << ',' << fmt(s.w) << '\n';

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_atomic(ctx.out_dir / "trajectory.csv", csv.str());
  write_manifest(ctx.out_dir / "trajectory.csv", ctx.cfg, wall);
  return 0;
}

/// branches.csv (`param,s0,kind`) + summary.json with thresholds.
inline int cmd_bifurcate(const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string kind = ctx.cfg.get_string("domain.kind");
  const double w = ctx.cfg.get_double("potential.w");
  const double pmin = ctx.cfg.get_double("sweep.param_min");
  const double pmax = ctx.cfg.get_double("sweep.param_max");
  const int steps = ctx.cfg.get_int("sweep.steps", 64);
  if (!(pmax > pmin) || steps < 2)
    throw ConfigError("sweep range must satisfy param_max > param_min, steps >= 2");

  struct Row {
    double param, s0;
    std::string kind;
  };
  std::vector<std::vector<Row>> rows(steps + 1);
  nlohmann::json summary;

  auto run_slice = [&](int i) {
    const double p = pmin + (pmax - pmin) * i / steps;
    RegimeReport rep;
    if (kind == "dumbbell") {
      rep = dumbbell_regime(p, w);
    } else if (kind == "perforated_disk") {
      rep = hole_regime(p, ctx.cfg.get_double("domain.r"), w);
    } else {  // disk: single degenerate branch
      rows[i].push_back({p, 0.0, "degenerate"});
      return;
    }
    for (const auto& cp : rep.points)
      rows[i].push_back({p, cp.s0, to_string(cp.kind)});
  };

  if (ctx.threads > 1) {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < ctx.threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i <= steps; i = next++) run_slice(i);
      });
    for (auto& th : pool) th.join();
  } else {
    for (int i = 0; i <= steps; ++i) run_slice(i);
  }

  std::ostringstream csv;
  csv << "param,s0,kind\n";
  for (const auto& slice : rows)
    for (const auto& r : slice)
      csv << fmt(r.param) << ',' << fmt(r.s0) << ',' << r.kind << '\n';

  summary["family"] = kind;
  summary["w"] = w;
  if (kind == "dumbbell") {
    summary["k_star"] = dumbbell_k_star();
    try {
      summary["k_b"] = dumbbell_k_b(w);
    } catch (const Error& e) {
      summary["k_b_error"] = e.what();
    }
  } else if (kind == "perforated_disk") {
    const double r = ctx.cfg.get_double("domain.r");
    try {
      summary["c_b"] = hole_c_b(r, w);
    } catch (const Error& e) {
      summary["c_b_error"] = e.what();
    }
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_atomic(ctx.out_dir / "branches.csv", csv.str());
  write_manifest(ctx.out_dir / "branches.csv", ctx.cfg, wall);
  write_atomic(ctx.out_dir / "summary.json", summary.dump(2) + "\n");
  write_manifest(ctx.out_dir / "summary.json", ctx.cfg, wall);
  return 0;
}

inline PdeConfig pde_config(const Config& cfg, const ReactionKinetics& kin,
                            const ConformalDomain& dom) {
  PdeConfig pc;
  pc.eps2 = cfg.get_double("model.eps2", 1e-3);
  pc.D = cfg.get_double("model.D", 1.0);
  pc.N = cfg.get_int("pde.N", 512);
  pc.dt = cfg.get_double("pde.dt", 0.0);
  pc.sample_dt = cfg.get_double("pde.sample_dt", 1.0);
  pc.include_ut_term = cfg.get_bool("pde.include_ut_term", false);
  pc.total_mass = mass_from_config(cfg, kin, dom);
  return pc;
}

/// trajectory.csv (`t,s0,w,s1,s2,v_bar,E_at_s0`) + profile.csv
/// (`s,u,v_trace`).
inline int cmd_simulate(const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConformalDomain dom = domain_from_config(ctx.cfg);
  const ReactionKinetics kin = kinetics_from_config(ctx.cfg);
  const PdeConfig pc = pde_config(ctx.cfg, kin, dom);
  const MassRelation rel(kin, dom.perimeter(), dom.area(), pc.total_mass);
  const PotentialField pf(dom, rel.w_star());

  SurfaceSimulator sim(dom, kin, pc);
  sim.set_pulse_initial(ctx.cfg.get_double("pde.s0_init"),
                        ctx.cfg.get_double("pde.w_init", rel.w_star()));
  const double t_end = ctx.cfg.get_double("pde.t_end");

  std::ostringstream csv;
  csv << "t,s0,w,s1,s2,v_bar,E_at_s0\n";
  auto emit = [&]() {
    const PulseExtract px = sim.extract_pulse();
    csv << fmt(sim.time()) << ',' << fmt(px.s0) << ',' << fmt(px.w) << ','
        << fmt(px.s1) << ',' << fmt(px.s2) << ',' << fmt(sim.v_bar()) << ','
        << fmt(potential(pf, px.s0)) << '\n';
  };
  emit();
  for (double t = pc.sample_dt; t <= t_end + 1e-9; t += pc.sample_dt) {
    sim.run_until(t);
    emit();
  }

  std::ostringstream prof;
  prof << "s,u,v_trace\n";
  for (int i = 0; i < pc.N; ++i)
    prof << fmt(sim.node(i)) << ',' << fmt(sim.u()[i]) << ','
         << fmt(sim.v_trace()[i]) << '\n';

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_atomic(ctx.out_dir / "trajectory.csv", csv.str());
  write_manifest(ctx.out_dir / "trajectory.csv", ctx.cfg, wall);
  write_atomic(ctx.out_dir / "profile.csv", prof.str());
  write_manifest(ctx.out_dir / "profile.csv", ctx.cfg, wall);
  return 0;
}

/// comparison.csv (`t,s0_pde,s0_ode,residual`) + verdict.json.
/// Returns 2 when the verdict fails.
inline int cmd_validate(const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConformalDomain dom = domain_from_config(ctx.cfg);
  const ReactionKinetics kin = kinetics_from_config(ctx.cfg);
  const PdeConfig pc = pde_config(ctx.cfg, kin, dom);
  const MassRelation rel(kin, dom.perimeter(), dom.area(), pc.total_mass);
  const double t_end = ctx.cfg.get_double("pde.t_end");

  const DriftReport rep = run_and_compare(
      dom, kin, pc, t_end, ctx.cfg.get_double("pde.s0_init"),
      ctx.cfg.get_double("pde.w_init", rel.w_star()));

  std::ostringstream csv;
  csv << "t,s0_pde,s0_ode,residual\n";
  for (const auto& s : rep.samples)
    csv << fmt(s.t) << ',' << fmt(s.s0_pde) << ',' << fmt(s.s0_ode) << ','
        << fmt(s.residual) << '\n';

  const double max_ratio = ctx.cfg.get_double("validate.max_ratio", 2.0);
  const bool flat = dom.kind() == DomainKind::Disk;
  const bool speed_ok =
      flat ? std::abs(rep.fitted_speed) < 1e-6 * dom.perimeter()
           : (rep.speed_ratio > 1.0 / max_ratio &&
              rep.speed_ratio < max_ratio);
  const bool width_ok =
      std::abs(rep.final_w - rel.w_star()) < 0.05 * rel.w_star();
  const bool pass = rep.sign_consistent && speed_ok && width_ok;

  nlohmann::json verdict;
  verdict["fitted_speed"] = rep.fitted_speed;
  verdict["ode_speed"] = rep.ode_speed;
  verdict["speed_ratio"] = rep.speed_ratio;
  verdict["final_s0"] = rep.final_s0;
  verdict["final_w"] = rep.final_w;
  verdict["w_star"] = rel.w_star();
  verdict["sign_consistent"] = rep.sign_consistent;
  verdict["speed_ok"] = speed_ok;
  verdict["width_ok"] = width_ok;
  verdict["pass"] = pass;

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_atomic(ctx.out_dir / "comparison.csv", csv.str());
  write_manifest(ctx.out_dir / "comparison.csv", ctx.cfg, wall);
  write_atomic(ctx.out_dir / "verdict.json", verdict.dump(2) + "\n");
  write_manifest(ctx.out_dir / "verdict.json", ctx.cfg, wall);
  ctx.note(std::string("validate: ") + (pass ? "pass" : "FAIL"));
  return pass ? 0 : 2;
}

}  // namespace bspulse::cli
