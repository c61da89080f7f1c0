// Copyright 2026 The rydchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Configuration precedence, lowest to highest:
// built-in defaults, the --config JSON document, RYD_WORKERS (workers only),
// command-line flags.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rydchain/errors.hpp"
#include "rydchain/io.hpp"
#include "rydchain/lindblad.hpp"
#include "rydchain/meanfield.hpp"
#include "rydchain/model.hpp"
#include "rydchain/phases.hpp"
#include "rydchain/stability.hpp"
#include "rydchain/version.hpp"

namespace {

using nlohmann::json;
using namespace rydchain;

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kNumerical = 3, kResource = 4 };

const std::vector<std::string> kConfigKeys = {
    "params",     "seed",       "workers",   "t_final",         "sample_dt",
    "ensemble",   "ensemble_model", "initial", "sites",         "grid",
    "scan",       "n_values",   "gamma_values", "gamma_m_values", "max_sites",
    "dipole_dipole", "interactions", "heatmap_scale", "transient_fraction",
    "steady_state", "dump_rho"};

struct Overrides {
  std::string config_path;
  std::string out_path;
  std::string heatmap_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> z;
  std::optional<std::string> range;
  std::optional<double> t_final;
  std::optional<int> ensemble;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  // A previous output file can serve as its own config: its header carries it.
  if (in.peek() == '#') {
    const json h = read_header_line(in);
    if (!h.is_object() || !h.contains("config")) {
      throw ConfigError("header line of '" + path + "' carries no config");
    }
    return h.at("config");
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

json resolve(const Overrides& ov) {
  json c = load_config(ov.config_path);
  if (!c.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : c.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), k) == kConfigKeys.end()) {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
  if (!c.contains("params")) c["params"] = json::object();
  if (ov.seed) c["seed"] = *ov.seed;
  if (!c.contains("seed")) c["seed"] = 1;
  if (ov.workers) {
    c["workers"] = *ov.workers;
  } else if (const char* env = std::getenv("RYD_WORKERS")) {
    try {
      c["workers"] = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("RYD_WORKERS must be an integer");
    }
  }
  if (ov.z) c["params"]["coordination"] = *ov.z;
  if (ov.range) c["params"]["interaction_range"] = *ov.range;
  if (ov.t_final) c["t_final"] = *ov.t_final;
  if (ov.ensemble) c["ensemble"] = *ov.ensemble;
  // Round-trip through ModelParams so the header shows every field.
  ModelParams p = c["params"].get<ModelParams>();
  p.validate();
  c["params"] = p;
  return c;
}

template <class T>
T get_or(const json& c, const char* key, T fallback) {
  if (!c.contains(key)) return fallback;
  try {
    return c.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::vector<double> axis_values(const json& a, const char* what) {
  if (a.is_array()) return a.get<std::vector<double>>();
  if (!a.is_object() || !a.contains("min") || !a.contains("max") || !a.contains("points")) {
    throw ConfigError(std::string(what) + ": expected a list or {min, max, points}");
  }
  const int n = a.at("points").get<int>();
  if (n < 1) throw ConfigError(std::string(what) + ": points must be >= 1");
  return linspace(a.at("min").get<double>(), a.at("max").get<double>(), n);
}

json make_header(const std::string& command, const json& config) {
  return json{{"tool", "rydchain"},
              {"version", kVersion},
              {"command", command},
              {"seed", config.at("seed")},
              {"config", config}};
}

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw ConfigError("cannot open output '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  std::string sibling(const std::string& suffix) const {
    if (path_.empty() || path_ == "-") return {};
    return path_ + suffix;
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

PhaseOptions phase_options(const json& c) {
  PhaseOptions o;
  o.ensemble = get_or(c, "ensemble", o.ensemble);
  o.t_final = get_or(c, "t_final", o.t_final);
  o.transient_fraction = get_or(c, "transient_fraction", o.transient_fraction);
  o.sample_dt = get_or(c, "sample_dt", o.sample_dt);
  o.model = ensemble_model_from_string(get_or<std::string>(c, "ensemble_model", "bipartite"));
  return o;
}

// ---------------------------------------------------------------------------

int cmd_mf_evolve(const Overrides& ov) {
  const json c = resolve(ov);
  const ModelParams p = c.at("params").get<ModelParams>();
  const double t_final = get_or(c, "t_final", 300.0);
  const double dt = get_or(c, "sample_dt", 1.0);
  const int members = get_or(c, "ensemble", 1);
  const auto seed = get_or<std::uint64_t>(c, "seed", 1);
  const std::string initial = get_or<std::string>(c, "initial", "random");
  const std::vector<int> sites = get_or(c, "sites", std::vector<int>{});
  if (members < 1) throw ConfigError("ensemble must be >= 1");

  Output out(ov.out_path);
  write_header_line(out.stream(), make_header("mf-evolve", c));
  write_trajectory_columns(out.stream());

  PhaseOptions popt = phase_options(c);
  popt.t_final = t_final;
  std::vector<MemberResult> results;
  int status = kOk;
  for (int m = 0; m < members; ++m) {
    const std::uint64_t s = member_seed(seed, m);
    SpinLattice start;
    if (initial == "random") {
      start = random_start(p.n_sites, s);
    } else if (initial == "down") {
      start = SpinLattice::uniform(p.n_sites, Bloch(0.0, 0.0, -0.5));
    } else {
      throw ConfigError("initial must be 'random' or 'down'");
    }
    IntegrateOptions io;
    io.sample_times = sample_grid(0.0, t_final, dt);
    io.seed = s;
    try {
      const Trajectory tr = integrate(start, p, t_final, io);
      write_trajectory_rows(out.stream(), tr, m, sites);
      results.push_back(classify_lattice_trajectory(tr, p, popt));
      results.back().seed = s;
    } catch (const TrajectoryError& e) {
      write_trajectory_rows(out.stream(), e.partial(), m, sites);
      out.stream() << "# partial: member " << m << " failed at t=" << e.t_reached() << ": "
                   << e.what() << '\n';
      status = kNumerical;
    }
  }
  if (members > 1 || !out.sibling("").empty()) {
    const std::string path = out.sibling(".members.csv");
    std::ofstream f;
    std::ostream* os = &std::cerr;
    if (!path.empty()) {
      f.open(path);
      os = &f;
    }
    write_header_line(*os, make_header("mf-evolve", c));
    *os << "member,seed,outcome,sigma,amplitude,sz_0,sz_1\n" << std::setprecision(12);
    for (std::size_t m = 0; m < results.size(); ++m) {
      const auto& r = results[m];
      *os << m << ',' << r.seed << ',' << to_string(r.outcome) << ',' << r.variance << ','
          << r.amplitude << ',' << r.final_sz_a << ',' << r.final_sz_b << '\n';
    }
  }
  return status;
}

int cmd_fixed_points(const Overrides& ov, bool eigen) {
  const json c = resolve(ov);
  ModelParams p = c.at("params").get<ModelParams>();
  std::vector<double> values{p.omega};
  SweepAxis axis = SweepAxis::kOmega;
  if (c.contains("scan")) {
    const json& s = c.at("scan");
    axis = sweep_axis_from_string(get_or<std::string>(s, "axis", "omega"));
    values = axis_values(s.contains("values") ? s.at("values") : s, "scan");
  }
  Output out(ov.out_path);
  write_header_line(out.stream(), make_header(eigen ? "stability" : "fixed-points", c));
  write_fixed_point_columns(out.stream(), eigen);
  for (double v : values) {
    set_axis(p, axis, v);
    std::vector<FixedPoint> pts;
    try {
      pts = uniform_fixed_points(p);
    } catch (const NumericalError&) {
    }
    for (const auto& r : bipartite_fixed_points(p).roots) {
      const bool dup = std::any_of(pts.begin(), pts.end(), [&](const FixedPoint& f) {
        return (f.state.packed() - r.state.packed()).cwiseAbs().maxCoeff() <= 1e-6;
      });
      if (!dup) pts.push_back(r);
    }
    std::vector<StabilityReport> reps;
    for (auto& f : pts) {
      reps.push_back(classify(f, p));
      f.stability = reps.back().verdict;
    }
    write_fixed_point_rows(out.stream(), v, pts, reps, eigen);
  }
  return kOk;
}

int cmd_phase_diagram(const Overrides& ov) {
  const json c = resolve(ov);
  const ModelParams p = c.at("params").get<ModelParams>();
  if (!c.contains("grid")) throw ConfigError("phase-diagram needs a 'grid' entry");
  const json& g = c.at("grid");
  const json gx = g.value("x", json{{"axis", "delta"}});
  const json gy = g.value("y", json{{"axis", "omega"}});
  const SweepAxis xa = sweep_axis_from_string(get_or<std::string>(gx, "axis", "delta"));
  const SweepAxis ya = sweep_axis_from_string(get_or<std::string>(gy, "axis", "omega"));
  const auto xs = axis_values(gx.contains("values") ? gx.at("values") : gx, "grid.x");
  const auto ys = axis_values(gy.contains("values") ? gy.at("values") : gy, "grid.y");
  const PhaseOptions opt = phase_options(c);
  const int workers = get_or(c, "workers", 1);
  const auto seed = get_or<std::uint64_t>(c, "seed", 1);

  const PhaseDiagram d = sweep_grid(p, xa, xs, ya, ys, opt, seed, workers);
  Output out(ov.out_path);
  const json meta = make_header("phase-diagram", c);
  write_phase_csv(out.stream(), d, meta);
  if (const std::string gp = out.sibling(".grid.csv"); !gp.empty()) {
    std::ofstream f(gp);
    write_phase_grid(f, d, meta);
    std::ofstream l(out.sibling(".legend.csv"));
    write_phase_legend(l);
  }
  if (!ov.heatmap_path.empty()) {
    std::ofstream f(ov.heatmap_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open heatmap '" + ov.heatmap_path + "'");
    write_phase_ppm(f, d, get_or(c, "heatmap_scale", 8));
  }
  return kOk;
}

int cmd_critical_scan(const Overrides& ov) {
  const json c = resolve(ov);
  const ModelParams base = c.at("params").get<ModelParams>();
  const auto ns = get_or(c, "n_values", std::vector<int>{});
  if (ns.empty()) throw ConfigError("critical-scan needs a non-empty 'n_values' list");
  // Each entry sets gamma_s = gamma_m, or [gamma_s, gamma_m] when a pair.
  std::vector<std::pair<double, double>> gammas;
  if (c.contains("gamma_values")) {
    for (const auto& g : c.at("gamma_values")) {
      if (g.is_array()) {
        gammas.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
      } else {
        gammas.emplace_back(g.get<double>(), g.get<double>());
      }
    }
  } else {
    gammas.emplace_back(base.gamma_s, base.gamma_m);
  }
  Output out(ov.out_path);
  write_header_line(out.stream(), make_header("critical-scan", c));
  out.stream() << "n_sites,gamma_s,gamma_m,n_gamma_m,omega_c,sz_c,formula,asymptotic,"
                  "ratio_to_asymptote,status\n"
               << std::setprecision(12);
  int status = kOk;
  for (const auto& [gs, gm] : gammas) {
    for (int n : ns) {
      ModelParams p = base;
      p.n_sites = n;
      p.gamma_s = gs;
      p.gamma_m = gm;
      p.validate();
      out.stream() << n << ',' << gs << ',' << gm << ',' << n * gm << ',';
      try {
        const CriticalPoint cp = critical_omega(p);
        const double asym = critical_omega_asymptotic(cp.sz, p);
        out.stream() << cp.omega_c << ',' << cp.sz << ',' << cp.formula << ',' << asym << ','
                     << (asym > 0.0 ? cp.omega_c / asym : NAN) << ",ok\n";
      } catch (const NumericalError& e) {
        out.stream() << ",,,,,failed\n";
        std::cerr << "critical-scan: N=" << n << " gamma_m=" << gm << ": " << e.what() << '\n';
        status = kNumerical;
      }
    }
  }
  return status;
}

EvolveOptions exact_options(const json& c) {
  EvolveOptions o;
  o.hamiltonian.max_sites = get_or(c, "max_sites", kDefaultMaxSites);
  o.stop_at_steady_state = get_or(c, "steady_state", false);
  if (c.contains("dipole_dipole")) {
    const json& d = c.at("dipole_dipole");
    DDGeometry g;
    g.c3 = get_or(d, "c3", g.c3);
    g.a = get_or(d, "a", g.a);
    g.theta = get_or(d, "theta", g.theta);
    o.hamiltonian.dipole_dipole = g;
  }
  return o;
}

DensityMatrix exact_initial(const json& c, int n) {
  const std::string init = get_or<std::string>(c, "initial", "down");
  if (init == "down") return all_down_state(n);
  if (init == "mixed") return maximally_mixed_state(n);
  throw ConfigError("exact initial state must be 'down' or 'mixed'");
}

int cmd_exact_evolve(const Overrides& ov) {
  const json c = resolve(ov);
  ModelParams p = c.at("params").get<ModelParams>();
  const double t_final = get_or(c, "t_final", 300.0);
  EvolveOptions opt = exact_options(c);
  if (p.n_sites > opt.hamiltonian.max_sites) {
    throw ResourceError("exact solver limited to " + std::to_string(opt.hamiltonian.max_sites) +
                        " sites, requested " + std::to_string(p.n_sites));
  }
  Output out(ov.out_path);
  write_header_line(out.stream(), make_header("exact-evolve", c));

  if (c.contains("scan")) {
    // Final-time observables along one parameter axis.
    const json& s = c.at("scan");
    const SweepAxis axis = sweep_axis_from_string(get_or<std::string>(s, "axis", "delta"));
    const auto values = axis_values(s.contains("values") ? s.at("values") : s, "scan");
    out.stream() << to_string(axis) << ",t,mean_sz,entropy,purity,trace_error,hermiticity,"
                                       "min_eigenvalue,steady\n";
    for (double v : values) {
      set_axis(p, axis, v);
      const EvolveResult r = evolve(exact_initial(c, p.n_sites), p, t_final, opt);
      out.stream() << std::setprecision(12) << v << ',';
      std::ostringstream row;
      write_exact_row(row, r.times.back(), r.states.back(), r.invariants.back());
      std::string line = row.str();
      if (!line.empty() && line.back() == '\n') line.pop_back();
      out.stream() << line;
      out.stream() << ',' << (r.steady ? 1 : 0) << '\n';
    }
    return kOk;
  }

  const double dt = get_or(c, "sample_dt", 1.0);
  opt.sample_times = sample_grid(0.0, t_final, dt);
  const EvolveResult r = evolve(exact_initial(c, p.n_sites), p, t_final, opt);
  write_exact_columns(out.stream());
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    write_exact_row(out.stream(), r.times[i], r.states[i], r.invariants[i]);
  }
  if (c.contains("dump_rho")) {
    std::ofstream f(c.at("dump_rho").get<std::string>(), std::ios::binary);
    if (!f) throw ConfigError("cannot open density-matrix dump");
    write_density_matrix(f, r.states.back());
  }
  return kOk;
}

int cmd_exact_correlations(const Overrides& ov) {
  const json c = resolve(ov);
  ModelParams p = c.at("params").get<ModelParams>();
  const double t_final = get_or(c, "t_final", 300.0);
  const EvolveOptions opt = exact_options(c);
  if (p.n_sites > opt.hamiltonian.max_sites) {
    throw ResourceError("exact solver limited to " + std::to_string(opt.hamiltonian.max_sites) +
                        " sites, requested " + std::to_string(p.n_sites));
  }
  const auto gms = get_or(c, "gamma_m_values", std::vector<double>{p.gamma_m});
  Output out(ov.out_path);
  write_header_line(out.stream(), make_header("exact-correlations", c));
  out.stream() << "gamma_m,separation,correlation,mean_sz,entropy\n" << std::setprecision(12);
  for (double gm : gms) {
    p.gamma_m = gm;
    const EvolveResult r = evolve(exact_initial(c, p.n_sites), p, t_final, opt);
    const ObservableSet o = observables(r.states.back());
    for (std::size_t j = 0; j < o.correlations.size(); ++j) {
      out.stream() << gm << ',' << j << ',' << o.correlations[j] << ',' << o.mean_sz << ','
                   << o.entropy << '\n';
    }
  }
  return kOk;
}

int cmd_interactions_table(const Overrides& ov) {
  const json c = resolve(ov);
  const json t = get_or(c, "interactions", json::object());
  DDGeometry g;
  g.c3 = get_or(t, "c3", 1.0);
  g.a = get_or(t, "a", 1.0);
  g.theta = t.contains("theta_deg") ? t.at("theta_deg").get<double>() * std::acos(-1.0) / 180.0
                                    : get_or(t, "theta", std::acos(-1.0) / 2.0);
  const double c6_1 = get_or(t, "c6_1", 1.0);
  const double c6_2 = get_or(t, "c6_2", 1.0);
  const int dmax = get_or(t, "max_distance", 10);
  if (dmax < 1) throw ConfigError("max_distance must be >= 1");
  Output out(ov.out_path);
  write_header_line(out.stream(), make_header("interactions-table", c));
  out.stream() << "distance,separation,vdw_1,vdw_2,dd,theta_deg\n" << std::setprecision(12);
  for (int d = 1; d <= dmax; ++d) {
    const double r = d * g.a;
    out.stream() << d << ',' << r << ',' << c6_1 / std::pow(r, 6) << ',' << c6_2 / std::pow(r, 6)
                 << ',' << dd_coupling(g, 0, d) << ',' << g.theta * 180.0 / std::acos(-1.0)
                 << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field and exact dynamics of a driven, dissipative Rydberg chain"};
  app.set_version_flag("--version", std::string("rydchain ") + kVersion);
  app.require_subcommand(1);

  Overrides ov;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", ov.config_path, "JSON config (or a previous output file)");
    sub->add_option("--out", ov.out_path, "output CSV path (default: stdout)");
    sub->add_option("--seed", ov.seed, "base seed");
    sub->add_option("--workers", ov.workers, "worker threads (overrides RYD_WORKERS)");
    sub->add_option("--z", ov.z, "coordination factor");
    sub->add_option("--range", ov.range, "interaction range: NN or NNN");
    sub->add_option("--t-final", ov.t_final, "final time");
    sub->add_option("--ensemble", ov.ensemble, "ensemble size");
  };

  struct Cmd {
    const char* name;
    const char* help;
    std::function<int()> run;
  };
  const std::vector<Cmd> cmds = {
      {"mf-evolve", "integrate the full-lattice mean-field equations", [&] { return cmd_mf_evolve(ov); }},
      {"fixed-points", "uniform and bipartite fixed points", [&] { return cmd_fixed_points(ov, false); }},
      {"stability", "fixed points with Jacobian spectra", [&] { return cmd_fixed_points(ov, true); }},
      {"phase-diagram", "classify phases over a parameter grid", [&] { return cmd_phase_diagram(ov); }},
      {"critical-scan", "critical drive over chain lengths and decay rates", [&] { return cmd_critical_scan(ov); }},
      {"exact-evolve", "master-equation evolution of a short chain", [&] { return cmd_exact_evolve(ov); }},
      {"exact-correlations", "steady-state connected correlations", [&] { return cmd_exact_correlations(ov); }},
      {"interactions-table", "vdW and dipole-dipole strengths versus distance", [&] { return cmd_interactions_table(ov); }},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* s = app.add_subcommand(c.name, c.help);
    common(s);
    if (std::string(c.name) == "phase-diagram") {
      s->add_option("--heatmap", ov.heatmap_path, "write a PPM heatmap");
    }
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (subs[i]->parsed()) return cmds[i].run();
    }
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
