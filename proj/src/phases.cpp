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

#include "rydchain/phases.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rydchain/errors.hpp"
#include "rydchain/version.hpp"

namespace rydchain {

namespace {

constexpr double kBranchSplit = -0.25;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double peak_to_peak(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

Outcome stationary_outcome(double sz_a, double sz_b, double afm_tol) {
  if (std::abs(sz_a - sz_b) > afm_tol) return Outcome::kAFM;
  return 0.5 * (sz_a + sz_b) < kBranchSplit ? Outcome::kUniformLow : Outcome::kUniformHigh;
}

unsigned component_of(Outcome o) {
  switch (o) {
    case Outcome::kUniformLow: return static_cast<unsigned>(Component::kULE);
    case Outcome::kUniformHigh: return static_cast<unsigned>(Component::kUHE);
    case Outcome::kAFM: return static_cast<unsigned>(Component::kAFM);
    case Outcome::kOSC: return static_cast<unsigned>(Component::kOSC);
    case Outcome::kUnresolved: break;
  }
  return 0;
}

std::vector<double> trailing_samples(const PhaseOptions& opt) {
  const double t0 = opt.transient_fraction * opt.t_final;
  return sample_grid(t0, opt.t_final, opt.sample_dt);
}

// A weakly damped focus can ring above the amplitude threshold for the whole
// window. Treat the signal as ringing when Newton from the end state lands on a
// nearby stable root whose leading eigenfrequency matches the observed period.
std::optional<FixedPoint> ringing_focus(const BipartiteState& end, const ModelParams& p,
                                        std::optional<double> period, const PhaseOptions& opt) {
  if (!period || !(*period > 0.0)) return std::nullopt;
  auto fp = newton_bipartite(end.packed(), p, opt.scan.newton);
  if (!fp || (fp->state.packed() - end.packed()).cwiseAbs().maxCoeff() > 5e-2) return std::nullopt;
  const StabilityReport rep = classify(*fp, p, JacobianMode::kAnalytic, true);
  if (rep.verdict != Stability::kStable) return std::nullopt;
  const double omega = std::abs(rep.eigenvalues.front().imag());
  if (omega == 0.0) return std::nullopt;
  const double expected = 2.0 * std::acos(-1.0) / omega;
  if (std::abs(*period - expected) > 0.1 * expected) return std::nullopt;
  fp->stability = Stability::kStable;
  return fp;
}

MemberResult run_bipartite_member(const ModelParams& p, const PhaseOptions& opt,
                                  std::uint64_t seed) {
  MemberResult r;
  r.seed = seed;
  IntegrateOptions io;
  io.ode = opt.ode;
  io.sample_times = trailing_samples(opt);
  io.seed = seed;
  const BipartiteTrajectory tr = integrate_bipartite(random_bipartite_start(seed), p, opt.t_final, io);
  const double window = tr.times.back() - tr.times.front();

  std::vector<double> za, zb;
  za.reserve(tr.states.size());
  zb.reserve(tr.states.size());
  for (const auto& s : tr.states) {
    za.push_back(s.a.z());
    zb.push_back(s.b.z());
  }
  const auto oa = detect_oscillation(tr.times, za, window, opt.oscillation);
  const auto ob = detect_oscillation(tr.times, zb, window, opt.oscillation);
  r.amplitude = std::max(oa.amplitude, ob.amplitude);

  BipartiteState end = tr.states.back();
  bool osc = oa.oscillating || ob.oscillating;
  if (osc) {
    const auto period = oa.oscillating ? oa.period : ob.period;
    if (const auto fp = ringing_focus(end, p, period, opt)) {
      osc = false;
      end = fp->state;
      r.outcome = stationary_outcome(end.a.z(), end.b.z(), opt.afm_tol);
    } else {
      r.outcome = Outcome::kOSC;
    }
  } else {
    const double res = bipartite_rhs(end.packed(), p).cwiseAbs().maxCoeff();
    if (res <= opt.stationary_tol) {
      r.outcome = stationary_outcome(end.a.z(), end.b.z(), opt.afm_tol);
    } else {
      // Slowly relaxing: settle onto the nearby fixed point, unless it is a
      // saddle the trajectory is still lingering near.
      const auto fp = newton_bipartite(end.packed(), p, opt.scan.newton);
      if (fp && (fp->state.packed() - end.packed()).cwiseAbs().maxCoeff() < 5e-2 &&
          classify(*fp, p, JacobianMode::kAnalytic, true).verdict != Stability::kUnstable) {
        end = fp->state;
        r.outcome = stationary_outcome(end.a.z(), end.b.z(), opt.afm_tol);
      } else {
        r.outcome = Outcome::kUnresolved;
      }
    }
  }
  r.final_sz_a = end.a.z();
  r.final_sz_b = end.b.z();
  r.variance = spin_variance(SpinLattice::alternating(2, end.a, end.b));
  return r;
}

// Newton on the full lattice from a slowly relaxing end state. Accepted only
// when it converges close by onto a root that is not a saddle.
std::optional<Eigen::VectorXd> polish_lattice(const Eigen::VectorXd& start,
                                              const InteractionMatrices& im,
                                              const DecayMatrix& dm, const ModelParams& p) {
  auto f = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd out;
    mf_rhs_packed(y, im, dm, p, out);
    return out;
  };
  Eigen::VectorXd x = start;
  Eigen::MatrixXd j;
  bool converged = false;
  for (int it = 0; it < 30; ++it) {
    const Eigen::VectorXd fx = f(x);
    if (!fx.allFinite()) return std::nullopt;
    if (fx.cwiseAbs().maxCoeff() <= 1e-12) {
      converged = true;
      break;
    }
    j = finite_difference_jacobian(f, x);
    const Eigen::VectorXd step = j.fullPivLu().solve(-fx);
    if (!step.allFinite()) return std::nullopt;
    x += step;
    if ((x - start).cwiseAbs().maxCoeff() > 5e-2) return std::nullopt;
  }
  if (!converged) return std::nullopt;
  j = finite_difference_jacobian(f, x);
  if (spectrum(j, JacobianMode::kFiniteDifference).verdict == Stability::kUnstable) {
    return std::nullopt;
  }
  return x;
}

MemberResult run_lattice_member(const ModelParams& p, const PhaseOptions& opt,
                                std::uint64_t seed) {
  IntegrateOptions io;
  io.ode = opt.ode;
  io.sample_times = trailing_samples(opt);
  io.seed = seed;
  const Trajectory tr = integrate(random_start(p.n_sites, seed), p, opt.t_final, io);
  MemberResult r = classify_lattice_trajectory(tr, p, opt);
  r.seed = seed;
  return r;
}

bool same_state(const BipartiteState& x, const BipartiteState& y, double tol) {
  return (x.packed() - y.packed()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

// ---------------------------------------------------------------------------
// Labels

std::string to_string(MultistableTag t) {
  switch (t) {
    case MultistableTag::kNone: return "none";
    case MultistableTag::kBistable: return "bistable";
    case MultistableTag::kM1: return "M1";
    case MultistableTag::kM2: return "M2";
    case MultistableTag::kMulti: return "multi";
  }
  return "none";
}

PhaseLabel PhaseLabel::from_components(unsigned mask) {
  PhaseLabel l;
  l.components = mask & 15u;
  const int n = l.count();
  const bool nonuniform = l.has(Component::kAFM) || l.has(Component::kOSC);
  if (n == 2) {
    l.tag = MultistableTag::kBistable;
  } else if (n >= 3) {
    if (l.has(Component::kULE) && l.has(Component::kUHE) && nonuniform) {
      l.tag = MultistableTag::kM2;
    } else if (l.has(Component::kAFM) && l.has(Component::kOSC) && l.has(Component::kULE)) {
      l.tag = MultistableTag::kM1;
    } else {
      l.tag = MultistableTag::kMulti;
    }
  }
  return l;
}

int PhaseLabel::count() const { return std::popcount(components); }

bool PhaseLabel::uniform_only() const {
  return components != 0 && !has(Component::kAFM) && !has(Component::kOSC);
}

std::string PhaseLabel::components_string() const {
  static const std::pair<Component, const char*> order[] = {{Component::kAFM, "AFM"},
                                                            {Component::kOSC, "OSC"},
                                                            {Component::kULE, "ULE"},
                                                            {Component::kUHE, "UHE"}};
  std::string s;
  for (const auto& [c, name] : order) {
    if (!has(c)) continue;
    if (!s.empty()) s += '/';
    s += name;
  }
  return s.empty() ? "none" : s;
}

std::string PhaseLabel::name() const {
  if (tag == MultistableTag::kM1 || tag == MultistableTag::kM2) return to_string(tag);
  return components_string();
}

// ---------------------------------------------------------------------------
// Diagnostics

double spin_variance(const SpinLattice& lattice) {
  const int n = lattice.size();
  if (n == 0) throw DomainError("spin_variance: empty lattice");
  std::vector<Bloch> unit(n);
  Bloch mean = Bloch::Zero();
  for (int j = 0; j < n; ++j) {
    const Bloch s = lattice.site(j);
    const double len = s.norm();
    if (!(len > 0.0)) throw DomainError("spin_variance: zero-length spin at site " + std::to_string(j));
    unit[j] = s / len;
    mean += unit[j];
  }
  mean /= n;
  double acc = 0.0;
  for (const auto& u : unit) acc += (mean - u).squaredNorm();
  return acc / n;
}

OscillationResult detect_oscillation(std::span<const double> times, std::span<const double> signal,
                                     double window, const OscillationOptions& opt) {
  if (times.size() != signal.size()) throw ConfigError("detect_oscillation: size mismatch");
  if (times.size() < 4) throw ConfigError("detect_oscillation: too few samples");
  const double t_end = times.back();
  const double t_start = t_end - window;
  if (!(window > 0.0) || t_start < times.front() - 1e-9 * std::max(1.0, std::abs(t_end))) {
    throw ConfigError("detect_oscillation: window longer than the trajectory");
  }
  const auto first = static_cast<std::size_t>(
      std::lower_bound(times.begin(), times.end(), t_start - 1e-12) - times.begin());
  const auto w = signal.subspan(first);

  OscillationResult r;
  r.amplitude = peak_to_peak(w);
  if (w.size() < 4) return r;

  int turns = 0;
  int prev = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double d = w[i] - w[i - 1];
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s != 0 && prev != 0 && s != prev) ++turns;
    if (s != 0) prev = s;
  }
  const bool non_monotone = turns >= 2;

  const std::size_t half = w.size() / 2;
  const double amp_first = peak_to_peak(w.first(half));
  const double amp_second = peak_to_peak(w.subspan(half));
  r.decaying = amp_second < opt.decay_ratio * amp_first;

  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(w.size());
  std::vector<double> ups;
  const auto tw = times.subspan(first);
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double a = w[i - 1] - mean, b = w[i] - mean;
    if (a < 0.0 && b >= 0.0) ups.push_back(tw[i - 1] + (tw[i] - tw[i - 1]) * (-a) / (b - a));
  }
  if (ups.size() >= 2) {
    r.period = (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
  }
  r.oscillating = r.amplitude > opt.amplitude_tol && non_monotone && !r.decaying;
  return r;
}

OscillationResult detect_oscillation(const Trajectory& traj, int site, double window,
                                     const OscillationOptions& opt) {
  if (traj.states.empty()) throw ConfigError("detect_oscillation: empty trajectory");
  if (site < 0 || site >= traj.states.front().size()) {
    throw ConfigError("detect_oscillation: site out of range");
  }
  std::vector<double> z;
  z.reserve(traj.states.size());
  for (const auto& s : traj.states) z.push_back(s.sz[site]);
  return detect_oscillation(traj.times, z, window, opt);
}

// ---------------------------------------------------------------------------
// Classification

MemberResult classify_lattice_trajectory(const Trajectory& tr, const ModelParams& p,
                                         const PhaseOptions& opt) {
  if (tr.states.empty()) throw ConfigError("classify_lattice_trajectory: empty trajectory");
  const int n = tr.states.front().size();
  const double t_cut = opt.transient_fraction * tr.times.back();
  const auto first = static_cast<std::size_t>(
      std::lower_bound(tr.times.begin(), tr.times.end(), t_cut - 1e-12) - tr.times.begin());
  if (tr.times.size() - first < 4) {
    throw ConfigError("classify_lattice_trajectory: too few samples after the transient");
  }
  const std::span<const double> times(tr.times.data() + first, tr.times.size() - first);
  const double window = times.back() - times.front();

  MemberResult r;
  r.seed = tr.seed;
  bool osc = false;
  std::vector<double> z(times.size());
  for (int j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = tr.states[first + i].sz[j];
    const auto o = detect_oscillation(times, z, window, opt.oscillation);
    r.amplitude = std::max(r.amplitude, o.amplitude);
    osc = osc || o.oscillating;
  }
  const SpinLattice& end = tr.states.back();
  r.final_sz_a = end.sz[0];
  r.final_sz_b = end.sz[n > 1 ? 1 : 0];
  r.variance = spin_variance(end);
  if (osc) {
    r.outcome = Outcome::kOSC;
    return r;
  }
  const auto im = build_interaction_matrices(p);
  const auto dm = build_decay_matrix(p);
  Eigen::VectorXd x = end.packed();
  Eigen::VectorXd d;
  mf_rhs_packed(x, im, dm, p, d);
  if (d.cwiseAbs().maxCoeff() > opt.stationary_tol) {
    const auto polished = polish_lattice(x, im, dm, p);
    if (!polished) {
      r.outcome = Outcome::kUnresolved;
      return r;
    }
    x = *polished;
  }
  const SpinLattice fin = SpinLattice::from_packed(x);
  r.final_sz_a = fin.sz[0];
  r.final_sz_b = fin.sz[n > 1 ? 1 : 0];
  double spread = 0.0;
  for (int j = 0; j + 1 < n; ++j) spread = std::max(spread, std::abs(fin.sz[j] - fin.sz[j + 1]));
  if (spread > opt.afm_tol) {
    r.outcome = Outcome::kAFM;
  } else {
    r.outcome = fin.sz.mean() < kBranchSplit ? Outcome::kUniformLow : Outcome::kUniformHigh;
  }
  return r;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kUniformLow: return "ULE";
    case Outcome::kUniformHigh: return "UHE";
    case Outcome::kAFM: return "AFM";
    case Outcome::kOSC: return "OSC";
    case Outcome::kUnresolved: return "unresolved";
  }
  return "unresolved";
}

std::string to_string(EnsembleModel m) {
  return m == EnsembleModel::kBipartite ? "bipartite" : "lattice";
}

EnsembleModel ensemble_model_from_string(const std::string& s) {
  if (s == "bipartite") return EnsembleModel::kBipartite;
  if (s == "lattice") return EnsembleModel::kFullLattice;
  throw ConfigError("unknown ensemble model '" + s + "' (expected bipartite or lattice)");
}

std::uint64_t member_seed(std::uint64_t point_seed, int m) {
  return splitmix64(point_seed ^ splitmix64(static_cast<std::uint64_t>(m) + 1));
}

std::uint64_t point_seed(std::uint64_t base, std::size_t i, std::size_t j) {
  return splitmix64(splitmix64(base) ^ splitmix64((static_cast<std::uint64_t>(i) << 32) ^ j));
}

SpinLattice random_start(int n_sites, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  SpinLattice s(n_sites);
  for (int j = 0; j < n_sites; ++j) s.sz[j] = u(rng);
  return s;
}

BipartiteState random_bipartite_start(std::uint64_t seed) {
  const SpinLattice s = random_start(2, seed);
  return {s.site(0), s.site(1)};
}

MemberResult run_member(const ModelParams& params, const PhaseOptions& opt, std::uint64_t seed) {
  if (opt.model == EnsembleModel::kBipartite) return run_bipartite_member(params, opt, seed);
  return run_lattice_member(params, opt, seed);
}

PhasePoint classify_phase(const ModelParams& params, const PhaseOptions& opt, std::uint64_t seed) {
  params.validate();
  if (opt.ensemble < 8) throw ConfigError("classify_phase: ensemble must have at least 8 members");
  if (!(opt.t_final > 0.0) || !(opt.transient_fraction >= 0.0 && opt.transient_fraction < 1.0)) {
    throw ConfigError("classify_phase: bad time window");
  }
  PhasePoint pt;
  pt.delta = params.delta;
  pt.omega = params.omega;
  auto& diag = pt.diagnostics;

  // Fixed points.
  try {
    pt.fixed_points = uniform_fixed_points(params);
  } catch (const NumericalError& e) {
    diag.warnings.emplace_back(e.what());
  }
  const BipartiteRoots roots = bipartite_fixed_points(params, opt.scan);
  diag.newton_seeds = roots.seeds;
  diag.newton_failed = roots.seeds_failed;
  for (const auto& r : roots.roots) {
    const bool dup = std::any_of(pt.fixed_points.begin(), pt.fixed_points.end(), [&](const auto& f) {
      return same_state(f.state, r.state, 1e-6);
    });
    if (!dup) pt.fixed_points.push_back(r);
  }
  unsigned mask = 0;
  for (auto& fp : pt.fixed_points) {
    fp.stability = classify(fp, params, JacobianMode::kAnalytic, true).verdict;
    if (fp.stability != Stability::kStable) continue;
    mask |= component_of(stationary_outcome(fp.sz_a(), fp.sz_b(), opt.afm_tol));
  }

  // Ensemble.
  pt.members.reserve(opt.ensemble);
  double var_sum = 0.0;
  int ok = 0;
  for (int m = 0; m < opt.ensemble; ++m) {
    const std::uint64_t s = member_seed(seed, m);
    MemberResult r;
    try {
      r = run_member(params, opt, s);
    } catch (const Error& e) {
      r.seed = s;
      r.failed = true;
      ++diag.members_failed;
      pt.members.push_back(r);
      continue;
    }
    ++ok;
    var_sum += r.variance;
    diag.outcome_counts[static_cast<int>(r.outcome)]++;
    diag.max_oscillation_amplitude = std::max(diag.max_oscillation_amplitude, r.amplitude);
    pt.members.push_back(r);
  }
  if (2 * ok < opt.ensemble) {
    throw NumericalError("classify_phase: fewer than half of the ensemble integrated");
  }
  pt.variance = var_sum / ok;

  // Stationary outcomes are fixed points reached dynamically; they count even
  // when the root scan missed them or linearisation is only marginal.
  for (Outcome o : {Outcome::kUniformLow, Outcome::kUniformHigh, Outcome::kAFM, Outcome::kOSC}) {
    if (diag.outcome_counts[static_cast<int>(o)] == 0) continue;
    if (o != Outcome::kOSC && !(mask & component_of(o))) {
      diag.warnings.push_back("ensemble reached " + to_string(o) +
                              " without a matching stable fixed point");
    }
    mask |= component_of(o);
  }
  if (diag.outcome_counts[static_cast<int>(Outcome::kUnresolved)] > 0) {
    diag.warnings.push_back("unresolved ensemble members");
  }
  pt.label = PhaseLabel::from_components(mask);
  return pt;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("linspace: need at least one point");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kDelta: return "delta";
    case SweepAxis::kOmega: return "omega";
    case SweepAxis::kV1: return "v1";
    case SweepAxis::kV2: return "v2";
    case SweepAxis::kGammaM: return "gamma_m";
  }
  return "delta";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  for (SweepAxis a : {SweepAxis::kDelta, SweepAxis::kOmega, SweepAxis::kV1, SweepAxis::kV2,
                      SweepAxis::kGammaM}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown sweep axis '" + s + "'");
}

void set_axis(ModelParams& p, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::kDelta: p.delta = value; break;
    case SweepAxis::kOmega: p.omega = value; break;
    case SweepAxis::kV1: p.v1 = value; break;
    case SweepAxis::kV2: p.v2 = value; break;
    case SweepAxis::kGammaM: p.gamma_m = value; break;
  }
}

PhaseDiagram sweep(const ModelParams& base, const std::vector<double>& deltas,
                   const std::vector<double>& omegas, const PhaseOptions& opt, std::uint64_t seed,
                   int workers) {
  return sweep_grid(base, SweepAxis::kDelta, deltas, SweepAxis::kOmega, omegas, opt, seed,
                    workers);
}

PhaseDiagram sweep_grid(const ModelParams& base, SweepAxis x_axis, const std::vector<double>& xs,
                        SweepAxis y_axis, const std::vector<double>& ys, const PhaseOptions& opt,
                        std::uint64_t seed, int workers) {
  if (xs.empty() || ys.empty()) throw ConfigError("sweep: axes must be non-empty");
  if (x_axis == y_axis) throw ConfigError("sweep: axes must differ");
  base.validate();
  PhaseDiagram d;
  d.x_axis = x_axis;
  d.y_axis = y_axis;
  d.xs = xs;
  d.ys = ys;
  d.base = base;
  d.options = opt;
  d.seed = seed;
  d.started = utc_now();
  const std::size_t total = xs.size() * ys.size();
  d.points.resize(total);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t i = k / ys.size(), j = k % ys.size();
      ModelParams p = base;
      set_axis(p, x_axis, xs[i]);
      set_axis(p, y_axis, ys[j]);
      try {
        d.points[k] = classify_phase(p, opt, point_seed(seed, i, j));
      } catch (const std::exception& e) {
        PhasePoint& pt = d.points[k];
        pt = PhasePoint{};
        pt.delta = p.delta;
        pt.omega = p.omega;
        pt.diagnostics.warnings.emplace_back(e.what());
      }
    }
  };
  workers = std::max(1, workers);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  d.finished = utc_now();
  return d;
}

// ---------------------------------------------------------------------------
// Exports

namespace {

nlohmann::json diagram_header(const PhaseDiagram& d, const nlohmann::json& meta) {
  nlohmann::json h = meta.is_object() ? meta : nlohmann::json::object();
  h["kind"] = "phase-diagram";
  h["version"] = kVersion;
  h["params"] = d.base;
  h["seed"] = d.seed;
  h["ensemble"] = d.options.ensemble;
  h["ensemble_model"] = to_string(d.options.model);
  h["t_final"] = d.options.t_final;
  h["transient_fraction"] = d.options.transient_fraction;
  h["afm_tol"] = d.options.afm_tol;
  h["osc_tol"] = d.options.oscillation.amplitude_tol;
  h["osc_decay_ratio"] = d.options.oscillation.decay_ratio;
  h["stationary_tol"] = d.options.stationary_tol;
  h["x_axis"] = to_string(d.x_axis);
  h["y_axis"] = to_string(d.y_axis);
  h["x_points"] = d.xs.size();
  h["y_points"] = d.ys.size();
  return h;
}

}  // namespace

void write_phase_csv(std::ostream& out, const PhaseDiagram& d, const nlohmann::json& meta) {
  out << "# " << diagram_header(d, meta).dump() << '\n';
  out << to_string(d.x_axis) << ',' << to_string(d.y_axis)
      << ",label,components,tag,code,sigma,n_fixed,n_stable,"
         "n_ule,n_uhe,n_afm,n_osc,n_unresolved,n_failed,max_osc_amplitude,warnings\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < d.points.size(); ++k) {
    const auto& p = d.points[k];
    int stable = 0;
    for (const auto& f : p.fixed_points) stable += f.stability == Stability::kStable;
    const auto& c = p.diagnostics.outcome_counts;
    out << d.xs[k / d.ys.size()] << ',' << d.ys[k % d.ys.size()] << ',' << p.label.name() << ','
        << p.label.components_string() << ',' << to_string(p.label.tag) << ',' << p.label.code()
        << ',' << p.variance << ',' << p.fixed_points.size() << ',' << stable << ',' << c[0] << ','
        << c[1] << ',' << c[2] << ',' << c[3] << ',' << c[4] << ','
        << p.diagnostics.members_failed << ',' << p.diagnostics.max_oscillation_amplitude << ','
        << p.diagnostics.warnings.size() << '\n';
  }
}

void write_phase_grid(std::ostream& out, const PhaseDiagram& d, const nlohmann::json& meta) {
  out << "# " << diagram_header(d, meta).dump() << '\n';
  out << "# rows: " << to_string(d.y_axis) << " descending; columns: " << to_string(d.x_axis)
      << " ascending\n";
  out << std::setprecision(17);
  out << to_string(d.y_axis) << '\\' << to_string(d.x_axis);
  for (double x : d.xs) out << ',' << x;
  out << '\n';
  for (std::size_t jj = d.ys.size(); jj-- > 0;) {
    out << d.ys[jj];
    for (std::size_t i = 0; i < d.xs.size(); ++i) out << ',' << d.at(i, jj).label.code();
    out << '\n';
  }
}

std::array<unsigned char, 3> phase_color(int code) {
  // Indexed by the component bitmask: ULE=1, UHE=2, AFM=4, OSC=8.
  static const std::array<std::array<unsigned char, 3>, 16> table = {{
      {0, 0, 0},        // 0  none
      {70, 130, 180},   // 1  ULE
      {240, 200, 60},   // 2  UHE
      {120, 200, 120},  // 3  ULE/UHE
      {200, 60, 60},    // 4  AFM
      {230, 140, 140},  // 5  AFM/ULE
      {230, 120, 40},   // 6  AFM/UHE
      {150, 90, 60},    // 7  AFM/ULE/UHE (M2)
      {60, 160, 160},   // 8  OSC
      {250, 150, 50},   // 9  OSC/ULE
      {160, 220, 220},  // 10 OSC/UHE
      {100, 60, 120},   // 11 OSC/ULE/UHE (M2)
      {110, 110, 110},  // 12 AFM/OSC
      {150, 70, 190},   // 13 AFM/OSC/ULE (M1)
      {200, 200, 200},  // 14 AFM/OSC/UHE
      {255, 255, 255},  // 15 all four (M2)
  }};
  if (code < 0 || code > 15) return table[0];
  return table[static_cast<std::size_t>(code)];
}

void write_phase_legend(std::ostream& out) {
  out << "code,label,components,tag,r,g,b\n";
  for (int code = 0; code < 16; ++code) {
    const PhaseLabel l = PhaseLabel::from_components(static_cast<unsigned>(code));
    const auto c = phase_color(code);
    out << code << ',' << l.name() << ',' << l.components_string() << ',' << to_string(l.tag)
        << ',' << int(c[0]) << ',' << int(c[1]) << ',' << int(c[2]) << '\n';
  }
}

void write_phase_ppm(std::ostream& out, const PhaseDiagram& d, int scale) {
  if (scale < 1) throw ConfigError("write_phase_ppm: scale must be >= 1");
  const std::size_t w = d.xs.size() * static_cast<std::size_t>(scale);
  const std::size_t h = d.ys.size() * static_cast<std::size_t>(scale);
  out << "P6\n" << w << ' ' << h << "\n255\n";
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t j = d.ys.size() - 1 - y / scale;
    for (std::size_t x = 0; x < w; ++x) {
      const auto c = phase_color(d.at(x / scale, j).label.code());
      out.write(reinterpret_cast<const char*>(c.data()), 3);
    }
  }
}

}  // namespace rydchain
