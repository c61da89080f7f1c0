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

#include "rydchain/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "rydchain/errors.hpp"
#include "rydchain/stability.hpp"

namespace rydchain {

namespace {

constexpr double kNnnWeight = 1.0 / 64.0;  // (1/2)^6

double nnn_weight(const ModelParams& p) {
  return p.range == InteractionRange::kNextNearest ? kNnnWeight : 0.0;
}

// d S_V / d S_z for a single neighbour.
double shift_slope(const ModelParams& p) { return -(p.v1 + p.v2) / 2.0; }

bool inside_ball(const Bloch& s) { return s.norm() <= 0.5 + 1e-6; }

}  // namespace

// ---------------------------------------------------------------------------
// State containers

SpinLattice SpinLattice::uniform(int n, const Bloch& s) {
  SpinLattice out(n);
  out.sx.setConstant(s.x());
  out.sy.setConstant(s.y());
  out.sz.setConstant(s.z());
  return out;
}

SpinLattice SpinLattice::alternating(int n, const Bloch& a, const Bloch& b) {
  SpinLattice out(n);
  for (int j = 0; j < n; ++j) {
    const Bloch& s = (j % 2 == 0) ? a : b;
    out.sx[j] = s.x();
    out.sy[j] = s.y();
    out.sz[j] = s.z();
  }
  return out;
}

SpinLattice SpinLattice::from_packed(const Eigen::VectorXd& packed) {
  if (packed.size() % 3 != 0) throw ConfigError("packed spin lattice length must be 3N");
  const Eigen::Index n = packed.size() / 3;
  SpinLattice out;
  out.sx = packed.segment(0, n);
  out.sy = packed.segment(n, n);
  out.sz = packed.segment(2 * n, n);
  return out;
}

Eigen::VectorXd SpinLattice::packed() const {
  const Eigen::Index n = sz.size();
  Eigen::VectorXd out(3 * n);
  out << sx, sy, sz;
  return out;
}

BipartiteState BipartiteState::from_packed(const Vector6d& v) {
  return {v.head<3>(), v.tail<3>()};
}

Vector6d BipartiteState::packed() const {
  Vector6d v;
  v << a, b;
  return v;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::kStable: return "stable";
    case Stability::kUnstable: return "unstable";
    case Stability::kMarginal: return "marginal";
    case Stability::kUnknown: break;
  }
  return "unknown";
}

UniformBranch uniform_branch(double sz) {
  return sz < -0.25 ? UniformBranch::kLow : UniformBranch::kHigh;
}

std::string to_string(UniformBranch b) { return b == UniformBranch::kLow ? "ULE" : "UHE"; }

// ---------------------------------------------------------------------------
// Full lattice

int chain_neighbours(int n_sites) { return n_sites <= 2 ? 1 : 2; }

double bond_weight(const ModelParams& p) { return p.coordination / chain_neighbours(p.n_sites); }

void mf_rhs_packed(const Eigen::VectorXd& y, const InteractionMatrices& im,
                   const DecayMatrix& dm, const ModelParams& params, Eigen::VectorXd& dydt) {
  const Eigen::Index n = params.n_sites;
  if (y.size() != 3 * n || im.v1.rows() != n || im.v1.cols() != n || im.v2.rows() != n ||
      im.v2.cols() != n || dm.gamma.rows() != n || dm.gamma.cols() != n) {
    throw ConfigError("mf_rhs: dimension mismatch");
  }
  const auto sx = y.segment(0, n);
  const auto sy = y.segment(n, n);
  const auto sz = y.segment(2 * n, n);

  // sum_k S_V^{jk} = sum_k [V1_jk (1 - 2 Sz_k) - V2_jk (1 + 2 Sz_k)] / 4
  const Eigen::VectorXd one_minus = (1.0 - 2.0 * sz.array()).matrix();
  const Eigen::VectorXd one_plus = (1.0 + 2.0 * sz.array()).matrix();
  const Eigen::VectorXd shift = bond_weight(params) * (im.v1 * one_minus - im.v2 * one_plus) / 4.0;

  // Collective decay only couples distinct sites.
  Eigen::MatrixXd off = dm.gamma;
  off.diagonal().setZero();
  const Eigen::VectorXd gx = off * sx;
  const Eigen::VectorXd gy = off * sy;

  const double gs = params.gamma_s;
  dydt.resize(3 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double det = params.delta + shift[j];
    dydt[j] = -0.5 * gs * sx[j] + det * sy[j] + sz[j] * gx[j];
    dydt[n + j] = -0.5 * gs * sy[j] - det * sx[j] - params.omega * sz[j] + sz[j] * gy[j];
    dydt[2 * n + j] = -0.5 * gs * (1.0 + 2.0 * sz[j]) + params.omega * sy[j] -
                      (sx[j] * gx[j] + sy[j] * gy[j]);
  }
}

SpinLattice mf_rhs(const SpinLattice& state, const InteractionMatrices& im,
                   const DecayMatrix& dm, const ModelParams& params) {
  if (state.sx.size() != state.sz.size() || state.sy.size() != state.sz.size()) {
    throw ConfigError("mf_rhs: ragged spin lattice");
  }
  Eigen::VectorXd d;
  mf_rhs_packed(state.packed(), im, dm, params, d);
  return SpinLattice::from_packed(d);
}

// ---------------------------------------------------------------------------
// Uniform ansatz

double uniform_effective_detuning(double sz, const ModelParams& p) {
  return p.delta + p.coordination * (1.0 + nnn_weight(p)) * interaction_shift(sz, p.v1, p.v2);
}

Bloch uniform_rhs(const Bloch& s, const ModelParams& p) {
  const double dt = uniform_effective_detuning(s.z(), p);
  const double k = p.kappa();
  const double hg = 0.5 * p.gamma_s;
  return {-hg * s.x() + dt * s.y() + k * s.z() * s.x(),
          -hg * s.y() - dt * s.x() - p.omega * s.z() + k * s.z() * s.y(),
          -hg * (1.0 + 2.0 * s.z()) + p.omega * s.y() - k * (s.x() * s.x() + s.y() * s.y())};
}

double uniform_sz_equation(double sz, const ModelParams& p) {
  const double dt = uniform_effective_detuning(sz, p);
  const double g = 0.5 * p.gamma_s - p.kappa() * sz;
  return dt * dt + g * g + p.omega * p.omega * sz / (2.0 * sz + 1.0);
}

namespace {

// (2 S_z + 1) times the uniform condition; same sign on (-1/2, 1/2], no pole.
double cleared_sz_equation(double sz, const ModelParams& p) {
  const double dt = uniform_effective_detuning(sz, p);
  const double g = 0.5 * p.gamma_s - p.kappa() * sz;
  return (2.0 * sz + 1.0) * (dt * dt + g * g) + p.omega * p.omega * sz;
}

// Transverse components from the two linear equations at fixed S_z.
Bloch uniform_state_from_sz(double sz, const ModelParams& p) {
  const double dt = uniform_effective_detuning(sz, p);
  const double g = 0.5 * p.gamma_s - p.kappa() * sz;
  const double d = g * g + dt * dt;
  if (d == 0.0) return {0.0, 0.0, sz};
  return {-p.omega * sz * dt / d, -p.omega * sz * g / d, sz};
}

// A few Newton steps on the 3-component uniform equations.
Bloch polish_uniform(Bloch s, const ModelParams& p) {
  for (int it = 0; it < 8; ++it) {
    const Bloch f = uniform_rhs(s, p);
    if (f.cwiseAbs().maxCoeff() < 1e-14) break;
    const Eigen::Matrix3d j = uniform_jacobian_analytic(s, p);
    Eigen::FullPivLU<Eigen::Matrix3d> lu(j);
    if (!lu.isInvertible()) break;
    const Bloch next = s - lu.solve(f);
    if (uniform_rhs(next, p).cwiseAbs().maxCoeff() >= f.cwiseAbs().maxCoeff()) break;
    s = next;
  }
  return s;
}

}  // namespace

std::vector<FixedPoint> uniform_fixed_points(const ModelParams& params) {
  params.validate();
  std::vector<FixedPoint> out;
  auto push = [&](const Bloch& s) {
    FixedPoint fp;
    fp.kind = FixedPoint::Kind::kUniform;
    fp.state = BipartiteState::symmetric(s);
    fp.residual = uniform_rhs(s, params).cwiseAbs().maxCoeff();
    out.push_back(fp);
  };

  if (params.omega == 0.0) {
    // Undriven: the all-|1> state is the exact (and only) uniform root.
    push({0.0, 0.0, -0.5});
    return out;
  }

  constexpr int kScan = 2000;
  const double lo = -0.5 + 1e-6;
  const double hi = 0.5;
  double x0 = lo;
  double f0 = cleared_sz_equation(x0, params);
  std::vector<double> roots;
  for (int i = 1; i <= kScan; ++i) {
    const double x1 = lo + (hi - lo) * i / kScan;
    const double f1 = cleared_sz_equation(x1, params);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if (f0 * f1 < 0.0) {
      double a = x0, b = x1, fa = f0;
      for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = cleared_sz_equation(m, params);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == 0.0) roots.push_back(x0);

  for (double sz : roots) {
    const Bloch s = polish_uniform(uniform_state_from_sz(sz, params), params);
    if (uniform_rhs(s, params).cwiseAbs().maxCoeff() <= 1e-10) push(s);
  }
  if (out.empty()) {
    throw NumericalError("uniform_fixed_points: root scan found no physical root");
  }
  return out;
}

std::vector<double> uniform_analytic(const ModelParams& p) {
  if (p.v1 != -p.v2) throw DomainError("uniform_analytic requires V1 == -V2");
  const double kappa = p.kappa();
  if (!(kappa > 0.0)) throw DomainError("uniform_analytic requires (N-1) gamma_m > 0");
  using cd = std::complex<double>;
  const double gs = p.gamma_s;
  const double dt = uniform_effective_detuning(0.0, p);  // constant when V1 = -V2
  const double om2 = p.omega * p.omega;
  const double big_gamma = kappa + gs;
  const double c1 = 2.0 * dt * dt + om2;
  const double inner = -big_gamma * big_gamma + 6.0 * c1;
  const double lin = big_gamma * big_gamma * big_gamma + 36.0 * big_gamma * dt * dt -
                     9.0 * (kappa - 2.0 * gs) * om2;
  const double c2 = inner * inner * inner + lin * lin;
  const cd c3 = -kappa * kappa * kappa - 3.0 * gs * kappa * kappa -
                3.0 * (gs * gs + 3.0 * (4.0 * dt * dt - om2)) * kappa -
                gs * (gs * gs + 18.0 * c1) + std::sqrt(cd(c2, 0.0));
  const cd w(-1.0, std::sqrt(3.0));
  const cd principal = std::pow(c3, 1.0 / 3.0);
  const double two_pi_3 = 2.0 * M_PI / 3.0;

  std::vector<double> roots;
  for (int branch = 0; branch < 3; ++branch) {
    const cd cr = principal * std::polar(1.0, two_pi_3 * branch);
    const cd u = w * cr;
    if (std::abs(u) == 0.0) continue;
    const cd sz = (-2.0 * kappa + 4.0 * gs + 4.0 * (big_gamma * big_gamma - 6.0 * c1) / u + u) /
                  (12.0 * kappa);
    if (std::abs(sz.imag()) > 1e-9) continue;
    const double r = sz.real();
    if (r <= -0.5 || r > 0.5) continue;
    bool dup = false;
    for (double q : roots) dup = dup || std::abs(q - r) < 1e-12;
    if (!dup) roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// ---------------------------------------------------------------------------
// Bipartite ansatz

namespace {

Bloch sublattice_rhs(const Bloch& a, const Bloch& b, const ModelParams& p) {
  const double n = p.n_sites;
  const double det = p.delta + p.coordination * interaction_shift(b.z(), p.v1, p.v2) +
                     p.coordination * nnn_weight(p) * interaction_shift(a.z(), p.v1, p.v2);
  const double q = n * p.gamma_m / 2.0;
  const double w = (n - 2.0) / n;
  const double cx = w * a.x() + b.x();
  const double cy = w * a.y() + b.y();
  const double hg = 0.5 * p.gamma_s;
  const double perp2 = a.x() * a.x() + a.y() * a.y();
  const double dab = a.x() * b.x() + a.y() * b.y();
  return {-hg * a.x() + det * a.y() + q * cx * a.z(),
          -det * a.x() - hg * a.y() + (q * cy - p.omega) * a.z(),
          p.omega * a.y() - hg * (1.0 + 2.0 * a.z()) - (n - 2.0) / 2.0 * p.gamma_m * perp2 -
              q * dab};
}

// Rows of the Jacobian for sublattice "a" against (a, b) coordinates.
void sublattice_jacobian(const Bloch& a, const Bloch& b, const ModelParams& p,
                         Eigen::Ref<Eigen::Matrix<double, 3, 6>> rows) {
  const double n = p.n_sites;
  const double slope = shift_slope(p);
  const double det = p.delta + p.coordination * interaction_shift(b.z(), p.v1, p.v2) +
                     p.coordination * nnn_weight(p) * interaction_shift(a.z(), p.v1, p.v2);
  const double ddet_db = p.coordination * slope;
  const double ddet_da = p.coordination * nnn_weight(p) * slope;
  const double q = n * p.gamma_m / 2.0;
  const double w = (n - 2.0) / n;
  const double cx = w * a.x() + b.x();
  const double cy = w * a.y() + b.y();
  const double hg = 0.5 * p.gamma_s;
  const double gperp = (n - 2.0) * p.gamma_m;

  rows.setZero();
  rows(0, 0) = -hg + q * w * a.z();
  rows(0, 1) = det;
  rows(0, 2) = q * cx + a.y() * ddet_da;
  rows(0, 3) = q * a.z();
  rows(0, 5) = a.y() * ddet_db;

  rows(1, 0) = -det;
  rows(1, 1) = -hg + q * w * a.z();
  rows(1, 2) = q * cy - p.omega - a.x() * ddet_da;
  rows(1, 4) = q * a.z();
  rows(1, 5) = -a.x() * ddet_db;

  rows(2, 0) = -gperp * a.x() - q * b.x();
  rows(2, 1) = p.omega - gperp * a.y() - q * b.y();
  rows(2, 2) = -p.gamma_s;
  rows(2, 3) = -q * a.x();
  rows(2, 4) = -q * a.y();
}

}  // namespace

Vector6d bipartite_rhs(const Vector6d& st, const ModelParams& params) {
  const Bloch a = st.head<3>();
  const Bloch b = st.tail<3>();
  Vector6d out;
  out << sublattice_rhs(a, b, params), sublattice_rhs(b, a, params);
  return out;
}

BipartiteState bipartite_rhs(const BipartiteState& st, const ModelParams& params) {
  return {sublattice_rhs(st.a, st.b, params), sublattice_rhs(st.b, st.a, params)};
}

Eigen::Matrix3d uniform_jacobian_analytic(const Bloch& s, const ModelParams& p) {
  const double dt = uniform_effective_detuning(s.z(), p);
  const double ddt = p.coordination * (1.0 + nnn_weight(p)) * shift_slope(p);
  const double k = p.kappa();
  const double hg = 0.5 * p.gamma_s;
  Eigen::Matrix3d j;
  j << -hg + k * s.z(), dt, s.y() * ddt + k * s.x(),
       -dt, -hg + k * s.z(), -s.x() * ddt - p.omega + k * s.y(),
       -2.0 * k * s.x(), p.omega - 2.0 * k * s.y(), -p.gamma_s;
  return j;
}

Matrix6d bipartite_jacobian_analytic(const Vector6d& st, const ModelParams& params) {
  const Bloch a = st.head<3>();
  const Bloch b = st.tail<3>();
  Matrix6d j;
  Eigen::Matrix<double, 3, 6> rows_a, rows_b;
  sublattice_jacobian(a, b, params, rows_a);
  sublattice_jacobian(b, a, params, rows_b);
  j.topRows<3>() = rows_a;
  // Rows for B were built against (b, a); swap the column blocks back.
  j.block<3, 3>(3, 0) = rows_b.rightCols<3>();
  j.block<3, 3>(3, 3) = rows_b.leftCols<3>();
  return j;
}

std::optional<FixedPoint> newton_bipartite(const Vector6d& seed, const ModelParams& params,
                                           const NewtonOptions& opt) {
  Vector6d x = seed;
  Vector6d f = bipartite_rhs(x, params);
  double fn = f.cwiseAbs().maxCoeff();
  for (int it = 0; it < opt.max_iter && fn > 1e-13; ++it) {
    const Matrix6d j = bipartite_jacobian_analytic(x, params);
    Eigen::FullPivLU<Matrix6d> lu(j);
    if (!lu.isInvertible()) return std::nullopt;
    const Vector6d step = -lu.solve(f);
    if (!step.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Vector6d trial = x + lambda * step;
      const Vector6d ft = bipartite_rhs(trial, params);
      const double ftn = ft.cwiseAbs().maxCoeff();
      if (ftn < fn) {
        x = trial;
        f = ft;
        fn = ftn;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
    if (x.cwiseAbs().maxCoeff() > 1.0) return std::nullopt;
  }
  if (!(fn <= opt.tol)) return std::nullopt;
  FixedPoint fp;
  fp.kind = FixedPoint::Kind::kBipartite;
  fp.state = BipartiteState::from_packed(x);
  fp.residual = fn;
  if (!inside_ball(fp.state.a) || !inside_ball(fp.state.b)) return std::nullopt;
  return fp;
}

namespace {

// Transverse components solving the four linear equations at fixed (S_z^A, S_z^B).
Vector6d bipartite_seed(double za, double zb, const ModelParams& p) {
  Vector6d x;
  x << 0.0, 0.0, za, 0.0, 0.0, zb;
  const Matrix6d j = bipartite_jacobian_analytic(x, p);
  // f is affine in the transverse coordinates at fixed S_z.
  const int idx[4] = {0, 1, 3, 4};
  Eigen::Matrix4d a;
  Eigen::Vector4d rhs;
  const Vector6d f0 = bipartite_rhs(x, p);
  for (int r = 0; r < 4; ++r) {
    rhs[r] = -f0[idx[r]];
    for (int c = 0; c < 4; ++c) a(r, c) = j(idx[r], idx[c]);
  }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(a);
  if (lu.isInvertible()) {
    const Eigen::Vector4d t = lu.solve(rhs);
    for (int r = 0; r < 4; ++r) x[idx[r]] = t[r];
  }
  return x;
}

}  // namespace

BipartiteRoots bipartite_fixed_points(const ModelParams& params,
                                      const BipartiteScanOptions& opt) {
  params.validate();
  BipartiteRoots out;
  const int g = std::max(opt.grid, 2);
  const double lo = -0.5 + 0.5 / g;
  const double hi = 0.5 - 0.5 / g;
  auto add = [&](const FixedPoint& fp) {
    const Vector6d v = fp.state.packed();
    for (const auto& r : out.roots) {
      if ((r.state.packed() - v).cwiseAbs().maxCoeff() < opt.dedup_tol) return;
    }
    out.roots.push_back(fp);
  };
  for (int i = 0; i < g; ++i) {
    for (int k = 0; k < g; ++k) {
      const double za = lo + (hi - lo) * i / (g - 1);
      const double zb = lo + (hi - lo) * k / (g - 1);
      ++out.seeds;
      auto fp = newton_bipartite(bipartite_seed(za, zb, params), params, opt.newton);
      if (!fp) {
        ++out.seeds_failed;
        continue;
      }
      add(*fp);
      // Relabelled partner is also a root.
      FixedPoint swapped = *fp;
      swapped.state = fp->state.swapped();
      swapped.residual = bipartite_rhs(swapped.state.packed(), params).cwiseAbs().maxCoeff();
      if (swapped.residual <= opt.newton.tol) add(swapped);
    }
  }
  for (auto& r : out.roots) {
    if ((r.state.a - r.state.b).cwiseAbs().maxCoeff() < opt.dedup_tol) {
      r.kind = FixedPoint::Kind::kUniform;
    }
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const FixedPoint& x, const FixedPoint& y) {
    if (x.sz_a() != y.sz_a()) return x.sz_a() < y.sz_a();
    return x.sz_b() < y.sz_b();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Integration

std::vector<double> sample_grid(double t0, double t_final, double dt) {
  std::vector<double> out;
  if (!(dt > 0.0)) return {t_final};
  const auto n = static_cast<long>(std::floor((t_final - t0) / dt + 1e-9));
  out.reserve(static_cast<std::size_t>(n) + 2);
  for (long i = 0; i <= n; ++i) out.push_back(t0 + dt * static_cast<double>(i));
  if (out.empty() || t_final - out.back() > 1e-12 * std::max(1.0, std::abs(t_final))) {
    out.push_back(t_final);
  } else {
    out.back() = t_final;
  }
  return out;
}

namespace {

std::vector<double> resolve_samples(const IntegrateOptions& options, double t_final) {
  if (!(t_final > 0.0)) throw ConfigError("integrate: t_final must be positive");
  std::vector<double> s = options.sample_times;
  if (s.empty()) s = {0.0, t_final};
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw ConfigError("integrate: sample times must increase");
  }
  if (s.front() < 0.0 || s.back() > t_final) {
    throw ConfigError("integrate: sample times must lie in [0, t_final]");
  }
  if (s.back() < t_final) s.push_back(t_final);
  return s;
}

}  // namespace

Trajectory integrate(const SpinLattice& state0, const ModelParams& params, double t_final,
                     const IntegrateOptions& options) {
  params.validate();
  if (state0.size() != params.n_sites) throw ConfigError("integrate: state size != n_sites");
  const auto samples = resolve_samples(options, t_final);
  const InteractionMatrices im = build_interaction_matrices(params);
  const DecayMatrix dm = build_decay_matrix(params);

  Trajectory traj;
  traj.abs_tol = options.ode.abs_tol;
  traj.rel_tol = options.ode.rel_tol;
  traj.seed = options.seed;
  auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    mf_rhs_packed(y, im, dm, params, dy);
  };
  auto obs = [&](double t, const Eigen::VectorXd& y) {
    traj.times.push_back(t);
    traj.states.push_back(SpinLattice::from_packed(y));
    return true;
  };
  try {
    traj.stats = integrate_dopri5(rhs, state0.packed(), 0.0, samples, obs, options.ode);
  } catch (const IntegrationError& e) {
    traj.complete = false;
    throw TrajectoryError(e, std::move(traj));
  }
  return traj;
}

BipartiteTrajectory integrate_bipartite(const BipartiteState& state0, const ModelParams& params,
                                        double t_final, const IntegrateOptions& options) {
  params.validate();
  const auto samples = resolve_samples(options, t_final);
  BipartiteTrajectory traj;
  auto rhs = [&](double, const Vector6d& y, Vector6d& dy) { dy = bipartite_rhs(y, params); };
  auto obs = [&](double t, const Vector6d& y) {
    traj.times.push_back(t);
    traj.states.push_back(BipartiteState::from_packed(y));
    return true;
  };
  traj.stats = integrate_dopri5(rhs, state0.packed(), 0.0, samples, obs, options.ode);
  return traj;
}

// ---------------------------------------------------------------------------
// Critical drive

double critical_omega_formula(double sz, const ModelParams& p) {
  if (sz == 0.0) return std::numeric_limits<double>::infinity();
  const double dt = uniform_effective_detuning(sz, p);
  const double g = 0.5 * p.gamma_s - p.kappa() * sz;
  const double v = -(2.0 * sz + 1.0) / sz * (dt * dt + g * g);
  return v <= 0.0 ? 0.0 : std::sqrt(v);
}

std::optional<std::pair<double, double>> uhe_branch_growth(const ModelParams& params) {
  const auto roots = uniform_fixed_points(params);
  const FixedPoint* top = nullptr;
  for (const auto& r : roots) {
    if (r.sz_a() > -0.25 && (!top || r.sz_a() > top->sz_a())) top = &r;
  }
  if (!top) return std::nullopt;
  const StabilityReport rep =
      classify(*top, params, JacobianMode::kAnalytic, /*embed_bipartite=*/true);
  return std::make_pair(rep.max_real, top->sz_a());
}

CriticalPoint critical_omega(const ModelParams& params, const CriticalOptions& opt) {
  params.validate();
  ModelParams p = params;
  auto growth = [&](double omega) {
    p.omega = omega;
    return uhe_branch_growth(p);
  };
  auto stable_at = [&](double omega) {
    const auto g = growth(omega);
    return g && g->first < 0.0;
  };

  double hi = opt.omega_max;
  if (hi <= 0.0) {
    hi = std::max(1.0, 2.0 * opt.omega_min);
    while (!stable_at(hi)) {
      hi *= 2.0;
      if (hi > 1e6) throw NumericalError("critical_omega: UHE branch never stabilises");
    }
  } else if (!stable_at(hi)) {
    throw NumericalError("critical_omega: UHE branch unstable at the top of the window");
  }

  // Walk down from the stable end to the first drive where the branch is
  // unstable or absent.
  const double lo = opt.omega_min;
  const int n = std::max(opt.scan_points, 2);
  double a = lo, b = hi;
  bool found = false;
  for (int i = n - 1; i >= 0; --i) {
    const double w = lo + (hi - lo) * i / (n - 1);
    if (!stable_at(w)) {
      a = w;
      b = lo + (hi - lo) * (i + 1) / (n - 1);
      found = true;
      break;
    }
  }
  if (!found) throw NumericalError("critical_omega: no stability change in the scan window");

  while (b - a > opt.tol * std::max(1.0, b)) {
    const double m = 0.5 * (a + b);
    if (stable_at(m)) b = m; else a = m;
  }
  CriticalPoint cp;
  cp.omega_c = b;
  const auto g = growth(b);
  if (g) {
    cp.max_real = g->first;
    cp.sz = g->second;
  }
  p.omega = b;
  cp.formula = critical_omega_formula(cp.sz, p);
  return cp;
}

double critical_omega_asymptotic(double sz, const ModelParams& params) {
  const double v = -sz * (2.0 * sz + 1.0);
  return v <= 0.0 ? 0.0 : std::sqrt(v) * params.kappa();
}

double critical_omega_asymptotic(const ModelParams& params, const CriticalOptions& opt) {
  const CriticalPoint cp = critical_omega(params, opt);
  return critical_omega_asymptotic(cp.sz, params);
}

}  // namespace rydchain
