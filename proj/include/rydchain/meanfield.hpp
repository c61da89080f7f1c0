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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydchain/model.hpp"
#include "rydchain/ode.hpp"

namespace rydchain {

using Bloch = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Per-site spin expectations S_xi^j = Tr(sigma_xi^j rho) / 2.
struct SpinLattice {
  Eigen::VectorXd sx, sy, sz;

  SpinLattice() = default;
  explicit SpinLattice(int n)
      : sx(Eigen::VectorXd::Zero(n)), sy(Eigen::VectorXd::Zero(n)), sz(Eigen::VectorXd::Zero(n)) {}

  static SpinLattice uniform(int n, const Bloch& s);
  /// Even sites carry \p a, odd sites \p b.
  static SpinLattice alternating(int n, const Bloch& a, const Bloch& b);
  static SpinLattice from_packed(const Eigen::VectorXd& packed);

  int size() const { return static_cast<int>(sz.size()); }
  Bloch site(int j) const { return {sx[j], sy[j], sz[j]}; }
  /// [sx; sy; sz], the layout used by the integrator.
  Eigen::VectorXd packed() const;
};

/// Two-sublattice ansatz: A on even sites, B on odd sites.
struct BipartiteState {
  Bloch a = Bloch::Zero();
  Bloch b = Bloch::Zero();

  static BipartiteState from_packed(const Vector6d& v);
  static BipartiteState symmetric(const Bloch& s) { return {s, s}; }
  Vector6d packed() const;
  BipartiteState swapped() const { return {b, a}; }
};

enum class Stability { kStable, kUnstable, kMarginal, kUnknown };
std::string to_string(Stability s);

/// Uniform steady states split at S_z = -1/4.
enum class UniformBranch { kLow, kHigh };
UniformBranch uniform_branch(double sz);
std::string to_string(UniformBranch b);

struct FixedPoint {
  enum class Kind { kUniform, kBipartite };
  Kind kind = Kind::kUniform;
  BipartiteState state;  // uniform points carry a == b
  double residual = 0.0;
  Stability stability = Stability::kUnknown;

  bool uniform() const { return kind == Kind::kUniform; }
  double sz_a() const { return state.a.z(); }
  double sz_b() const { return state.b.z(); }
};

/// S_V = [V1 (1 - 2 S_z) - V2 (1 + 2 S_z)] / 4 for a neighbour with
/// population \p sz_neighbour.
inline double interaction_shift(double sz_neighbour, double v1, double v2) {
  return (v1 * (1.0 - 2.0 * sz_neighbour) - v2 * (1.0 + 2.0 * sz_neighbour)) / 4.0;
}

/// Nearest-neighbour bonds per site of the chain (1 for two sites, else 2).
int chain_neighbours(int n_sites);

/// Weight applied to each bond of the lattice interaction sum so that a site
/// feels \c coordination nearest neighbours: coordination / chain_neighbours.
/// With coordination 2 on a ring the sum is the plain lattice sum.
double bond_weight(const ModelParams& params);

/// Full-lattice mean-field equations. Interactions enter through the lattice
/// sum over \p im scaled by bond_weight; decay through the off-diagonal of \p dm.
SpinLattice mf_rhs(const SpinLattice& state, const InteractionMatrices& im,
                   const DecayMatrix& dm, const ModelParams& params);

/// Allocation-free variant on the packed layout, used by the integrator.
void mf_rhs_packed(const Eigen::VectorXd& y, const InteractionMatrices& im,
                   const DecayMatrix& dm, const ModelParams& params, Eigen::VectorXd& dydt);

/// Detuning seen by a uniform lattice, Delta + z S_V(S_z) (plus the NNN tail).
double uniform_effective_detuning(double sz, const ModelParams& params);

Bloch uniform_rhs(const Bloch& s, const ModelParams& params);

/// Left-hand side of the scalar uniform steady-state condition,
/// Dt^2 + (gamma_s/2 - kappa S_z)^2 + Omega^2 S_z / (2 S_z + 1).
double uniform_sz_equation(double sz, const ModelParams& params);

/// All uniform steady states with S_z in (-1/2, 1/2]. Throws NumericalError
/// if the scan finds no root.
std::vector<FixedPoint> uniform_fixed_points(const ModelParams& params);

/// Closed-form uniform S_z for V1 = -V2 (Cardano form). Every branch of the
/// complex cube root is evaluated and the real roots in (-1/2, 1/2] are
/// returned in ascending order. Throws DomainError unless V1 == -V2 and
/// kappa > 0.
std::vector<double> uniform_analytic(const ModelParams& params);

BipartiteState bipartite_rhs(const BipartiteState& st, const ModelParams& params);
Vector6d bipartite_rhs(const Vector6d& st, const ModelParams& params);

/// Hand-differentiated Jacobians of the uniform and bipartite equations.
Eigen::Matrix3d uniform_jacobian_analytic(const Bloch& s, const ModelParams& params);
Matrix6d bipartite_jacobian_analytic(const Vector6d& st, const ModelParams& params);

struct NewtonOptions {
  int max_iter = 100;
  double tol = 1e-10;
};

/// Damped Newton on the bipartite equations. Returns nothing if the iteration
/// fails to reach \p opt.tol or leaves the Bloch ball.
std::optional<FixedPoint> newton_bipartite(const Vector6d& seed, const ModelParams& params,
                                           const NewtonOptions& opt = {});

struct BipartiteScanOptions {
  int grid = 21;
  double dedup_tol = 1e-6;
  NewtonOptions newton;
};

struct BipartiteRoots {
  std::vector<FixedPoint> roots;
  int seeds = 0;
  int seeds_failed = 0;
};

/// Multi-start Newton over a deterministic (S_z^A, S_z^B) seed grid.
BipartiteRoots bipartite_fixed_points(const ModelParams& params,
                                      const BipartiteScanOptions& opt = {});

// ---------------------------------------------------------------------------
// Time integration

struct Trajectory {
  std::vector<double> times;
  std::vector<SpinLattice> states;
  std::string integrator = "dopri5";
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  std::uint64_t seed = 0;
  OdeStats stats;
  bool complete = true;
};

struct BipartiteTrajectory {
  std::vector<double> times;
  std::vector<BipartiteState> states;
  OdeStats stats;
  bool complete = true;
};

struct IntegrateOptions {
  OdeOptions ode{1e-9, 1e-7};
  std::vector<double> sample_times;  // empty: only t_final
  std::uint64_t seed = 0;            // recorded, not consumed
};

/// Thrown on integrator failure; carries the samples collected so far.
class TrajectoryError : public IntegrationError {
 public:
  TrajectoryError(const IntegrationError& e, Trajectory partial)
      : IntegrationError(e), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

Trajectory integrate(const SpinLattice& state0, const ModelParams& params, double t_final,
                     const IntegrateOptions& options = {});

BipartiteTrajectory integrate_bipartite(const BipartiteState& state0, const ModelParams& params,
                                        double t_final, const IntegrateOptions& options = {});

/// Evenly spaced sample times t0, t0 + dt, ..., t_final (t_final always included).
std::vector<double> sample_grid(double t0, double t_final, double dt);

// ---------------------------------------------------------------------------
// Critical drive

struct CriticalPoint {
  double omega_c = 0.0;  // where the UHE branch changes stability
  double sz = 0.0;       // UHE root at omega_c
  double formula = 0.0;  // closed-form Omega_c evaluated at sz
  double max_real = 0.0; // leading eigenvalue real part at omega_c
};

struct CriticalOptions {
  double omega_min = 0.0;
  double omega_max = 0.0;  // 0 grows the window until the UHE branch is stable
  int scan_points = 400;
  double tol = 1e-8;
};

/// Closed-form Omega_c for a given UHE population S_z:
/// sqrt(-(2 S_z + 1)/S_z [Dt^2 + (gamma_s/2 - (N-1) gamma_m S_z)^2]).
double critical_omega_formula(double sz, const ModelParams& params);

/// Locates the drive at which the UHE branch of the uniform solution becomes
/// linearly stable against bipartite perturbations, by scan and bisection.
/// Throws NumericalError if no stability change lies in the window.
CriticalPoint critical_omega(const ModelParams& params, const CriticalOptions& opt = {});

/// sqrt(-S_z (2 S_z + 1)) (N - 1) gamma_m at the self-consistent S_z.
double critical_omega_asymptotic(const ModelParams& params, const CriticalOptions& opt = {});
double critical_omega_asymptotic(double sz, const ModelParams& params);

/// Leading real part of the 6x6 bipartite spectrum at the highest uniform
/// root; nullopt when no root has S_z > -1/4.
std::optional<std::pair<double, double>> uhe_branch_growth(const ModelParams& params);

}  // namespace rydchain
