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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rydchain/meanfield.hpp"
#include "rydchain/stability.hpp"

namespace rydchain {

// ---------------------------------------------------------------------------
// Labels

enum class Component : unsigned { kULE = 1u, kUHE = 2u, kAFM = 4u, kOSC = 8u };

enum class MultistableTag { kNone, kBistable, kM1, kM2, kMulti };
std::string to_string(MultistableTag t);

/// Set of coexisting long-time behaviours at one parameter point.
struct PhaseLabel {
  unsigned components = 0;  // bitmask of Component
  MultistableTag tag = MultistableTag::kNone;

  static PhaseLabel from_components(unsigned mask);
  bool has(Component c) const { return (components & static_cast<unsigned>(c)) != 0; }
  int count() const;
  bool uniform_only() const;
  /// "AFM/OSC/ULE" style; "none" when empty.
  std::string components_string() const;
  /// Tag name when multistable, otherwise the component string.
  std::string name() const;
  /// Integer code for grid exports (the component bitmask, 0..15).
  int code() const { return static_cast<int>(components); }
};

// ---------------------------------------------------------------------------
// Order parameter and dynamics diagnostics

/// Mean squared deviation of unit-normalised site spins from their average.
/// Throws DomainError if a site has zero Bloch length.
double spin_variance(const SpinLattice& lattice);

struct OscillationResult {
  bool oscillating = false;
  double amplitude = 0.0;         // peak-to-peak over the window
  std::optional<double> period;   // from upward zero crossings of the detrended signal
  bool decaying = false;          // envelope shrinking across the window
};

struct OscillationOptions {
  double amplitude_tol = 1e-3;
  // Second-half over first-half amplitude below this ratio counts as a
  // damped transient rather than a sustained oscillation.
  double decay_ratio = 0.9;
};

/// Examines the trailing \p window of a sampled signal. Throws ConfigError
/// when the window is longer than the samples cover.
OscillationResult detect_oscillation(std::span<const double> times,
                                     std::span<const double> signal, double window,
                                     const OscillationOptions& opt = {});

/// Convenience overload: S_z of \p site along a trajectory.
OscillationResult detect_oscillation(const Trajectory& traj, int site, double window,
                                     const OscillationOptions& opt = {});

// ---------------------------------------------------------------------------
// Classification

enum class Outcome { kUniformLow, kUniformHigh, kAFM, kOSC, kUnresolved };
inline constexpr int kOutcomeCount = 5;
std::string to_string(Outcome o);

enum class EnsembleModel { kBipartite, kFullLattice };
std::string to_string(EnsembleModel m);
EnsembleModel ensemble_model_from_string(const std::string& s);

struct PhaseOptions {
  int ensemble = 16;
  double t_final = 300.0;
  double transient_fraction = 0.6;  // samples before this fraction of t_final are discarded
  double sample_dt = 0.1;
  EnsembleModel model = EnsembleModel::kBipartite;
  double afm_tol = 1e-3;
  double stationary_tol = 1e-8;
  OscillationOptions oscillation;
  BipartiteScanOptions scan;
  OdeOptions ode{1e-9, 1e-7};
};

struct MemberResult {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::kUnresolved;
  double variance = 0.0;         // spin variance of the final lattice
  double amplitude = 0.0;        // largest trailing-window S_z peak-to-peak
  double final_sz_a = 0.0;
  double final_sz_b = 0.0;
  bool failed = false;
};

struct PhaseDiagnostics {
  std::array<int, kOutcomeCount> outcome_counts{};
  int members_failed = 0;
  int newton_seeds = 0;
  int newton_failed = 0;
  double max_oscillation_amplitude = 0.0;
  std::vector<std::string> warnings;
};

struct PhasePoint {
  double delta = 0.0;
  double omega = 0.0;
  PhaseLabel label;
  std::vector<FixedPoint> fixed_points;  // uniform and bipartite, with verdicts
  double variance = 0.0;                 // ensemble mean of the final spin variance
  std::vector<MemberResult> members;
  PhaseDiagnostics diagnostics;
};

/// Seed of ensemble member \p m at a point seeded with \p point_seed. Members
/// keep their seed when the ensemble grows.
std::uint64_t member_seed(std::uint64_t point_seed, int m);

/// Seed of grid point (i, j) for a sweep seeded with \p base.
std::uint64_t point_seed(std::uint64_t base, std::size_t i, std::size_t j);

/// Random start {0, 0, r} with r uniform in [-1/2, 1/2) per site (or sublattice).
SpinLattice random_start(int n_sites, std::uint64_t seed);
BipartiteState random_bipartite_start(std::uint64_t seed);

/// Integrates one ensemble member and buckets its long-time behaviour.
MemberResult run_member(const ModelParams& params, const PhaseOptions& opt, std::uint64_t seed);

/// Buckets a sampled full-lattice trajectory. Samples before
/// transient_fraction * (last time) are ignored.
MemberResult classify_lattice_trajectory(const Trajectory& traj, const ModelParams& params,
                                         const PhaseOptions& opt);

/// Fixed points (uniform and bipartite) with 6x6 stability verdicts,
/// ensemble integrations, and the assembled label. Throws NumericalError if
/// fewer than half the members integrate successfully.
PhasePoint classify_phase(const ModelParams& params, const PhaseOptions& opt,
                          std::uint64_t seed);

enum class SweepAxis { kDelta, kOmega, kV1, kV2, kGammaM };
std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);
void set_axis(ModelParams& params, SweepAxis axis, double value);

struct PhaseDiagram {
  SweepAxis x_axis = SweepAxis::kDelta;
  SweepAxis y_axis = SweepAxis::kOmega;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<PhasePoint> points;  // row-major: index i * ys.size() + j
  ModelParams base;
  PhaseOptions options;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;

  const PhasePoint& at(std::size_t i, std::size_t j) const { return points[i * ys.size() + j]; }
};

/// classify_phase at every (delta, omega). Points run on \p workers threads;
/// results are placed by grid index so output does not depend on scheduling.
/// Per-point failures are recorded in the point's diagnostics.
PhaseDiagram sweep(const ModelParams& base, const std::vector<double>& deltas,
                   const std::vector<double>& omegas, const PhaseOptions& opt,
                   std::uint64_t seed, int workers = 1);

/// Same over any two parameter axes.
PhaseDiagram sweep_grid(const ModelParams& base, SweepAxis x_axis, const std::vector<double>& xs,
                        SweepAxis y_axis, const std::vector<double>& ys, const PhaseOptions& opt,
                        std::uint64_t seed, int workers = 1);

/// Linearly spaced axis of \p n points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);

// ---------------------------------------------------------------------------
// Exports

// \`meta\` entries are merged into the header line (e.g. tool, command, config).
void write_phase_csv(std::ostream& out, const PhaseDiagram& d,
                     const nlohmann::json& meta = nlohmann::json::object());
void write_phase_grid(std::ostream& out, const PhaseDiagram& d,
                      const nlohmann::json& meta = nlohmann::json::object());
void write_phase_legend(std::ostream& out);
/// Binary PPM (P6), one block of \p scale pixels per grid point; the x axis
/// runs left to right and the y axis increases upward.
void write_phase_ppm(std::ostream& out, const PhaseDiagram& d, int scale = 8);
/// RGB triple used for a component mask.
std::array<unsigned char, 3> phase_color(int code);

}  // namespace rydchain
