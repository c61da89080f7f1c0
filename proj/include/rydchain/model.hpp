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

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace rydchain {

enum class InteractionRange { kNearest, kNextNearest };

std::string to_string(InteractionRange range);
InteractionRange interaction_range_from_string(const std::string& s);

/// Physical constants of one simulation instance. Rates and energies are in
/// units of the single-body decay rate unless a caller chooses otherwise.
struct ModelParams {
  double omega = 0.0;      // Rabi frequency
  double delta = 0.0;      // detuning
  double gamma_s = 1.0;    // single-body decay
  double gamma_m = 0.0;    // collective (all-to-all) decay
  int n_sites = 2;
  double v1 = 0.0;         // NN vdW shift of state |1>
  double v2 = 0.0;         // NN vdW shift of state |2>
  InteractionRange range = InteractionRange::kNearest;
  // Effective number of interacting neighbours in the reduced (uniform and
  // bipartite) mean-field equations. The literal two-site form uses 1.
  double coordination = 1.0;
  bool pbc = true;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  /// Collective decay seen by one atom from all others, (N-1) gamma_m.
  double kappa() const { return (n_sites - 1) * gamma_m; }
};

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

/// Pairwise vdW couplings for the two Rydberg states.
struct InteractionMatrices {
  Eigen::MatrixXd v1;
  Eigen::MatrixXd v2;
};

/// Gamma_jk: gamma_s on the diagonal, gamma_m everywhere else.
struct DecayMatrix {
  Eigen::MatrixXd gamma;
};

/// Geometry for the dipole-dipole exchange coupling.
struct DDGeometry {
  double c3 = 1.0;
  double a = 1.0;      // lattice constant
  double theta = 0.0;  // angle between internuclear and quantization axes
};

/// |j - k|, or the ring distance when \p pbc is set.
int lattice_distance(int j, int k, int n_sites, bool pbc);

/// v_jk = V / d^6 for d within the interaction range, zero otherwise.
InteractionMatrices build_interaction_matrices(const ModelParams& params);

DecayMatrix build_decay_matrix(const ModelParams& params);

/// C3 (1 - 3 cos^2 theta) / (a^3 |j - k|^3). Throws DomainError for j == k.
double dd_coupling(const DDGeometry& geom, int j, int k);

/// The angle arccos(1/sqrt(3)) where the dipole-dipole coupling vanishes.
double magic_angle();

}  // namespace rydchain
