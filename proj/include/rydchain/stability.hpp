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

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydchain/meanfield.hpp"

namespace rydchain {

/// Half-width of the marginal band around zero growth rate.
inline constexpr double kStabilityBand = 1e-8;

enum class JacobianMode { kAnalytic, kFiniteDifference };
std::string to_string(JacobianMode m);

struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by descending real part
  double max_real = 0.0;
  Stability verdict = Stability::kUnknown;
  JacobianMode method = JacobianMode::kAnalytic;
};

Stability verdict_from_growth(double max_real);

/// 3x3 for uniform points, 6x6 for bipartite points. With \p embed_bipartite
/// a uniform point is linearised inside the bipartite equations instead, so
/// that sublattice-symmetry-breaking modes are included.
Eigen::MatrixXd jacobian(const FixedPoint& point, const ModelParams& params, JacobianMode mode,
                         bool embed_bipartite = false);

/// Central differences, step 1e-6 scaled by coordinate magnitude.
Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x);

StabilityReport spectrum(const Eigen::MatrixXd& j, JacobianMode method);

StabilityReport classify(const FixedPoint& point, const ModelParams& params,
                         JacobianMode mode = JacobianMode::kAnalytic,
                         bool embed_bipartite = true);

}  // namespace rydchain
