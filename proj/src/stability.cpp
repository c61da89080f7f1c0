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

#include "rydchain/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rydchain/errors.hpp"

namespace rydchain {

std::string to_string(JacobianMode m) {
  return m == JacobianMode::kAnalytic ? "analytic" : "finite-difference";
}

Stability verdict_from_growth(double max_real) {
  if (std::isnan(max_real)) return Stability::kUnknown;
  if (max_real < -kStabilityBand) return Stability::kStable;
  if (max_real > kStabilityBand) return Stability::kUnstable;
  return Stability::kMarginal;
}

Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd j(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[c]));
    Eigen::VectorXd xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    j.col(c) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

Eigen::MatrixXd jacobian(const FixedPoint& point, const ModelParams& params, JacobianMode mode,
                         bool embed_bipartite) {
  const bool three = point.uniform() && !embed_bipartite;
  if (three) {
    const Bloch s = point.state.a;
    if (mode == JacobianMode::kAnalytic) return uniform_jacobian_analytic(s, params);
    return finite_difference_jacobian(
        [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return uniform_rhs(Bloch(v), params); },
        s);
  }
  const Vector6d x = point.state.packed();
  if (mode == JacobianMode::kAnalytic) return bipartite_jacobian_analytic(x, params);
  return finite_difference_jacobian(
      [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return bipartite_rhs(Vector6d(v), params);
      },
      x);
}

StabilityReport spectrum(const Eigen::MatrixXd& j, JacobianMode method) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(j, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("stability: eigen-solver failed");
  StabilityReport rep;
  rep.method = method;
  const auto ev = es.eigenvalues();
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](const auto& a, const auto& b) {
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  rep.max_real = rep.eigenvalues.empty() ? 0.0 : rep.eigenvalues.front().real();
  rep.verdict = verdict_from_growth(rep.max_real);
  return rep;
}

StabilityReport classify(const FixedPoint& point, const ModelParams& params, JacobianMode mode,
                         bool embed_bipartite) {
  return spectrum(jacobian(point, params, mode, embed_bipartite), mode);
}

}  // namespace rydchain
