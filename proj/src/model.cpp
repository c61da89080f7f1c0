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

#include "rydchain/model.hpp"

#include <cmath>
#include <cstdlib>

#include "rydchain/errors.hpp"

namespace rydchain {

std::string to_string(InteractionRange range) {
  return range == InteractionRange::kNearest ? "NN" : "NNN";
}

InteractionRange interaction_range_from_string(const std::string& s) {
  if (s == "NN") return InteractionRange::kNearest;
  if (s == "NNN") return InteractionRange::kNextNearest;
  throw ConfigError("interaction_range must be \"NN\" or \"NNN\", got \"" + s + "\"");
}

void ModelParams::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(omega) || !finite(delta) || !finite(v1) || !finite(v2)) {
    throw ConfigError("model parameters must be finite");
  }
  if (!(gamma_s >= 0.0)) throw ConfigError("gamma_s must be >= 0");
  if (!(gamma_m >= 0.0)) throw ConfigError("gamma_m must be >= 0");
  if (n_sites < 1) throw ConfigError("n_sites must be >= 1");
  if (!(coordination > 0.0)) throw ConfigError("coordination must be > 0");
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"omega", p.omega},
                     {"delta", p.delta},
                     {"gamma_s", p.gamma_s},
                     {"gamma_m", p.gamma_m},
                     {"n_sites", p.n_sites},
                     {"v1", p.v1},
                     {"v2", p.v2},
                     {"interaction_range", to_string(p.range)},
                     {"coordination", p.coordination},
                     {"pbc", p.pbc}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  if (!j.is_object()) throw ConfigError("model parameters must be a JSON object");
  static const char* kKnown[] = {"omega", "delta",   "gamma_s",           "gamma_m",
                                 "n_sites", "v1",    "v2", "interaction_range",
                                 "coordination", "pbc"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    if (!known) throw ConfigError("unknown model parameter \"" + key + "\"");
  }
  try {
    p.omega = j.value("omega", p.omega);
    p.delta = j.value("delta", p.delta);
    p.gamma_s = j.value("gamma_s", p.gamma_s);
    p.gamma_m = j.value("gamma_m", p.gamma_m);
    p.n_sites = j.value("n_sites", p.n_sites);
    p.v1 = j.value("v1", p.v1);
    p.v2 = j.value("v2", p.v2);
    if (j.contains("interaction_range")) {
      p.range = interaction_range_from_string(j.at("interaction_range").get<std::string>());
    }
    p.coordination = j.value("coordination", p.coordination);
    p.pbc = j.value("pbc", p.pbc);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model parameters: ") + e.what());
  }
  p.validate();
}

int lattice_distance(int j, int k, int n_sites, bool pbc) {
  const int d = std::abs(j - k);
  return pbc ? std::min(d, n_sites - d) : d;
}

InteractionMatrices build_interaction_matrices(const ModelParams& params) {
  params.validate();
  const int n = params.n_sites;
  const int max_range = params.range == InteractionRange::kNearest ? 1 : 2;
  InteractionMatrices im{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int d = lattice_distance(j, k, n, params.pbc);
      if (d > max_range) continue;
      const double scale = 1.0 / std::pow(static_cast<double>(d), 6);
      im.v1(j, k) = params.v1 * scale;
      im.v2(j, k) = params.v2 * scale;
    }
  }
  return im;
}

DecayMatrix build_decay_matrix(const ModelParams& params) {
  params.validate();
  const int n = params.n_sites;
  DecayMatrix dm{Eigen::MatrixXd::Constant(n, n, params.gamma_m)};
  dm.gamma.diagonal().setConstant(params.gamma_s);
  return dm;
}

double dd_coupling(const DDGeometry& geom, int j, int k) {
  if (j == k) throw DomainError("dd_coupling: sites must differ");
  if (!(geom.a > 0.0)) throw DomainError("dd_coupling: lattice constant must be positive");
  const double c = std::cos(geom.theta);
  const double d = std::abs(j - k) * geom.a;
  return geom.c3 * (1.0 - 3.0 * c * c) / (d * d * d);
}

double magic_angle() { return std::acos(1.0 / std::sqrt(3.0)); }

}  // namespace rydchain
