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

#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "oracles.hpp"
#include "rydchain/errors.hpp"
#include "rydchain/lindblad.hpp"
#include "rydchain/meanfield.hpp"

using namespace rydchain;

namespace {

ModelParams chain(int n, double omega, double delta, double v1, double v2, double gs, double gm) {
  ModelParams p;
  p.n_sites = n;
  p.omega = omega;
  p.delta = delta;
  p.v1 = v1;
  p.v2 = v2;
  p.gamma_s = gs;
  p.gamma_m = gm;
  return p;
}

}  // namespace

TEST_CASE("Hamiltonian matches the explicit Kronecker construction") {
  for (int n : {1, 2, 3, 4, 5}) {
    for (bool nnn : {false, true}) {
      for (bool pbc : {true, false}) {
        ModelParams p = chain(n, 1.3, -0.7, 4.0, -2.5, 1.0, 0.0);
        p.pbc = pbc;
        if (nnn) p.range = InteractionRange::kNextNearest;
        const auto h = build_hamiltonian(p, build_interaction_matrices(p)).to_dense();
        const auto want = oracle::hamiltonian(n, p.omega, p.delta, p.v1, p.v2, pbc, nnn);
        CHECK((h - want).cwiseAbs().maxCoeff() < 1e-13);
      }
    }
  }
}

TEST_CASE("Pauli strings compose right to left") {
  PauliStringOperator op(2);
  op.add(1.0, {{0, LocalOp::kPlus}, {0, LocalOp::kMinus}});  // s+ s- = P_up
  op.add(2.0, {{1, LocalOp::kY}, {1, LocalOp::kX}});        // Y X = -i Z
  const Eigen::MatrixXcd want = oracle::embed(oracle::proj_up(), 0, 2) +
                    2.0 * oracle::embed(oracle::pauli_y() * oracle::pauli_x(), 1, 2);
  CHECK((op.to_dense() - want).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((Eigen::MatrixXcd(op.to_sparse()) - want).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(op.dim() == 4);
}

TEST_CASE("generator paths agree with the dense Liouvillian") {
  std::mt19937_64 rng(9);
  struct Case {
    int n;
    double gm;
    bool dd;
  };
  for (const Case c : {Case{1, 0.0, false}, Case{2, 0.0, false}, Case{2, 0.6, false},
                       Case{3, 0.4, false}, Case{4, 1.0, false}, Case{3, 0.4, true}}) {
    ModelParams p = chain(c.n, 1.7, -0.9, 3.0, 1.5, 1.0, c.gm);
    HamiltonianOptions hopt;
    if (c.dd) hopt.dipole_dipole = DDGeometry{0.8, 1.0, 0.3};
    const auto hop = build_hamiltonian(p, build_interaction_matrices(p), hopt);
    const auto dm = build_decay_matrix(p);
    const LindbladGenerator gen(hop, dm);
    CHECK(gen.structured() == !c.dd);
    const auto l = oracle::liouvillian(hop.to_dense(), dm.gamma);
    for (int trial = 0; trial < 3; ++trial) {
      const DensityMatrix rho = oracle::random_density(1 << c.n, rng);
      const Eigen::VectorXcd want = l * oracle::vec(rho);
      DensityMatrix a, b;
      gen.apply(rho, a);
      gen.apply_hermitian(rho, b);
      CHECK((oracle::vec(a) - want).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((oracle::vec(b) - want).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((b - b.adjoint()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(std::abs(b.trace()) < 1e-12);
      CHECK((lindblad_rhs(rho, hop, dm) - a).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("free decay of an excited atom") {
  ModelParams p = chain(1, 0.0, 0.0, 0.0, 0.0, 0.8, 0.0);
  const DensityMatrix up = product_state({Eigen::Vector2cd(0, 1)});
  EvolveOptions opt;
  opt.sample_times = {0.0, 0.5, 1.0, 2.0, 4.0};
  const auto r = evolve(up, p, 4.0, opt);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    CHECK(site_sz(r.states[i], 0) == doctest::Approx(-1.0 + 2.0 * std::exp(-0.8 * r.times[i])).epsilon(1e-7));
  }
}

TEST_CASE("driven atom reaches the two-level steady state") {
  const ModelParams p = chain(1, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
  EvolveOptions opt;
  opt.stop_at_steady_state = true;
  const auto r = evolve(all_down_state(1), p, 200.0, opt);
  CHECK(r.steady);
  CHECK(r.t_reached < 200.0);
  CHECK(mean_sz(r.states.back()) == doctest::Approx(2.0 * oracle::two_level_excited(1, 0, 1) - 1.0).epsilon(1e-7));
  CHECK(mean_sz(r.states.back()) == doctest::Approx(-1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("uncoupled atoms stay in a product state") {
  // No interaction and no collective decay: the pair evolves as two
  // independent atoms, so the state is the tensor product of the single-atom
  // states at all times.
  const ModelParams p2 = chain(2, 1.4, 0.6, 0.0, 0.0, 1.0, 0.0);
  const ModelParams p1 = chain(1, 1.4, 0.6, 0.0, 0.0, 1.0, 0.0);
  EvolveOptions opt;
  opt.sample_times = {0.7, 3.0, 25.0};
  const auto r2 = evolve(all_down_state(2), p2, 25.0, opt);
  const auto r1 = evolve(all_down_state(1), p1, 25.0, opt);
  for (std::size_t i = 0; i < r2.times.size(); ++i) {
    const Eigen::MatrixXcd want = oracle::kron(r1.states[i], r1.states[i]);
    CHECK((r2.states[i] - want).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(std::abs(connected_correlation(r2.states[i], 0, 1)) < 1e-7);
  }
  const double s1 = von_neumann_entropy(r1.states.back());
  CHECK(von_neumann_entropy(r2.states.back()) == doctest::Approx(2.0 * s1).epsilon(1e-6));
}

TEST_CASE("evolution keeps trace, Hermiticity and positivity") {
  const ModelParams p = chain(4, 2.0, -1.0, 5.0, 5.0, 1.0, 1.0);
  EvolveOptions opt;
  opt.sample_times = sample_grid(0.0, 20.0, 1.0);
  const auto r = evolve(all_down_state(4), p, 20.0, opt);
  CHECK(within(r.worst, InvariantTolerances{}));
  CHECK(r.worst.trace_error < 1e-10);
  CHECK(r.worst.hermiticity == 0.0);
  CHECK(r.worst.min_eigenvalue > -1e-10);
  CHECK(r.invariants.size() == r.times.size());
  for (const auto& rho : r.states) {
    const double s = von_neumann_entropy(rho);
    CHECK(s >= 0.0);
    CHECK(s <= 4 * std::log(2.0) + 1e-12);
  }
}

TEST_CASE("observables on simple states") {
  const auto down = all_down_state(3);
  CHECK(mean_sz(down) == -1.0);
  CHECK(purity(down) == doctest::Approx(1.0));
  CHECK(von_neumann_entropy(down) == doctest::Approx(0.0));
  const auto mixed = maximally_mixed_state(3);
  CHECK(purity(mixed) == doctest::Approx(1.0 / 8));
  CHECK(von_neumann_entropy(mixed) == doctest::Approx(3 * std::log(2.0)));
  CHECK(connected_correlation(mixed, 0, 2) == doctest::Approx(0.0));

  // Bell-like state (|00> + |11>)/sqrt 2: <ZZ> = 1, <Z> = 0.
  DensityMatrix bell = DensityMatrix::Zero(4, 4);
  bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = 0.5;
  CHECK(connected_correlation(bell, 0, 1) == doctest::Approx(1.0));
  CHECK(site_sz(bell, 1) == doctest::Approx(0.0));
  const ObservableSet o = observables(bell);
  REQUIRE(o.correlations.size() == 2);
  CHECK(o.correlations[1] == doctest::Approx(1.0));
  CHECK(o.entropy == doctest::Approx(0.0).epsilon(1e-12));

  const double c = 1.0 / std::sqrt(2.0);
  const auto plus = product_state({Eigen::Vector2cd(c, c), Eigen::Vector2cd(1, 0)});
  CHECK(site_sz(plus, 0) == doctest::Approx(0.0));
  CHECK(site_sz(plus, 1) == doctest::Approx(-1.0));
}

TEST_CASE("invariant checks flag bad states") {
  DensityMatrix rho = maximally_mixed_state(2);
  rho(0, 0) += 0.1;
  const auto r = check_invariants(rho);
  CHECK(r.trace_error == doctest::Approx(0.1));
  CHECK_FALSE(within(r, InvariantTolerances{}));
  DensityMatrix neg = DensityMatrix::Zero(2, 2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  CHECK(check_invariants(neg).min_eigenvalue == doctest::Approx(-0.2));
  CHECK_THROWS_AS(evolve(neg, chain(1, 1, 0, 0, 0, 1, 0), 1.0), ConfigError);
}

TEST_CASE("resource guard and density-matrix dump") {
  ModelParams p = chain(11, 1, 0, 0, 0, 1, 0);
  CHECK_THROWS_AS(build_hamiltonian(p, build_interaction_matrices(p)), ResourceError);
  HamiltonianOptions small;
  small.max_sites = 3;
  p.n_sites = 4;
  CHECK_THROWS_AS(build_hamiltonian(p, build_interaction_matrices(p), small), ResourceError);

  std::mt19937_64 rng(2);
  const DensityMatrix rho = oracle::random_density(8, rng);
  std::stringstream buf;
  write_density_matrix(buf, rho);
  const DensityMatrix back = read_density_matrix(buf);
  CHECK(back == rho);
  std::stringstream truncated(buf.str().substr(0, 20));
  CHECK_THROWS(read_density_matrix(truncated));
}
