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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rydchain/model.hpp"
#include "rydchain/ode.hpp"

namespace rydchain {

using Complex = std::complex<double>;
using DensityMatrix = Eigen::MatrixXcd;
using SparseOperator = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Largest chain handled by the exact solver unless raised explicitly.
inline constexpr int kDefaultMaxSites = 10;

// Basis convention: bit j of a basis index is 1 when site j is in the upper
// state |2> (sigma_z = +1). Site 0 is the least significant bit.

enum class LocalOp { kI, kX, kY, kZ, kPlus, kMinus, kP1, kP2 };

struct PauliFactor {
  int site = 0;
  LocalOp op = LocalOp::kI;
};

/// Sum of coefficient-weighted products of site-local operators.
class PauliStringOperator {
 public:
  struct Term {
    Complex coeff;
    std::vector<PauliFactor> factors;  // applied right to left
  };

  explicit PauliStringOperator(int n_sites);

  int n_sites() const { return n_sites_; }
  std::size_t dim() const { return std::size_t{1} << n_sites_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// Appends coeff * f_0 f_1 ... (f_last acts first). Throws ConfigError on a
  /// site outside the chain.
  PauliStringOperator& add(Complex coeff, std::vector<PauliFactor> factors);
  PauliStringOperator& add(const PauliStringOperator& other);

  SparseOperator to_sparse() const;
  Eigen::MatrixXcd to_dense() const;

 private:
  int n_sites_;
  std::vector<Term> terms_;
};

struct HamiltonianOptions {
  int max_sites = kDefaultMaxSites;
  std::optional<DDGeometry> dipole_dipole;  // disabled unless set
};

/// Drive, detuning, and pairwise vdW terms (plus the optional exchange term).
/// Throws ResourceError above \p opt.max_sites.
PauliStringOperator build_hamiltonian(const ModelParams& params, const InteractionMatrices& im,
                                      const HamiltonianOptions& opt = {});

/// Precomputed generator d rho/dt = -i[H, rho] + L[rho]. A structured kernel
/// is used when H is diagonal plus uniform single-site sigma_x terms and the
/// decay matrix has the all-to-all form; otherwise sparse products.
class LindbladGenerator {
 public:
  LindbladGenerator(const PauliStringOperator& hamiltonian, const DecayMatrix& dm);

  std::size_t dim() const { return dim_; }
  bool structured() const { return structured_; }
  /// General density matrix (not assumed Hermitian). Throws ConfigError on a
  /// dimension mismatch.
  void apply(const DensityMatrix& rho, DensityMatrix& drho) const;
  /// Same for Hermitian \p rho; the result is Hermitian to the last bit.
  void apply_hermitian(const DensityMatrix& rho, DensityMatrix& drho) const;

 private:
  struct Channel {
    int j, k;
    double rate;
  };
  void apply_sparse(const DensityMatrix& rho, DensityMatrix& drho, bool hermitian) const;
  void apply_structured(const DensityMatrix& rho, DensityMatrix& drho) const;

  int n_sites_;
  std::size_t dim_;
  SparseOperator heff_;  // H - (i/2) sum_jk Gamma_jk s+^k s-^j
  std::vector<Channel> channels_;

  bool structured_ = false;
  Eigen::VectorXcd diag_;     // H_diag - (i/2)(gamma_s - gamma_m) n
  Eigen::VectorXd flip_;      // sigma_x coefficient per site
  double gamma_s_ = 0.0;
  double gamma_m_ = 0.0;
  mutable DensityMatrix a_, m_;  // scratch
};

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const PauliStringOperator& hamiltonian,
                           const DecayMatrix& dm);

// ---------------------------------------------------------------------------
// States and invariants

DensityMatrix all_down_state(int n_sites);
DensityMatrix maximally_mixed_state(int n_sites);
/// |psi><psi| for a normalised product of single-site states (c_down, c_up).
DensityMatrix product_state(const std::vector<Eigen::Vector2cd>& sites);

struct InvariantReport {
  double trace_error = 0.0;        // |Tr rho - 1|
  double hermiticity = 0.0;        // max |rho - rho^dagger|
  double min_eigenvalue = 0.0;
};

struct InvariantTolerances {
  double trace = 1e-8;
  double hermiticity = 1e-10;
  double positivity = -1e-8;
};

InvariantReport check_invariants(const DensityMatrix& rho);
bool within(const InvariantReport& r, const InvariantTolerances& tol);

// ---------------------------------------------------------------------------
// Evolution

struct EvolveOptions {
  OdeOptions ode{1e-10, 1e-8};
  std::vector<double> sample_times;  // empty: only t_final
  bool stop_at_steady_state = false;
  double steady_tol = 1e-9;          // max |d rho/dt| entry
  double steady_check_interval = 1.0;
  InvariantTolerances tolerances;
  HamiltonianOptions hamiltonian;
};

struct EvolveResult {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<InvariantReport> invariants;
  InvariantReport worst;
  bool steady = false;
  double t_reached = 0.0;
  double final_derivative = 0.0;  // max |d rho/dt| entry at the last state
  OdeStats stats;
};

/// Integrates the master equation from \p rho0. Invariants are checked at each
/// sample; a violation throws NumericalError naming the time and defect.
EvolveResult evolve(const DensityMatrix& rho0, const ModelParams& params, double t_final,
                    const EvolveOptions& opt = {});

// ---------------------------------------------------------------------------
// Observables

/// <sigma_z^j>.
double site_sz(const DensityMatrix& rho, int site);
/// Site average of <sigma_z^j>.
double mean_sz(const DensityMatrix& rho);
/// <sz^i sz^{i+j}> - <sz^i><sz^{i+j}>, with i + j taken around the ring.
double connected_correlation(const DensityMatrix& rho, int i, int j);
double purity(const DensityMatrix& rho);
/// -sum p ln p over the spectrum; eigenvalues below 1e-14 are dropped.
double von_neumann_entropy(const DensityMatrix& rho);

struct ObservableSet {
  double mean_sz = 0.0;
  std::vector<double> correlations;  // C(j) from site 0, j = 0..N-1
  double entropy = 0.0;
};

ObservableSet observables(const DensityMatrix& rho);

/// Debug dump: uint64 dim, then dim*dim (re, im) double pairs in row-major
/// order, all little-endian.
void write_density_matrix(std::ostream& out, const DensityMatrix& rho);
DensityMatrix read_density_matrix(std::istream& in);

}  // namespace rydchain
