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

#include "rydchain/lindblad.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "rydchain/errors.hpp"

namespace rydchain {

namespace {

constexpr Complex kI{0.0, 1.0};

// Action of a local operator on one basis bit: amplitude and resulting bit.
// A zero amplitude means the state is annihilated.
std::pair<Complex, int> act(LocalOp op, int bit) {
  switch (op) {
    case LocalOp::kI: return {1.0, bit};
    case LocalOp::kX: return {1.0, 1 - bit};
    case LocalOp::kY: return {bit ? kI : -kI, 1 - bit};
    case LocalOp::kZ: return {bit ? 1.0 : -1.0, bit};
    case LocalOp::kPlus: return {bit ? 0.0 : 1.0, 1};
    case LocalOp::kMinus: return {bit ? 1.0 : 0.0, 0};
    case LocalOp::kP1: return {bit ? 0.0 : 1.0, bit};
    case LocalOp::kP2: return {bit ? 1.0 : 0.0, bit};
  }
  return {0.0, bit};
}

void check_square(const DensityMatrix& rho, std::size_t dim, const char* who) {
  if (static_cast<std::size_t>(rho.rows()) != dim || static_cast<std::size_t>(rho.cols()) != dim) {
    std::ostringstream os;
    os << who << ": expected a " << dim << "x" << dim << " matrix, got " << rho.rows() << "x"
       << rho.cols();
    throw ConfigError(os.str());
  }
}

int sites_for(const DensityMatrix& rho) {
  const auto dim = static_cast<std::size_t>(rho.rows());
  if (rho.rows() != rho.cols() || dim == 0 || !std::has_single_bit(dim)) {
    throw ConfigError("density matrix dimension must be a power of two");
  }
  return std::countr_zero(dim);
}

double hermiticity_defect(const DensityMatrix& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!in) throw ConfigError("read_density_matrix: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// PauliStringOperator

PauliStringOperator::PauliStringOperator(int n_sites) : n_sites_(n_sites) {
  if (n_sites < 1 || n_sites > 30) throw ConfigError("PauliStringOperator: bad site count");
}

PauliStringOperator& PauliStringOperator::add(Complex coeff, std::vector<PauliFactor> factors) {
  for (const auto& f : factors) {
    if (f.site < 0 || f.site >= n_sites_) {
      throw ConfigError("PauliStringOperator: site " + std::to_string(f.site) + " out of range");
    }
  }
  if (coeff != Complex{0.0}) terms_.push_back({coeff, std::move(factors)});
  return *this;
}

PauliStringOperator& PauliStringOperator::add(const PauliStringOperator& other) {
  if (other.n_sites_ != n_sites_) throw ConfigError("PauliStringOperator: site count mismatch");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

SparseOperator PauliStringOperator::to_sparse() const {
  const std::size_t d = dim();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(terms_.size() * d);
  for (const auto& term : terms_) {
    for (std::size_t col = 0; col < d; ++col) {
      std::size_t row = col;
      Complex amp = term.coeff;
      for (auto it = term.factors.rbegin(); it != term.factors.rend() && amp != Complex{0.0}; ++it) {
        const int bit = static_cast<int>((row >> it->site) & 1u);
        const auto [a, nb] = act(it->op, bit);
        amp *= a;
        row = (row & ~(std::size_t{1} << it->site)) | (static_cast<std::size_t>(nb) << it->site);
      }
      if (amp != Complex{0.0}) {
        trip.emplace_back(static_cast<int>(row), static_cast<int>(col), amp);
      }
    }
  }
  SparseOperator m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune(Complex{0.0});
  return m;
}

Eigen::MatrixXcd PauliStringOperator::to_dense() const { return Eigen::MatrixXcd(to_sparse()); }

// ---------------------------------------------------------------------------
// Hamiltonian and generator

PauliStringOperator build_hamiltonian(const ModelParams& p, const InteractionMatrices& im,
                                      const HamiltonianOptions& opt) {
  p.validate();
  const int n = p.n_sites;
  if (n > opt.max_sites) {
    throw ResourceError("exact solver limited to " + std::to_string(opt.max_sites) +
                        " sites, requested " + std::to_string(n));
  }
  if (im.v1.rows() != n || im.v1.cols() != n || im.v2.rows() != n || im.v2.cols() != n) {
    throw ConfigError("build_hamiltonian: interaction matrices do not match the chain");
  }
  PauliStringOperator h(n);
  for (int j = 0; j < n; ++j) {
    h.add(0.5 * p.omega, {{j, LocalOp::kX}});
    h.add(-0.5 * p.delta, {{j, LocalOp::kZ}});
  }
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      h.add(0.5 * im.v1(j, k), {{j, LocalOp::kP1}, {k, LocalOp::kP1}});
      h.add(0.5 * im.v2(j, k), {{j, LocalOp::kP2}, {k, LocalOp::kP2}});
      if (opt.dipole_dipole) {
        const int d = lattice_distance(j, k, n, p.pbc);
        const double v = dd_coupling(*opt.dipole_dipole, 0, d);
        h.add(0.5 * v, {{j, LocalOp::kX}, {k, LocalOp::kX}});
        h.add(0.5 * v, {{j, LocalOp::kY}, {k, LocalOp::kY}});
      }
    }
  }
  return h;
}

LindbladGenerator::LindbladGenerator(const PauliStringOperator& hamiltonian, const DecayMatrix& dm)
    : n_sites_(hamiltonian.n_sites()), dim_(hamiltonian.dim()) {
  const int n = n_sites_;
  if (dm.gamma.rows() != n || dm.gamma.cols() != n) {
    throw ConfigError("LindbladGenerator: decay matrix does not match the chain");
  }
  PauliStringOperator k(n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      const double g = dm.gamma(j, l);
      if (g == 0.0) continue;
      channels_.push_back({j, l, g});
      if (j == l) {
        k.add(g, {{j, LocalOp::kP2}});
      } else {
        k.add(g, {{l, LocalOp::kPlus}, {j, LocalOp::kMinus}});
      }
    }
  }
  const SparseOperator h = hamiltonian.to_sparse();
  heff_ = h - Complex(0.0, 0.5) * k.to_sparse();
  heff_.makeCompressed();

  // Structured form: all-to-all decay and H = diagonal + sum_j c_j sigma_x^j.
  const double gs = dm.gamma(0, 0);
  const double gm = n > 1 ? dm.gamma(0, 1) : 0.0;
  bool ok = true;
  for (int j = 0; j < n && ok; ++j) {
    for (int l = 0; l < n && ok; ++l) ok = dm.gamma(j, l) == (j == l ? gs : gm);
  }
  Eigen::VectorXd flip = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> flip_count(n, 0);
  Eigen::VectorXd hdiag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  for (Eigen::Index r = 0; r < h.outerSize() && ok; ++r) {
    for (SparseOperator::InnerIterator it(h, r); it && ok; ++it) {
      const auto x = static_cast<std::size_t>(it.row() ^ it.col());
      if (x == 0) {
        ok = it.value().imag() == 0.0;
        hdiag[it.row()] = it.value().real();
      } else if (std::has_single_bit(x) && it.value().imag() == 0.0) {
        const int j = std::countr_zero(x);
        if (flip_count[j]++ == 0) flip[j] = it.value().real();
        ok = flip[j] == it.value().real();
      } else {
        ok = false;
      }
    }
  }
  // Each sigma_x^j present must couple every basis state.
  for (int j = 0; j < n && ok; ++j) {
    ok = flip_count[j] == 0 || flip_count[j] == static_cast<Eigen::Index>(dim_);
  }
  if (ok) {
    structured_ = true;
    gamma_s_ = gs;
    gamma_m_ = gm;
    flip_ = flip;
    diag_.resize(static_cast<Eigen::Index>(dim_));
    for (std::size_t r = 0; r < dim_; ++r) {
      const double nr = std::popcount(r);
      diag_[static_cast<Eigen::Index>(r)] = Complex(hdiag[static_cast<Eigen::Index>(r)], -0.5 * (gs - gm) * nr);
    }
  }
}

void LindbladGenerator::apply(const DensityMatrix& rho, DensityMatrix& drho) const {
  check_square(rho, dim_, "lindblad_rhs");
  apply_sparse(rho, drho, false);
}

void LindbladGenerator::apply_hermitian(const DensityMatrix& rho, DensityMatrix& drho) const {
  check_square(rho, dim_, "lindblad_rhs");
  if (structured_) {
    apply_structured(rho, drho);
  } else {
    apply_sparse(rho, drho, true);
  }
  // Rounding in the jump sums is not symmetric; restore exact Hermiticity.
  const auto d = static_cast<Eigen::Index>(dim_);
  for (Eigen::Index c = 0; c < d; ++c) {
    drho(c, c) = drho(c, c).real();
    for (Eigen::Index r = c + 1; r < d; ++r) {
      const Complex v = 0.5 * (drho(r, c) + std::conj(drho(c, r)));
      drho(r, c) = v;
      drho(c, r) = std::conj(v);
    }
  }
}

void LindbladGenerator::apply_sparse(const DensityMatrix& rho, DensityMatrix& drho,
                                     bool hermitian) const {
  a_.noalias() = heff_ * rho;
  if (hermitian) {
    drho = -kI * a_ + kI * a_.adjoint();
  } else {
    m_.noalias() = heff_ * rho.adjoint();
    drho = -kI * a_ + kI * m_.adjoint();
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  for (const auto& ch : channels_) {
    const Eigen::Index mj = Eigen::Index{1} << ch.j;
    const Eigen::Index mk = Eigen::Index{1} << ch.k;
    for (Eigen::Index c = 0; c < d; ++c) {
      if (c & mk) continue;
      const Complex* src = rho.col(c | mk).data();
      Complex* dst = drho.col(c).data();
      for (Eigen::Index hi = 0; hi < d; hi += 2 * mj) {
        for (Eigen::Index lo = hi; lo < hi + mj; ++lo) dst[lo] += ch.rate * src[lo + mj];
      }
    }
  }
}

void LindbladGenerator::apply_structured(const DensityMatrix& rho, DensityMatrix& drho) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  const int n = n_sites_;
  a_.resize(d, d);
  m_.resize(d, d);

  // a = (diag + sum_j c_j X_j) rho, m = J- rho.
  for (Eigen::Index c = 0; c < d; ++c) {
    const Complex* x = rho.col(c).data();
    Complex* y = a_.col(c).data();
    Complex* z = m_.col(c).data();
    for (Eigen::Index r = 0; r < d; ++r) {
      y[r] = diag_[r] * x[r];
      z[r] = 0.0;
    }
    for (int j = 0; j < n; ++j) {
      const Eigen::Index mj = Eigen::Index{1} << j;
      const double w = flip_[j];
      for (Eigen::Index hi = 0; hi < d; hi += 2 * mj) {
        for (Eigen::Index lo = hi; lo < hi + mj; ++lo) {
          y[lo] += w * x[lo + mj];
          y[lo + mj] += w * x[lo];
          z[lo] += x[lo + mj];
        }
      }
    }
  }
  // a += -(i/2) gamma_m J+ (J- rho).
  if (gamma_m_ != 0.0) {
    const Complex s(0.0, -0.5 * gamma_m_);
    for (Eigen::Index c = 0; c < d; ++c) {
      const Complex* z = m_.col(c).data();
      Complex* y = a_.col(c).data();
      for (int j = 0; j < n; ++j) {
        const Eigen::Index mj = Eigen::Index{1} << j;
        for (Eigen::Index hi = 0; hi < d; hi += 2 * mj) {
          for (Eigen::Index lo = hi; lo < hi + mj; ++lo) y[lo + mj] += s * z[lo];
        }
      }
    }
  }
  drho = -kI * a_ + kI * a_.adjoint();

  // (gamma_s - gamma_m) sum_j s-^j rho s+^j + gamma_m (J- rho) J+.
  const double g1 = gamma_s_ - gamma_m_;
  for (Eigen::Index c = 0; c < d; ++c) {
    Complex* dst = drho.col(c).data();
    for (int k = 0; k < n; ++k) {
      const Eigen::Index mk = Eigen::Index{1} << k;
      if (c & mk) continue;
      if (gamma_m_ != 0.0) {
        const Complex* z = m_.col(c | mk).data();
        for (Eigen::Index r = 0; r < d; ++r) dst[r] += gamma_m_ * z[r];
      }
      if (g1 != 0.0) {
        const Complex* src = rho.col(c | mk).data();
        for (Eigen::Index hi = 0; hi < d; hi += 2 * mk) {
          for (Eigen::Index lo = hi; lo < hi + mk; ++lo) dst[lo] += g1 * src[lo + mk];
        }
      }
    }
  }
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const PauliStringOperator& hamiltonian,
                           const DecayMatrix& dm) {
  DensityMatrix out;
  LindbladGenerator(hamiltonian, dm).apply(rho, out);
  return out;
}

// ---------------------------------------------------------------------------
// States and invariants

DensityMatrix all_down_state(int n_sites) {
  if (n_sites < 1 || n_sites > 30) throw ConfigError("all_down_state: bad site count");
  const auto d = Eigen::Index{1} << n_sites;
  DensityMatrix rho = DensityMatrix::Zero(d, d);
  rho(0, 0) = 1.0;
  return rho;
}

DensityMatrix maximally_mixed_state(int n_sites) {
  if (n_sites < 1 || n_sites > 30) throw ConfigError("maximally_mixed_state: bad site count");
  const auto d = Eigen::Index{1} << n_sites;
  return DensityMatrix::Identity(d, d) / static_cast<double>(d);
}

DensityMatrix product_state(const std::vector<Eigen::Vector2cd>& sites) {
  if (sites.empty()) throw ConfigError("product_state: no sites");
  Eigen::VectorXcd psi(1);
  psi(0) = 1.0;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    const double norm = sites[j].norm();
    if (!(norm > 0.0)) throw DomainError("product_state: zero site state");
    const Eigen::Vector2cd s = sites[j] / norm;
    // Site j is bit j: new index = old + bit * 2^j.
    Eigen::VectorXcd next(2 * psi.size());
    next.head(psi.size()) = s(0) * psi;
    next.tail(psi.size()) = s(1) * psi;
    psi = next;
  }
  return psi * psi.adjoint();
}

InvariantReport check_invariants(const DensityMatrix& rho) {
  InvariantReport r;
  r.trace_error = std::abs(rho.trace() - Complex{1.0});
  r.hermiticity = hermiticity_defect(rho);
  const DensityMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("check_invariants: eigen-solver failed");
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

bool within(const InvariantReport& r, const InvariantTolerances& tol) {
  return r.trace_error <= tol.trace && r.hermiticity <= tol.hermiticity &&
         r.min_eigenvalue >= tol.positivity;
}

// ---------------------------------------------------------------------------
// Evolution

EvolveResult evolve(const DensityMatrix& rho0, const ModelParams& params, double t_final,
                    const EvolveOptions& opt) {
  params.validate();
  if (!(t_final >= 0.0)) throw ConfigError("evolve: t_final must be non-negative");
  const auto im = build_interaction_matrices(params);
  const auto h = build_hamiltonian(params, im, opt.hamiltonian);
  const LindbladGenerator gen(h, build_decay_matrix(params));
  check_square(rho0, gen.dim(), "evolve");

  const InvariantReport r0 = check_invariants(rho0);
  if (!within(r0, opt.tolerances)) {
    throw ConfigError("evolve: initial state is not a valid density matrix");
  }

  std::vector<double> user = opt.sample_times;
  for (double t : user) {
    if (t < 0.0 || t > t_final) throw ConfigError("evolve: sample time outside [0, t_final]");
  }
  if (!std::is_sorted(user.begin(), user.end())) throw ConfigError("evolve: unsorted samples");
  if (user.empty() || user.back() != t_final) user.push_back(t_final);

  std::vector<double> grid = user;
  if (opt.stop_at_steady_state) {
    if (!(opt.steady_check_interval > 0.0)) throw ConfigError("evolve: bad steady check interval");
    for (double t = opt.steady_check_interval; t < t_final; t += opt.steady_check_interval) {
      grid.push_back(t);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }

  EvolveResult res;
  auto worst = [&](const InvariantReport& r) {
    res.worst.trace_error = std::max(res.worst.trace_error, r.trace_error);
    res.worst.hermiticity = std::max(res.worst.hermiticity, r.hermiticity);
    res.worst.min_eigenvalue = std::min(res.worst.min_eigenvalue, r.min_eigenvalue);
  };
  res.worst = r0;
  auto record = [&](double t, const DensityMatrix& rho) {
    const InvariantReport r = check_invariants(rho);
    worst(r);
    if (!within(r, opt.tolerances)) {
      std::ostringstream os;
      os << "evolve: invariant violated at t=" << t << " (trace error " << r.trace_error
         << ", hermiticity " << r.hermiticity << ", min eigenvalue " << r.min_eigenvalue << ")";
      throw NumericalError(os.str());
    }
    res.times.push_back(t);
    res.states.push_back(rho);
    res.invariants.push_back(r);
  };

  std::size_t next_user = 0;
  DensityMatrix d;
  auto rhs = [&](double, const DensityMatrix& y, DensityMatrix& dy) { gen.apply_hermitian(y, dy); };
  auto observer = [&](double t, const DensityMatrix& y) {
    res.t_reached = t;
    const bool is_user = next_user < user.size() && user[next_user] == t;
    if (is_user) ++next_user;
    if (opt.stop_at_steady_state || t == t_final) {
      gen.apply_hermitian(y, d);
      res.final_derivative = d.cwiseAbs().maxCoeff();
      if (opt.stop_at_steady_state && res.final_derivative < opt.steady_tol) {
        res.steady = true;
        record(t, y);
        return false;
      }
    }
    if (is_user) record(t, y);
    return true;
  };
  res.stats = integrate_dopri5(rhs, rho0, 0.0, grid, observer, opt.ode);
  return res;
}

// ---------------------------------------------------------------------------
// Observables

double site_sz(const DensityMatrix& rho, int site) {
  const int n = sites_for(rho);
  if (site < 0 || site >= n) throw ConfigError("site_sz: site out of range");
  double acc = 0.0;
  for (Eigen::Index b = 0; b < rho.rows(); ++b) {
    acc += ((b >> site) & 1 ? 1.0 : -1.0) * rho(b, b).real();
  }
  return acc;
}

double mean_sz(const DensityMatrix& rho) {
  const int n = sites_for(rho);
  double acc = 0.0;
  for (Eigen::Index b = 0; b < rho.rows(); ++b) {
    acc += (2.0 * std::popcount(static_cast<std::uint64_t>(b)) - n) * rho(b, b).real();
  }
  return acc / n;
}

double connected_correlation(const DensityMatrix& rho, int i, int j) {
  const int n = sites_for(rho);
  if (i < 0 || i >= n || j < 0 || j >= n) throw ConfigError("connected_correlation: bad site");
  const int k = (i + j) % n;
  double zz = 0.0;
  for (Eigen::Index b = 0; b < rho.rows(); ++b) {
    const double si = (b >> i) & 1 ? 1.0 : -1.0;
    const double sk = (b >> k) & 1 ? 1.0 : -1.0;
    zz += si * sk * rho(b, b).real();
  }
  return zz - site_sz(rho, i) * site_sz(rho, k);
}

double purity(const DensityMatrix& rho) { return (rho * rho).trace().real(); }

double von_neumann_entropy(const DensityMatrix& rho) {
  sites_for(rho);
  const DensityMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("von_neumann_entropy: eigen-solver failed");
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return std::max(0.0, s);
}

ObservableSet observables(const DensityMatrix& rho) {
  const int n = sites_for(rho);
  ObservableSet o;
  o.mean_sz = mean_sz(rho);
  o.correlations.resize(n);
  for (int j = 0; j < n; ++j) o.correlations[j] = connected_correlation(rho, 0, j);
  o.entropy = von_neumann_entropy(rho);
  return o;
}

void write_density_matrix(std::ostream& out, const DensityMatrix& rho) {
  if (rho.rows() != rho.cols()) throw ConfigError("write_density_matrix: matrix is not square");
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(rho.rows()));
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      put_le<double>(out, rho(r, c).real());
      put_le<double>(out, rho(r, c).imag());
    }
  }
}

DensityMatrix read_density_matrix(std::istream& in) {
  const auto dim = get_le<std::uint64_t>(in);
  if (dim == 0 || dim > (std::uint64_t{1} << 16)) throw ConfigError("read_density_matrix: bad dim");
  const auto d = static_cast<Eigen::Index>(dim);
  DensityMatrix rho(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      rho(r, c) = {re, im};
    }
  }
  return rho;
}

}  // namespace rydchain
