// Copyright 2026 The CavLab Authors
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

// Truncated composite Hilbert space (cavity x atoms [x probe]), its ladder
// operators, the Hamiltonian and collapse operators, and the vectorised
// Lindblad generator.
//
// Tensor order is cavity, atom 1..N, probe; the cavity index is the most
// significant. Density matrices are vectorised column-major,
// vec(rho)[i + j d] = rho(i, j), so vec(A X B) = (B^T kron A) vec(X).

#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavlab/model.hpp"

namespace cavlab::liouville {

using SpMat = Eigen::SparseMatrix<complex>;
using Triplet = Eigen::Triplet<complex>;

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kDefaultDimensionBudget = 600;

/// Hilbert-space dimension budget; the CAVLAB_BUDGET environment variable
/// overrides the default.
inline std::int64_t dimension_budget() {
  if (const char* env = std::getenv("CAVLAB_BUDGET")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && v > 0) return v;
  }
  return kDefaultDimensionBudget;
}

enum class AtomModel { two_level, oscillator };

struct SpaceSpec {
  int cavity_cutoff = 10;  // highest cavity Fock state kept
  AtomModel atom_model = AtomModel::oscillator;
  int atom_cutoff = 2;     // highest oscillator level per atom (ignored for two-level atoms)
  int n_atoms = 0;
  bool probe_enabled = false;  // probe is always a two-level mode
  // Optional cap on the total number of cavity and atom excitations; 0 keeps
  // the full product basis. The probe level does not count.
  int max_excitations = 0;

  int atom_dim() const { return atom_model == AtomModel::two_level ? 2 : atom_cutoff + 1; }
  int cavity_dim() const { return cavity_cutoff + 1; }

  /// Dimensions of every tensor factor in order.
  std::vector<int> factors() const {
    std::vector<int> f{cavity_dim()};
    for (int j = 0; j < n_atoms; ++j) f.push_back(atom_dim());
    if (probe_enabled) f.push_back(2);
    return f;
  }

  std::int64_t product_dimension() const {
    std::int64_t d = 1;
    for (int f : factors()) d *= f;
    return d;
  }

  /// Product-basis indices kept under the excitation cap, in increasing order.
  std::vector<std::int64_t> kept_states() const {
    const auto f = factors();
    const std::size_t counted = f.size() - (probe_enabled ? 1 : 0);
    std::vector<std::int64_t> keep;
    const std::int64_t total = product_dimension();
    std::vector<int> digits(f.size(), 0);
    for (std::int64_t idx = 0; idx < total; ++idx) {
      int exc = 0;
      for (std::size_t k = 0; k < counted; ++k) exc += digits[k];
      if (max_excitations <= 0 || exc <= max_excitations) keep.push_back(idx);
      for (std::size_t k = f.size(); k-- > 0;) {  // last factor is least significant
        if (++digits[k] < f[k]) break;
        digits[k] = 0;
      }
    }
    return keep;
  }

  std::int64_t dimension() const {
    return max_excitations > 0 ? static_cast<std::int64_t>(kept_states().size()) : product_dimension();
  }

  void check_budget(std::int64_t budget = dimension_budget()) const {
    if (cavity_cutoff < 1) throw std::invalid_argument("cavity_cutoff must be at least 1");
    if (atom_model == AtomModel::oscillator && atom_cutoff < 1)
      throw std::invalid_argument("atom_cutoff must be at least 1");
    if (n_atoms < 0) throw std::invalid_argument("n_atoms must be non-negative");
    if (max_excitations < 0) throw std::invalid_argument("max_excitations must be non-negative");
    if (dimension() > budget)
      throw BudgetError("Hilbert-space dimension " + std::to_string(dimension()) + " exceeds budget " +
                        std::to_string(budget) + " (set CAVLAB_BUDGET to raise it)");
  }
};

inline SpMat identity(Eigen::Index n) {
  SpMat m(n, n);
  m.setIdentity();
  return m;
}

/// Annihilation operator on levels 0..cutoff.
inline SpMat destroy(int cutoff) {
  SpMat m(cutoff + 1, cutoff + 1);
  std::vector<Triplet> t;
  for (int n = 1; n <= cutoff; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline SpMat diagonal(const std::vector<double>& d) {
  SpMat m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Lifts a single-factor operator to the full space.
inline SpMat embed(const SpMat& local, std::size_t position, const std::vector<int>& factors) {
  Eigen::Index left = 1, right = 1;
  for (std::size_t i = 0; i < position; ++i) left *= factors[i];
  for (std::size_t i = position + 1; i < factors.size(); ++i) right *= factors[i];
  SpMat out = Eigen::kroneckerProduct(identity(left), local).eval();
  return Eigen::kroneckerProduct(out, identity(right)).eval();
}

namespace detail {

/// Principal submatrix on the kept states.
inline SpMat restrict_to(const SpMat& full, const std::vector<std::int64_t>& keep) {
  std::vector<Eigen::Index> pos(static_cast<std::size_t>(full.rows()), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) pos[static_cast<std::size_t>(keep[i])] = static_cast<Eigen::Index>(i);
  std::vector<Triplet> t;
  for (Eigen::Index col = 0; col < full.outerSize(); ++col) {
    const Eigen::Index c = pos[static_cast<std::size_t>(col)];
    if (c < 0) continue;
    for (SpMat::InnerIterator it(full, col); it; ++it) {
      const Eigen::Index r = pos[static_cast<std::size_t>(it.row())];
      if (r >= 0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
    }
  }
  SpMat out(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace detail

/// Ladder operators of every mode on the product space. For two-level atoms
/// `atom_lower` holds sigma_- and `atom_z` holds sigma_z. Under an excitation
/// cap, composite operators must be formed here and then passed through
/// `restrict()`; products of restricted operators lose intermediate states.
struct SystemOperators {
  SpaceSpec space;
  SpMat identity_op;
  SpMat a_c;
  std::vector<SpMat> atom_lower;
  std::vector<SpMat> atom_z;
  SpMat a_p;  // empty (0x0) without a probe
  std::vector<std::int64_t> kept;  // empty without a cap

  SpMat cavity_number() const { return SpMat(a_c.adjoint() * a_c); }
  SpMat atom_number(int j) const { return SpMat(atom_lower[j].adjoint() * atom_lower[j]); }

  /// Operator on the (possibly capped) state space.
  SpMat restrict(const SpMat& full) const { return kept.empty() ? full : detail::restrict_to(full, kept); }
};

inline SystemOperators make_operators(const SpaceSpec& space) {
  space.check_budget();
  const auto f = space.factors();
  SystemOperators ops;
  ops.space = space;
  if (space.max_excitations > 0) ops.kept = space.kept_states();
  ops.identity_op = identity(space.product_dimension());
  ops.a_c = embed(destroy(space.cavity_cutoff), 0, f);
  const int atom_cut = space.atom_model == AtomModel::two_level ? 1 : space.atom_cutoff;
  for (int j = 0; j < space.n_atoms; ++j) {
    ops.atom_lower.push_back(embed(destroy(atom_cut), 1 + j, f));
    if (space.atom_model == AtomModel::two_level) ops.atom_z.push_back(embed(diagonal({-1.0, 1.0}), 1 + j, f));
  }
  if (space.probe_enabled) ops.a_p = embed(destroy(1), f.size() - 1, f);
  return ops;
}

/// Weakly coupled narrow-band probe cavity, detuned by `detuning` from the
/// drive, coupled with strength `coupling` and damped at rate `kappa_p`.
struct ProbeCoupling {
  double detuning = 0.0;
  double coupling = 0.0;
  double kappa_p = 0.0;
};

/// Hamiltonian in the frame rotating at omega_L (hbar = 1). Atoms enter as
/// sigma_z/2 (two-level) or a^+a (oscillator); the drive is
/// i sqrt(2 kappa1) (beta a_c^+ - beta^* a_c).
inline SpMat hamiltonian(const SystemParams& p, double omega_L, const SystemOperators& ops,
                         const ProbeCoupling* probe = nullptr) {
  const auto d = derive(p, omega_L);
  const SpMat ac_dag = ops.a_c.adjoint();
  SpMat h = d.delta_c * SpMat(ac_dag * ops.a_c);
  for (std::size_t j = 0; j < ops.atom_lower.size(); ++j) {
    const SpMat& lo = ops.atom_lower[j];
    const SpMat lo_dag = lo.adjoint();
    if (ops.space.atom_model == AtomModel::two_level)
      h += (0.5 * d.delta_a) * ops.atom_z[j];
    else
      h += d.delta_a * SpMat(lo_dag * lo);
    h += p.g * SpMat(lo_dag * ops.a_c + lo * ac_dag);
  }
  const complex drive = kI * std::sqrt(2.0 * p.kappa1);
  h += drive * p.beta * ac_dag - drive * std::conj(p.beta) * ops.a_c;
  if (probe) {
    if (!ops.space.probe_enabled) throw std::invalid_argument("probe coupling requested without a probe mode");
    const SpMat ap_dag = ops.a_p.adjoint();
    h += probe->detuning * SpMat(ap_dag * ops.a_p);
    h += probe->coupling * SpMat(ac_dag * ops.a_p + ops.a_c * ap_dag);
  }
  return ops.restrict(h);
}

/// Collapse operators: cavity leakage, cavity jitter, atomic decay,
/// individual dephasing and collective dephasing (plus probe leakage).
/// Channels with zero rate are omitted.
inline std::vector<SpMat> collapse_operators(const SystemParams& p, const SystemOperators& ops,
                                             const ProbeCoupling* probe = nullptr) {
  std::vector<SpMat> c;
  c.push_back(std::sqrt(2.0 * total_kappa(p)) * ops.a_c);
  if (p.jitter_rate > 0.0) c.push_back(std::sqrt(2.0 * p.jitter_rate) * ops.cavity_number());
  const bool two_level = ops.space.atom_model == AtomModel::two_level;
  SpMat collective(ops.identity_op.rows(), ops.identity_op.cols());
  for (std::size_t j = 0; j < ops.atom_lower.size(); ++j) {
    c.push_back(std::sqrt(p.gamma_par) * ops.atom_lower[j]);
    // sigma_z/sqrt(2 tau) for two-level atoms, sqrt(2/tau) a^+a for oscillators
    const SpMat pop = two_level ? SpMat(0.5 * ops.atom_z[j]) : ops.atom_number(static_cast<int>(j));
    if (p.indiv_rate > 0.0) c.push_back(std::sqrt(2.0 * p.indiv_rate) * pop);
    collective += pop;
  }
  if (p.common_rate > 0.0 && !ops.atom_lower.empty()) c.push_back(std::sqrt(2.0 * p.common_rate) * collective);
  if (probe && probe->kappa_p > 0.0) c.push_back(std::sqrt(2.0 * probe->kappa_p) * ops.a_p);
  for (auto& op : c) op = ops.restrict(op);
  return c;
}

struct Liouvillian {
  SpaceSpec space;
  Eigen::Index dim = 0;  // Hilbert-space dimension
  SpMat generator;       // acts on column-major vec(rho)
};

inline Liouvillian assemble_liouvillian(const SpaceSpec& space, const SpMat& h, const std::vector<SpMat>& collapse) {
  const Eigen::Index d = h.rows();
  const SpMat id = identity(d);
  SpMat l = (-kI) * SpMat(Eigen::kroneckerProduct(id, h)) + kI * SpMat(Eigen::kroneckerProduct(SpMat(h.transpose()), id));
  for (const auto& c : collapse) {
    const SpMat cdc = c.adjoint() * c;
    l += SpMat(Eigen::kroneckerProduct(SpMat(c.conjugate()), c));
    l -= 0.5 * SpMat(Eigen::kroneckerProduct(id, cdc));
    l -= 0.5 * SpMat(Eigen::kroneckerProduct(SpMat(cdc.transpose()), id));
  }
  l.prune(complex(0.0));
  return {space, d, std::move(l)};
}

/// Generator rho -> -i[H, rho] + sum_m D[C_m](rho) for the configuration.
inline Liouvillian build_liouvillian(const SystemParams& p, double omega_L, const SpaceSpec& space,
                                     const ProbeCoupling* probe = nullptr) {
  validate(p);
  if (space.n_atoms != p.n_atoms)
    throw std::invalid_argument("space n_atoms (" + std::to_string(space.n_atoms) +
                                ") differs from params n_atoms (" + std::to_string(p.n_atoms) + ")");
  const auto ops = make_operators(space);
  return assemble_liouvillian(space, hamiltonian(p, omega_L, ops, probe), collapse_operators(p, ops, probe));
}

}  // namespace cavlab::liouville
