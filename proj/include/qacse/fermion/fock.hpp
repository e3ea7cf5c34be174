#pragma once

// Direct action of ladder operators on Fock-space vectors (JW sign convention:
// a+_j picks up (-1)^{occupied modes below j}).

#include <Eigen/Sparse>
#include <optional>

#include "qacse/fermion/operators.hpp"

namespace qacse {

using SparseCMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

/// Applies the ladder string (rightmost operator first) to basis state `k`.
/// Returns the resulting basis index and sign, or nullopt when annihilated.
inline std::optional<std::pair<std::uint64_t, double>> apply_ladder_to_basis(const LadderString& ops,
                                                                             std::uint64_t k) {
  double sign = 1.0;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const std::uint64_t bit = 1ULL << it->mode;
    const bool occupied = k & bit;
    if (occupied == it->dagger) return std::nullopt;
    if (popcount(k & (bit - 1)) % 2) sign = -sign;
    k ^= bit;
  }
  return std::make_pair(k, sign);
}

inline CVector apply_ladder(const LadderString& ops, const CVector& psi) {
  CVector out = CVector::Zero(psi.size());
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    if (psi[k] == Complex{}) continue;
    if (auto r = apply_ladder_to_basis(ops, static_cast<std::uint64_t>(k)))
      out[static_cast<Eigen::Index>(r->first)] += r->second * psi[k];
  }
  return out;
}

/// Sparse 2^n x 2^n matrix of a fermionic operator.
inline SparseCMatrix fock_matrix(const FermionSum& op, int n_modes) {
  require(op.max_mode() < n_modes, "fock_matrix: mode index out of range");
  const std::uint64_t dim = 1ULL << n_modes;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (const auto& [ops, c] : op.terms())
    for (std::uint64_t k = 0; k < dim; ++k)
      if (auto r = apply_ladder_to_basis(ops, k))
        trips.emplace_back(static_cast<int>(r->first), static_cast<int>(k), c * r->second);
  SparseCMatrix m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

inline Complex expectation(const SparseCMatrix& op, const CVector& psi) { return psi.dot(op * psi); }

inline Complex expectation(const FermionSum& op, const CVector& psi, int n_modes) {
  return expectation(fock_matrix(op, n_modes), psi);
}

/// Basis index of the determinant with the lowest n_alpha alpha and n_beta beta spatial orbitals filled.
inline std::uint64_t hartree_fock_bits(int n_spatial, int n_alpha, int n_beta) {
  require(n_alpha <= n_spatial && n_beta <= n_spatial && n_alpha >= 0 && n_beta >= 0,
          "electron count exceeds orbital count");
  std::uint64_t bits = 0;
  for (int p = 0; p < n_alpha; ++p) bits |= 1ULL << p;
  for (int p = 0; p < n_beta; ++p) bits |= 1ULL << (p + n_spatial);
  return bits;
}

inline CVector basis_state(int n_modes, std::uint64_t bits) {
  CVector v = CVector::Zero(Eigen::Index{1} << n_modes);
  v[static_cast<Eigen::Index>(bits)] = 1.0;
  return v;
}

/// Default spin split for N electrons: n_alpha = ceil(N/2).
inline std::pair<int, int> spin_split(int n_electrons, int two_sz) {
  require((n_electrons + two_sz) % 2 == 0, "N and 2Sz parity mismatch");
  return {(n_electrons + two_sz) / 2, (n_electrons - two_sz) / 2};
}

inline int default_two_sz(int n_electrons) { return n_electrons % 2; }

/// Basis indices of all determinants with the given alpha/beta counts, ascending.
inline std::vector<std::uint64_t> sector_basis(int n_spatial, int n_alpha, int n_beta) {
  std::vector<std::uint64_t> out;
  const std::uint64_t amask = (1ULL << n_spatial) - 1;
  for (std::uint64_t k = 0; k < (1ULL << (2 * n_spatial)); ++k)
    if (popcount(k & amask) == n_alpha && popcount(k >> n_spatial) == n_beta) out.push_back(k);
  return out;
}

}  // namespace qacse
