#pragma once

#include <unordered_map>

#include "qacse/hamiltonian/reduced_hamiltonian.hpp"

namespace qacse {

inline constexpr int kFciSpinOrbitalCap = 14;

struct FciResult {
  double energy = 0.0;
  CVector ground_state;  // full 2^n Fock-space vector
  RVector sector_spectrum;
};

/// Dense Hamiltonian matrix over the determinants of one (N, Sz) sector.
inline CMatrix sector_hamiltonian(const ReducedHamiltonian& ham, const std::vector<std::uint64_t>& basis,
                                  double tol = 1e-14) {
  const int n = ham.n();
  std::unordered_map<std::uint64_t, int> where;
  for (std::size_t i = 0; i < basis.size(); ++i) where[basis[i]] = static_cast<int>(i);
  CMatrix h = CMatrix::Identity(basis.size(), basis.size()) * ham.constant;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
          if (s == t) continue;
          const Complex c = ham(p, q, s, t);
          if (std::abs(c) <= tol) continue;
          const LadderString ops{{p, true}, {q, true}, {t, false}, {s, false}};
          for (std::size_t col = 0; col < basis.size(); ++col)
            if (auto res = apply_ladder_to_basis(ops, basis[col])) {
              auto it = where.find(res->first);
              if (it != where.end()) h(it->second, col) += c * res->second;
            }
        }
    }
  return h;
}

/// Exact lowest eigenpair of the Hamiltonian in the (N, Sz) sector. two_sz defaults to N mod 2.
inline FciResult fci_reference(const ReducedHamiltonian& ham, int n_qubits, std::optional<int> two_sz = {}) {
  const std::string stage = "fci_reference";
  require(n_qubits == ham.n(), "qubit count must equal spin-orbital count", stage);
  require(n_qubits <= kFciSpinOrbitalCap, "dimension above dense FCI cap", stage);
  const auto [na, nb] = spin_split(ham.n_electrons, two_sz.value_or(default_two_sz(ham.n_electrons)));
  const auto basis = sector_basis(ham.n_spatial(), na, nb);
  require(!basis.empty(), "empty (N, Sz) sector", stage);
  const CMatrix h = sector_hamiltonian(ham, basis);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  FciResult out;
  out.energy = es.eigenvalues()[0];
  out.sector_spectrum = es.eigenvalues();
  out.ground_state = CVector::Zero(Eigen::Index{1} << n_qubits);
  CVector v = es.eigenvectors().col(0);
  // Fix the global phase: largest component real positive.
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::abs(v[imax]) / v[imax];
  for (std::size_t i = 0; i < basis.size(); ++i) out.ground_state[static_cast<Eigen::Index>(basis[i])] = v[i];
  return out;
}

}  // namespace qacse
