#pragma once

#include <nlohmann/json.hpp>

#include "qacse/fermion/fock.hpp"
#include "qacse/fermion/jordan_wigner.hpp"
#include "qacse/hamiltonian/integrals.hpp"

namespace qacse {

/// Two-index pair (p, q) over n spin orbitals flattened as p*n + q.
inline int pair_index(int p, int q, int n) { return p * n + q; }

/// The two-body reduced Hamiltonian K^{pq}_{st} over 2r spin orbitals, stored as an
/// n^2 x n^2 matrix with row (p,q) and column (s,t). The energy of an N-electron
/// state is  E = sum_{pqst} K^{pq}_{st} D^{pq}_{st} + constant  with
/// D^{pq}_{st} = <a+_p a+_q a_t a_s>; one-body terms are folded in with 1/(N-1).
/// The stored tensor is antisymmetrized in (p,q) and in (s,t).
struct ReducedHamiltonian {
  int n_spin_orbitals = 0;
  int n_electrons = 0;
  double constant = 0.0;
  CMatrix k2;

  int n() const { return n_spin_orbitals; }
  int n_spatial() const { return n_spin_orbitals / 2; }
  Complex operator()(int p, int q, int s, int t) const {
    const int n = n_spin_orbitals;
    return k2(p * n + q, s * n + t);
  }
};

/// Antisymmetrizes in the upper and lower index pairs of an n^2 x n^2 pair matrix.
inline CMatrix antisymmetrize_pairs(const CMatrix& m, int n) {
  CMatrix out(m.rows(), m.cols());
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
          out(p * n + q, s * n + t) = 0.25 * (m(p * n + q, s * n + t) - m(q * n + p, s * n + t) -
                                               m(p * n + q, t * n + s) + m(q * n + p, t * n + s));
  return out;
}

/// K^{pq}_{st} = [delta_qt h_ps + delta_ps h_qt] / (2(N-1)) + 1/2 <pq|st>, spin-orbital expanded.
inline ReducedHamiltonian build_reduced_hamiltonian(const IntegralSet& ints) {
  require(ints.n_electrons >= 2, "reduced Hamiltonian needs N >= 2", "build_reduced_hamiltonian");
  const int r = ints.n_orbitals;
  const int n = 2 * r;
  const double w = 1.0 / (2.0 * (ints.n_electrons - 1));
  auto spatial = [r](int p) { return p % r; };
  auto spin = [r](int p) { return p / r; };
  auto h = [&](int p, int s) { return spin(p) == spin(s) ? ints.one_body(spatial(p), spatial(s)) : 0.0; };

  CMatrix raw = CMatrix::Zero(n * n, n * n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
          double val = 0.0;
          if (q == t) val += w * h(p, s);
          if (p == s) val += w * h(q, t);
          if (spin(p) == spin(s) && spin(q) == spin(t))
            val += 0.5 * ints.v(spatial(p), spatial(q), spatial(s), spatial(t));
          raw(p * n + q, s * n + t) = val;
        }
  ReducedHamiltonian ham;
  ham.n_spin_orbitals = n;
  ham.n_electrons = ints.n_electrons;
  ham.constant = ints.core_energy;
  ham.k2 = antisymmetrize_pairs(raw, n);
  return ham;
}

/// sum K^{pq}_{st} a+_p a+_q a_t a_s as a fermionic operator (constant excluded).
inline FermionSum hamiltonian_operator(const ReducedHamiltonian& ham, double tol = 1e-14) {
  const int n = ham.n();
  FermionSum out;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
          const Complex c = ham(p, q, s, t);
          if (std::abs(c) > tol) out.add(c, {{p, true}, {q, true}, {t, false}, {s, false}});
        }
  out.simplify();
  return out;
}

/// Sparse Fock-space matrix of the Hamiltonian, constant included on the diagonal.
/// Only meaningful inside the N-electron sector.
inline SparseCMatrix hamiltonian_fock_matrix(const ReducedHamiltonian& ham, double tol = 1e-14) {
  const int n = ham.n();
  const std::uint64_t dim = 1ULL << n;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
          if (s == t) continue;
          const Complex c = ham(p, q, s, t);
          if (std::abs(c) <= tol) continue;
          const LadderString ops{{p, true}, {q, true}, {t, false}, {s, false}};
          for (std::uint64_t k = 0; k < dim; ++k)
            if (auto res = apply_ladder_to_basis(ops, k))
              trips.emplace_back(static_cast<int>(res->first), static_cast<int>(k), c * res->second);
        }
    }
  for (std::uint64_t k = 0; k < dim; ++k) trips.emplace_back(static_cast<int>(k), static_cast<int>(k), ham.constant);
  SparseCMatrix m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

/// JW image of the Hamiltonian, constant included as an identity term.
inline PauliSum hamiltonian_pauli(const ReducedHamiltonian& ham) {
  PauliSum h = jordan_wigner(hamiltonian_operator(ham), ham.n());
  h += PauliSum::identity(ham.n(), ham.constant);
  return h.simplify();
}

inline nlohmann::json to_json(const ReducedHamiltonian& ham, double tol = 1e-14) {
  nlohmann::json j;
  j["n_spin_orbitals"] = ham.n_spin_orbitals;
  j["n_electrons"] = ham.n_electrons;
  j["constant"] = ham.constant;
  auto& el = j["elements"] = nlohmann::json::array();
  const int n = ham.n();
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
          const Complex c = ham(p, q, s, t);
          if (std::abs(c) > tol) el.push_back({p, q, s, t, c.real(), c.imag()});
        }
  return j;
}

inline ReducedHamiltonian reduced_hamiltonian_from_json(const nlohmann::json& j) {
  ReducedHamiltonian ham;
  ham.n_spin_orbitals = j.at("n_spin_orbitals");
  ham.n_electrons = j.at("n_electrons");
  ham.constant = j.at("constant");
  const int n = ham.n_spin_orbitals;
  ham.k2 = CMatrix::Zero(n * n, n * n);
  for (const auto& e : j.at("elements"))
    ham.k2(e[0].get<int>() * n + e[1].get<int>(), e[2].get<int>() * n + e[3].get<int>()) =
        Complex(e[4].get<double>(), e[5].get<double>());
  return ham;
}

}  // namespace qacse
