#pragma once

// ACSE residual 2A^{ij;kl} = <psi| [a+_i a+_j a_l a_k, H] |psi>.
//
// The ansatz generator is A^ = sum_{ijkl} conj(2A^{ij;kl}) a+_i a+_j a_l a_k, which is
// anti-Hermitian because 2A^{kl;ij} = -conj(2A^{ij;kl}). Along exp(eps A^) the energy changes
// at the rate dE/deps = -sum |2A|^2, so positive eps descends.

#include "qacse/backend/statevector.hpp"
#include "qacse/rdm/rdm.hpp"

namespace qacse {

struct ResidualA {
  int n = 0;
  CMatrix a2;  // (i*n+j, k*n+l)

  ResidualA() = default;
  explicit ResidualA(int n_modes) : n(n_modes), a2(CMatrix::Zero(n_modes * n_modes, n_modes * n_modes)) {}

  Complex operator()(int i, int j, int k, int l) const { return a2(i * n + j, k * n + l); }

  /// l2 norm over independent elements (i<j, k<l).
  double norm() const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = k + 1; l < n; ++l) s += std::norm((*this)(i, j, k, l));
    return std::sqrt(s);
  }
  double max_abs() const { return a2.size() ? a2.cwiseAbs().maxCoeff() : 0.0; }

  /// Largest deviation from the antisymmetry and anti-Hermiticity relations.
  double invariant_violation() const {
    double v = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const Complex a = (*this)(i, j, k, l);
            v = std::max({v, std::abs(a + (*this)(j, i, k, l)), std::abs(a + (*this)(i, j, l, k)),
                          std::abs(a + std::conj((*this)(k, l, i, j)))});
          }
    return v;
  }

  /// A^ restricted to independent index pairs; each appears four times in the full sum.
  FermionSum to_operator(double tol = 1e-14) const {
    FermionSum op;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = k + 1; l < n; ++l) {
            const Complex a = (*this)(i, j, k, l);
            if (std::abs(a) > tol) op = op + FermionSum::two_body(i, j, k, l, 4.0 * std::conj(a));
          }
    return op;
  }
};

/// Projects onto the invariant subspace: antisymmetric in each pair, anti-Hermitian overall.
inline ResidualA antisymmetrize(const ResidualA& a) {
  ResidualA out(a.n);
  const int n = a.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const Complex s = a(i, j, k, l) - a(j, i, k, l) - a(i, j, l, k) + a(j, i, l, k);
          const Complex t = a(k, l, i, j) - a(l, k, i, j) - a(k, l, j, i) + a(l, k, j, i);
          out.a2(i * n + j, k * n + l) = (s - std::conj(t)) / 8.0;
        }
  return out;
}

/// Residual from the 1-, 2- and 3-RDMs:
///   f(ij,kl) = 2 sum_st K^{kl}_{st} D^{ij}_{st} - 2 sum_qst K^{kq}_{st} 3D^{ijq}_{stl}
///                                               + 2 sum_qst K^{lq}_{st} 3D^{ijq}_{stk}
///   2A^{ij;kl} = f(ij,kl) - conj(f(kl,ij))
/// f is <E H> with the four-body part dropped; that part cancels in the commutator.
inline ResidualA residual_from_rdms(const TwoRDM& d2, const ThreeRDM& d3, const ReducedHamiltonian& ham) {
  const int n = ham.n();
  require(d2.n() == n && d3.n() == n, "RDM dimension does not match Hamiltonian", "residual_classical");
  const CMatrix two = 2.0 * d2.d2 * ham.k2.transpose();
  // t(ij, k, l) = sum_qst K^{kq}_{st} 3D^{ijq}_{stl}
  std::vector<Complex> t(static_cast<std::size_t>(n) * n * n * n, Complex{});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int k = 0; k < n; ++k)
        for (int q = 0; q < n; ++q) {
          if (q == k) continue;
          for (int s = 0; s < n; ++s)
            for (int u = 0; u < n; ++u) {
              const Complex kk = ham(k, q, s, u);
              if (kk == Complex{}) continue;
              for (int l = 0; l < n; ++l) t[((i * n + j) * n + k) * n + l] += kk * d3(i, j, q, s, u, l);
            }
        }
    }
  auto f = [&](int i, int j, int k, int l) {
    return two(i * n + j, k * n + l) - 2.0 * t[((i * n + j) * n + k) * n + l] + 2.0 * t[((i * n + j) * n + l) * n + k];
  };
  ResidualA a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) a.a2(i * n + j, k * n + l) = f(i, j, k, l) - std::conj(f(k, l, i, j));
  return antisymmetrize(a);
}

/// Classical path: the 3-RDM is reconstructed from the 1- and 2-RDMs.
inline ResidualA residual_classical(const OneRDM& d1, const TwoRDM& d2, const ReducedHamiltonian& ham) {
  require(d1.n() == ham.n() && d2.n() == ham.n(), "RDM dimension does not match Hamiltonian", "residual_classical");
  return residual_from_rdms(d2, reconstruct_3rdm(d1, d2, ham.n_electrons), ham);
}

/// 2A = (Lambda+ - Lambda-) / (2 i delta) from the auxiliary 2-RDMs of exp(+-i delta H)|psi>.
inline ResidualA residual_from_auxiliary(const TwoRDM& lambda_plus, const TwoRDM& lambda_minus, double delta) {
  require(delta != 0.0, "delta must be nonzero", "residual_quantum");
  require(lambda_plus.n() == lambda_minus.n(), "auxiliary RDM dimension mismatch", "residual_quantum");
  ResidualA a(lambda_plus.n());
  a.a2 = (lambda_plus.d2 - lambda_minus.d2) / Complex(0.0, 2.0 * delta);
  return antisymmetrize(a);
}

/// Exact mode: exp(+-i delta H) applied to the statevector.
inline ResidualA residual_quantum_exact(const CVector& psi, const SparseCMatrix& h_fock, int n_modes, double delta) {
  require(delta != 0.0, "delta must be nonzero", "residual_quantum");
  const CVector plus = expmv(h_fock, psi, Complex(0.0, delta));
  const CVector minus = expmv(h_fock, psi, Complex(0.0, -delta));
  return residual_from_auxiliary(exact_2rdm(plus, n_modes), exact_2rdm(minus, n_modes), delta);
}

/// One first-order trotter slice of exp(sign * i delta H) for a Pauli-sum H.
inline Circuit trotter_slice(const PauliSum& h, double delta, int sign) {
  Circuit c(h.n_qubits());
  for (const auto& [p, coef] : h.terms()) {
    if (p.find_first_not_of('I') == std::string::npos) continue;
    // exp(i s delta c P) = exp(-i theta/2 P) with theta = -2 s delta c
    c.add(PauliRotation{p, -2.0 * sign * delta * coef.real()});
  }
  return c;
}

/// Brute force <psi|[a+_i a+_j a_l a_k, H]|psi> with dense Fock matrices (test oracle, small n).
inline ResidualA residual_dense(const CVector& psi, const SparseCMatrix& h_fock, int n) {
  ResidualA a(n);
  const CVector hpsi = h_fock * psi;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (i == j || k == l) continue;
          const LadderString e{{i, true}, {j, true}, {l, false}, {k, false}};
          const LadderString ed{{k, true}, {l, true}, {j, false}, {i, false}};
          // <psi|E H|psi> - <psi|H E|psi> = <E+ psi|H psi> - <H psi|E psi>
          a.a2(i * n + j, k * n + l) = apply_ladder(ed, psi).dot(hpsi) - hpsi.dot(apply_ladder(e, psi));
        }
  return a;
}

/// Keeps elements with |A| >= fraction * max|A|. The kept set is closed under the element
/// orbits because partners share magnitudes; a small relative slack absorbs rounding.
inline ResidualA select_operators(const ResidualA& a, double fraction) {
  require(fraction >= 0.0 && fraction <= 1.0, "selection fraction must lie in [0, 1]", "select_operators");
  ResidualA out(a.n);
  const double mx = a.max_abs();
  if (mx == 0.0) return out;
  const double cut = fraction * mx * (1 - 1e-9);
  for (Eigen::Index r = 0; r < a.a2.rows(); ++r)
    for (Eigen::Index c = 0; c < a.a2.cols(); ++c)
      if (std::abs(a.a2(r, c)) >= cut && a.a2(r, c) != Complex{}) out.a2(r, c) = a.a2(r, c);
  return out;
}

}  // namespace qacse
