#pragma once

#include "qacse/fermion/operators.hpp"
#include "qacse/fermion/pauli.hpp"

namespace qacse {

/// a+_j -> Z_0 ... Z_{j-1} (X_j - i Y_j)/2, a_j -> Z_0 ... Z_{j-1} (X_j + i Y_j)/2.
inline PauliSum jordan_wigner_ladder(const LadderOp& op, int n_qubits) {
  require(op.mode >= 0 && op.mode < n_qubits, "jordan_wigner: mode index out of range");
  std::string x(n_qubits, 'I');
  for (int q = 0; q < op.mode; ++q) x[q] = 'Z';
  std::string y = x;
  x[op.mode] = 'X';
  y[op.mode] = 'Y';
  PauliSum out(n_qubits);
  out.add(x, 0.5);
  out.add(y, op.dagger ? -0.5 * kI : 0.5 * kI);
  return out;
}

inline PauliSum jordan_wigner(const FermionSum& op, int n_qubits) {
  require(op.max_mode() < n_qubits, "jordan_wigner: mode index out of range");
  PauliSum out(n_qubits);
  for (const auto& [ops, c] : op.terms()) {
    PauliSum prod = PauliSum::identity(n_qubits, c);
    for (const auto& lop : ops) prod = prod * jordan_wigner_ladder(lop, n_qubits);
    out += prod;
  }
  return out.simplify();
}

}  // namespace qacse
