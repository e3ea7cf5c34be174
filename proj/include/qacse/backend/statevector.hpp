#pragma once

// Statevector simulation, stochastic Pauli noise and shot sampling.
// Basis index bit q is qubit q; bitstrings print qubit 0 leftmost.

#include <map>
#include <random>

#include "qacse/backend/circuit.hpp"
#include "qacse/fermion/fock.hpp"

namespace qacse {

using StateVector = CVector;

/// Per-qubit readout confusion M[measured][true], columns sum to one.
using Confusion2 = Eigen::Matrix2d;

struct NoiseModel {
  double depolarizing_1q = 0.0;
  double depolarizing_2q = 0.0;
  std::vector<Confusion2> readout;  // empty = perfect readout

  static Confusion2 symmetric_flip(double p) {
    Confusion2 m;
    m << 1 - p, p, p, 1 - p;
    return m;
  }
  /// Same bit-flip probability on every qubit.
  static NoiseModel uniform(int n_qubits, double p1, double p2, double flip) {
    NoiseModel nm{p1, p2, {}};
    if (flip > 0) nm.readout.assign(n_qubits, symmetric_flip(flip));
    return nm;
  }

  void validate(int n_qubits) const {
    require(depolarizing_1q >= 0 && depolarizing_1q <= 1 && depolarizing_2q >= 0 && depolarizing_2q <= 1,
            "depolarizing probability outside [0,1]", "noise_model");
    require(readout.empty() || static_cast<int>(readout.size()) == n_qubits, "readout matrix count mismatch",
            "noise_model");
    for (const auto& m : readout) {
      require((m.array() >= 0).all() && (m.array() <= 1).all(), "readout probability outside [0,1]", "noise_model");
      require(std::abs(m.col(0).sum() - 1) < 1e-12 && std::abs(m.col(1).sum() - 1) < 1e-12,
              "readout columns must sum to one", "noise_model");
    }
  }
  bool gate_noise() const { return depolarizing_1q > 0 || depolarizing_2q > 0; }
};

struct ShotTable {
  std::map<std::string, std::int64_t> counts;
  std::int64_t shots = 0;

  void add(const std::string& bits, std::int64_t k = 1) {
    counts[bits] += k;
    shots += k;
  }
};

inline std::string bitstring(std::uint64_t k, int n) {
  std::string s(n, '0');
  for (int q = 0; q < n; ++q)
    if (k >> q & 1) s[q] = '1';
  return s;
}

inline std::uint64_t parse_bitstring(const std::string& s) {
  std::uint64_t k = 0;
  for (std::size_t q = 0; q < s.size(); ++q) {
    require(s[q] == '0' || s[q] == '1', "invalid bitstring " + s);
    if (s[q] == '1') k |= 1ULL << q;
  }
  return k;
}

/// psi <- P psi.
inline void apply_pauli(const std::string& p, StateVector& psi) {
  const PauliAction act(p);
  StateVector out(psi.size());
  for (Eigen::Index k = 0; k < psi.size(); ++k)
    out[static_cast<Eigen::Index>(k ^ act.xmask)] = act.phase(static_cast<std::uint64_t>(k)) * psi[k];
  psi.swap(out);
}

/// psi <- exp(-i theta/2 P) psi.
inline void apply_rotation(const PauliRotation& r, StateVector& psi) {
  const PauliAction act(r.pauli);
  const double c = std::cos(r.angle / 2), s = std::sin(r.angle / 2);
  if (act.xmask == 0) {
    for (Eigen::Index k = 0; k < psi.size(); ++k) psi[k] *= c - kI * s * act.phase(static_cast<std::uint64_t>(k));
    return;
  }
  // Pair each k with k ^ xmask; visit each pair once via its lower member.
  const std::uint64_t top = 1ULL << (63 - __builtin_clzll(act.xmask));
  for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(psi.size()); ++k) {
    if (k & top) continue;
    const std::uint64_t kk = k ^ act.xmask;
    const Complex a = psi[k], b = psi[kk];
    // (P psi)[kk] = phase(k) a and (P psi)[k] = phase(kk) b
    psi[k] = c * a - kI * s * act.phase(kk) * b;
    psi[kk] = c * b - kI * s * act.phase(k) * a;
  }
}

inline void apply_single_qubit(const Eigen::Matrix2cd& u, int q, StateVector& psi) {
  const std::uint64_t bit = 1ULL << q;
  for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(psi.size()); ++k) {
    if (k & bit) continue;
    const Complex a = psi[k], b = psi[k | bit];
    psi[k] = u(0, 0) * a + u(0, 1) * b;
    psi[k | bit] = u(1, 0) * a + u(1, 1) * b;
  }
}

inline Eigen::Matrix2cd basis_change_matrix(char basis) {
  const double h = 1 / std::sqrt(2.0);
  Eigen::Matrix2cd u;
  if (basis == 'X')
    u << h, h, h, -h;
  else if (basis == 'Y')
    u << h, -kI * h, h, kI * h;  // H S+
  else
    u = Eigen::Matrix2cd::Identity();
  return u;
}

inline void apply_gate(const Gate& g, StateVector& psi) {
  std::visit(
      [&psi](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PauliRotation>) {
          apply_rotation(x, psi);
        } else if constexpr (std::is_same_v<T, BasisRotation>) {
          apply_single_qubit(basis_change_matrix(x.basis), x.qubit, psi);
        } else {
          const std::uint64_t cb = 1ULL << x.control, tb = 1ULL << x.target;
          for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(psi.size()); ++k)
            if ((k & cb) && !(k & tb)) std::swap(psi[k], psi[k | tb]);
        }
      },
      g);
}

inline std::vector<int> gate_qubits(const Gate& g) {
  if (const auto* r = std::get_if<PauliRotation>(&g)) {
    std::vector<int> qs;
    for (std::size_t q = 0; q < r->pauli.size(); ++q)
      if (r->pauli[q] != 'I') qs.push_back(static_cast<int>(q));
    return qs;
  }
  if (const auto* b = std::get_if<BasisRotation>(&g)) return {b->qubit};
  const auto& c = std::get<Cnot>(g);
  return {c.control, c.target};
}

/// Depolarizing channel by trajectory: with probability p, one of the 4^k Paulis on the
/// gate's qubits is applied uniformly at random (identity included), so p = 1 is the fully
/// mixing channel.
inline void depolarize(const std::vector<int>& qubits, double p, int n, std::mt19937_64& rng, StateVector& psi) {
  if (p <= 0 || qubits.empty()) return;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) >= p) return;
  std::string s(n, 'I');
  std::uniform_int_distribution<int> pick(0, 3);
  for (int q : qubits) s[q] = "IXYZ"[pick(rng)];
  apply_pauli(s, psi);
}

/// Noiseless: exact evolution. Noisy: one stochastic trajectory of the natively lowered
/// circuit, reproducible from `seed`.
inline StateVector evolve(const Circuit& c, const StateVector& initial, const NoiseModel* noise = nullptr,
                          std::uint64_t seed = 0) {
  require(initial.size() == (Eigen::Index{1} << c.n_qubits), "state dimension does not match circuit", "evolve");
  StateVector psi = initial;
  if (!noise || !noise->gate_noise()) {
    for (const auto& g : c.gates) apply_gate(g, psi);
    return psi;
  }
  noise->validate(c.n_qubits);
  std::mt19937_64 rng(seed);
  for (const auto& g : lower_to_native(c).gates) {
    apply_gate(g, psi);
    const auto qs = gate_qubits(g);
    depolarize(qs, qs.size() >= 2 ? noise->depolarizing_2q : noise->depolarizing_1q, c.n_qubits, rng, psi);
  }
  return psi;
}

/// Trajectory-averaged density matrix (small registers only).
inline CMatrix average_density(const Circuit& c, const StateVector& initial, const NoiseModel& noise,
                               int trajectories, std::uint64_t seed) {
  require(c.n_qubits <= 10, "average_density: register too large");
  CMatrix rho = CMatrix::Zero(initial.size(), initial.size());
  for (int t = 0; t < trajectories; ++t) {
    const StateVector psi = evolve(c, initial, &noise, mix_seed(seed, t));
    rho += psi * psi.adjoint();
  }
  return rho / trajectories;
}

/// <psi| P |psi>, real for Pauli strings.
inline double pauli_expectation(const std::string& p, const StateVector& psi) {
  const PauliAction act(p);
  Complex s = 0;
  for (Eigen::Index k = 0; k < psi.size(); ++k)
    s += std::conj(psi[static_cast<Eigen::Index>(k ^ act.xmask)]) * act.phase(static_cast<std::uint64_t>(k)) * psi[k];
  return s.real();
}

/// Born probabilities after rotating into the measurement basis of `setting`.
inline std::vector<double> setting_probabilities(const StateVector& psi, const std::string& setting) {
  StateVector rotated = psi;
  for (std::size_t q = 0; q < setting.size(); ++q)
    if (setting[q] == 'X' || setting[q] == 'Y')
      apply_single_qubit(basis_change_matrix(setting[q]), static_cast<int>(q), rotated);
  std::vector<double> p(rotated.size());
  for (Eigen::Index k = 0; k < rotated.size(); ++k) p[k] = std::norm(rotated[k]);
  return p;
}

/// Draws `shots` outcomes from `probs`, flipping bits per the readout model.
inline void draw_shots(const std::vector<double>& probs, std::int64_t shots, int n, const NoiseModel* noise,
                       std::mt19937_64& rng, ShotTable& table) {
  std::discrete_distribution<std::uint64_t> born(probs.begin(), probs.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const bool readout = noise && !noise->readout.empty();
  std::map<std::uint64_t, std::int64_t> tally;
  for (std::int64_t s = 0; s < shots; ++s) {
    std::uint64_t k = born(rng);
    if (readout)
      for (int q = 0; q < n; ++q) {
        const int truth = k >> q & 1;
        if (u(rng) < noise->readout[q](1 - truth, truth)) k ^= 1ULL << q;
      }
    ++tally[k];
  }
  for (const auto& [k, c] : tally) table.add(bitstring(k, n), c);
}

/// Multinomial sampling of each measurement setting from a fixed state.
inline std::map<std::string, ShotTable> sample(const StateVector& psi, const std::vector<std::string>& settings,
                                               std::int64_t shots, const NoiseModel* noise, std::uint64_t seed) {
  require(shots > 0, "shots must be positive", "sample");
  const int n = static_cast<int>(std::log2(static_cast<double>(psi.size())));
  if (noise) noise->validate(n);
  std::map<std::string, ShotTable> out;
  std::uint64_t stream = 0;
  for (const auto& s : settings) {
    require(static_cast<int>(s.size()) == n, "setting length mismatch", "sample");
    std::mt19937_64 rng(mix_seed(seed, stream++));
    draw_shots(setting_probabilities(psi, s), shots, n, noise, rng, out[s]);
  }
  return out;
}

/// Sparse 2^n x 2^n matrix of a Pauli sum.
inline SparseCMatrix sparse_matrix_of(const PauliSum& op) {
  const std::size_t dim = std::size_t{1} << op.n_qubits();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(op.size() * dim);
  for (const auto& [p, c] : op.terms()) {
    const PauliAction act(p);
    for (std::size_t k = 0; k < dim; ++k)
      trips.emplace_back(static_cast<int>(k ^ act.xmask), static_cast<int>(k), c * act.phase(k));
  }
  SparseCMatrix m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(Complex(0.0), 1e-300);
  return m;
}

/// exp(t A) v for sparse A by scaled Taylor series (A need not be Hermitian).
inline CVector expmv(const SparseCMatrix& a, const CVector& v, Complex t, double tol = 1e-16) {
  double norm1 = 0;
  for (int k = 0; k < a.outerSize(); ++k) {
    double col = 0;
    for (SparseCMatrix::InnerIterator it(a, k); it; ++it) col += std::abs(it.value());
    norm1 = std::max(norm1, col);
  }
  const double scaled = std::abs(t) * norm1;
  const int steps = std::max(1, static_cast<int>(std::ceil(scaled / 0.5)));
  const Complex h = t / static_cast<double>(steps);
  CVector out = v;
  for (int s = 0; s < steps; ++s) {
    CVector term = out, sum = out;
    for (int k = 1; k < 60; ++k) {
      term = (a * term) * (h / static_cast<double>(k));
      sum += term;
      if (term.norm() <= tol * sum.norm()) break;
    }
    out = sum;
  }
  return out;
}

}  // namespace qacse
