#pragma once

// Gate-level circuits. Rotation convention used everywhere:
//   PauliRotation{P, theta} = exp(-i theta/2 P)
// P is a full-width letter string with qubit 0 leftmost.

#include <algorithm>
#include <functional>
#include <nlohmann/json.hpp>
#include <numbers>
#include <variant>

#include "qacse/fermion/jordan_wigner.hpp"

namespace qacse {

struct PauliRotation {
  std::string pauli;
  double angle = 0.0;
};

/// Rotates `qubit` so a Z measurement afterwards reads out `basis`: X -> H, Y -> H S+, Z -> nothing.
struct BasisRotation {
  int qubit = 0;
  char basis = 'Z';
};

struct Cnot {
  int control = 0;
  int target = 1;
};

using Gate = std::variant<PauliRotation, BasisRotation, Cnot>;

struct Circuit {
  int n_qubits = 0;
  std::vector<Gate> gates;

  explicit Circuit(int n = 0) : n_qubits(n) {}

  void add(Gate g) {
    validate(g);
    gates.push_back(std::move(g));
  }
  void append(const Circuit& other) {
    require(other.n_qubits == n_qubits, "circuit append: qubit count mismatch");
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
  }
  std::size_t size() const { return gates.size(); }
  bool empty() const { return gates.empty(); }

  void validate(const Gate& g) const {
    std::visit(
        [this](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, PauliRotation>) {
            require(static_cast<int>(x.pauli.size()) == n_qubits && is_pauli_string(x.pauli),
                    "invalid rotation string " + x.pauli);
            require(std::isfinite(x.angle), "non-finite rotation angle");
          } else if constexpr (std::is_same_v<T, BasisRotation>) {
            require(x.qubit >= 0 && x.qubit < n_qubits, "basis rotation qubit out of range");
            require(x.basis == 'X' || x.basis == 'Y' || x.basis == 'Z', "basis must be X, Y or Z");
          } else {
            require(x.control >= 0 && x.control < n_qubits && x.target >= 0 && x.target < n_qubits &&
                        x.control != x.target,
                    "invalid CNOT qubits");
          }
        },
        g);
  }
};

inline std::string single_letter(int n, int q, char letter) {
  std::string s(n, 'I');
  s[q] = letter;
  return s;
}

/// CNOTs used by the linear-chain lowering: 2(w-1) per weight-w rotation.
inline int cnot_count(const Circuit& c) {
  int total = 0;
  for (const auto& g : c.gates) {
    if (std::holds_alternative<Cnot>(g)) ++total;
    if (const auto* r = std::get_if<PauliRotation>(&g)) total += 2 * std::max(0, pauli_weight(r->pauli) - 1);
  }
  return total;
}

/// Lowers multi-qubit rotations to single-qubit rotations and a CNOT ladder:
///   exp(-i t/2 P) = B+ L+ Rz_last(t) L B, with B mapping each X/Y to Z and L the parity ladder.
inline Circuit lower_to_native(const Circuit& c) {
  constexpr double half_pi = std::numbers::pi / 2;
  Circuit out(c.n_qubits);
  const int n = c.n_qubits;
  for (const auto& g : c.gates) {
    const auto* r = std::get_if<PauliRotation>(&g);
    if (!r || pauli_weight(r->pauli) <= 1) {
      out.gates.push_back(g);
      continue;
    }
    std::vector<int> support;
    for (int q = 0; q < n; ++q)
      if (r->pauli[q] != 'I') support.push_back(q);
    auto basis_change = [&](bool forward) {
      for (int q : support) {
        if (r->pauli[q] == 'X') out.gates.push_back(PauliRotation{single_letter(n, q, 'Y'), forward ? -half_pi : half_pi});
        if (r->pauli[q] == 'Y') out.gates.push_back(PauliRotation{single_letter(n, q, 'X'), forward ? half_pi : -half_pi});
      }
    };
    basis_change(true);
    for (std::size_t k = 0; k + 1 < support.size(); ++k) out.gates.push_back(Cnot{support[k], support[k + 1]});
    out.gates.push_back(PauliRotation{single_letter(n, support.back(), 'Z'), r->angle});
    for (std::size_t k = support.size() - 1; k-- > 0;) out.gates.push_back(Cnot{support[k], support[k + 1]});
    basis_change(false);
  }
  return out;
}

namespace detail {

// Matches P1, P2 that agree everywhere except on two qubits a < b where
// (P1, P2) restricted to (a, b) is (XX, YY) or (YY, XX) with equal angles, or
// (XY, YX) / (YX, XY) with opposite angles.
struct PairMatch {
  int a = -1, b = -1;
  bool mixed = false;  // XY/YX form
};

inline std::optional<PairMatch> match_pair(const PauliRotation& p, const PauliRotation& q, double tol = 1e-14) {
  std::vector<int> diff;
  for (std::size_t k = 0; k < p.pauli.size(); ++k)
    if (p.pauli[k] != q.pauli[k]) diff.push_back(static_cast<int>(k));
  if (diff.size() != 2) return std::nullopt;
  const int a = diff[0], b = diff[1];
  const std::string pp{p.pauli[a], p.pauli[b]}, qq{q.pauli[a], q.pauli[b]};
  if (((pp == "XX" && qq == "YY") || (pp == "YY" && qq == "XX")) && std::abs(p.angle - q.angle) <= tol)
    return PairMatch{a, b, false};
  if (((pp == "XY" && qq == "YX") || (pp == "YX" && qq == "XY")) && std::abs(p.angle + q.angle) <= tol)
    return PairMatch{a, b, true};
  return std::nullopt;
}

}  // namespace detail

/// Rewrites adjacent commuting XX/YY (or XY/YX) rotation pairs with the identity
///   exp(-i t/2 (XX + YY) R) = V+ CNOT_ab [exp(-i t/2 X_a R) exp(-i t/2 Z_b R)] CNOT_ab V,  V = Rx_a(pi/2) Rx_b(pi/2)
/// which saves two CNOTs per pair. The XY/YX form is first mapped to XX/YY by a Z rotation on b.
inline Circuit compile_reduce_cnots(const Circuit& c) {
  constexpr double half_pi = std::numbers::pi / 2;
  const int n = c.n_qubits;
  Circuit out(n);
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    const auto* p = std::get_if<PauliRotation>(&c.gates[g]);
    const auto* q = g + 1 < c.gates.size() ? std::get_if<PauliRotation>(&c.gates[g + 1]) : nullptr;
    std::optional<detail::PairMatch> m;
    if (p && q) m = detail::match_pair(*p, *q);
    if (!m) {
      out.gates.push_back(c.gates[g]);
      continue;
    }
    const int a = m->a, b = m->b;
    double theta = p->angle;
    if (m->mixed) {
      // Conjugation by Rz_b(-pi/2) maps X_a X_b + Y_a Y_b to X_a Y_b - Y_a X_b.
      theta = p->pauli[a] == 'X' ? p->angle : q->angle;
      out.gates.push_back(PauliRotation{single_letter(n, b, 'Z'), -half_pi});
    }
    std::string xa = p->pauli, zb = p->pauli;
    xa[a] = 'X';
    xa[b] = 'I';
    zb[a] = 'I';
    zb[b] = 'Z';
    out.gates.push_back(PauliRotation{single_letter(n, a, 'X'), -half_pi});
    out.gates.push_back(PauliRotation{single_letter(n, b, 'X'), -half_pi});
    out.gates.push_back(Cnot{a, b});
    out.gates.push_back(PauliRotation{xa, theta});
    out.gates.push_back(PauliRotation{zb, theta});
    out.gates.push_back(Cnot{a, b});
    out.gates.push_back(PauliRotation{single_letter(n, a, 'X'), half_pi});
    out.gates.push_back(PauliRotation{single_letter(n, b, 'X'), half_pi});
    if (m->mixed) out.gates.push_back(PauliRotation{single_letter(n, b, 'Z'), half_pi});
    ++g;
  }
  return out;
}

/// Optional qubit-space transform applied to each JW image before it becomes rotations
/// (used to run the ansatz on a tapered register).
using PauliTransform = std::function<PauliSum(const PauliSum&)>;

/// Splits an anti-Hermitian fermionic operator into excitation orbits {E, E+}. Each orbit
/// a E - conj(a) E+ is split further into a real part a_r (E - E+) and an imaginary part
/// i a_i (E + E+); each part is number and Sz conserving and its JW strings commute.
inline std::vector<FermionSum> excitation_parts(const FermionSum& op) {
  // key = smaller of {E, E+} in normal order; value = (coefficient of E, coefficient of E+)
  std::map<LadderString, std::pair<Complex, Complex>> orbits;
  for (const auto& [ops, c] : op.terms()) {
    LadderString rev(ops.rbegin(), ops.rend());
    for (auto& o : rev) o.dagger = !o.dagger;
    const auto adj = FermionSum::term(1.0, rev);  // ops+ in normal order: a single signed string
    const auto& [adj_ops, sign] = *adj.terms().begin();
    if (ops <= adj_ops)
      orbits[ops].first += c;
    else
      orbits[adj_ops].second += c * sign;  // ops = sign * (adj_ops)+
  }
  std::vector<FermionSum> parts;
  for (const auto& [key, coefs] : orbits) {
    const FermionSum e = FermionSum::term(1.0, key);
    const FermionSum ed = e.adjoint();
    if ((e - ed).empty()) {
      parts.push_back(e * Complex(0.0, coefs.first.imag()));
      continue;
    }
    const Complex a = 0.5 * (coefs.first - std::conj(coefs.second));
    if (a.real() != 0.0) parts.push_back((e - ed) * a.real());
    if (a.imag() != 0.0) parts.push_back((e + ed) * Complex(0.0, a.imag()));
  }
  return parts;
}

/// Circuit for prod_steps prod_parts prod_k exp(eps * c_k P_k) with {c_k P_k} the JW image of each
/// part; c_k = i b_k gives the rotation angle theta = -2 eps b_k. Strings inside one part are applied
/// in lexicographic order.
inline Circuit build_ansatz_circuit(const std::vector<std::pair<FermionSum, double>>& steps, int n_qubits,
                                    const PauliTransform& transform = {}) {
  int width = n_qubits;
  std::vector<std::pair<PauliSum, double>> images;
  for (const auto& [op, eps] : steps) {
    require(op.is_anti_hermitian(1e-10), "ansatz operator is not anti-Hermitian", "build_ansatz_circuit");
    for (const auto& part : excitation_parts(op)) {
      PauliSum img = jordan_wigner(part, n_qubits);
      if (transform) img = transform(img);
      width = img.n_qubits();
      images.emplace_back(std::move(img), eps);
    }
  }
  Circuit c(width);
  for (const auto& [img, eps] : images)
    for (const auto& [p, coef] : img.terms()) {
      require(std::abs(coef.real()) <= 1e-10, "JW image not anti-Hermitian", "build_ansatz_circuit");
      if (p.find_first_not_of('I') == std::string::npos) continue;  // global phase
      c.add(PauliRotation{p, -2.0 * eps * coef.imag()});
    }
  return c;
}

inline nlohmann::json to_json(const Circuit& c) {
  nlohmann::json j;
  j["n_qubits"] = c.n_qubits;
  auto& gates = j["gates"] = nlohmann::json::array();
  for (const auto& g : c.gates)
    std::visit(
        [&gates](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, PauliRotation>)
            gates.push_back({{"type", "pauli_rotation"}, {"pauli", x.pauli}, {"angle", x.angle}});
          else if constexpr (std::is_same_v<T, BasisRotation>)
            gates.push_back({{"type", "basis_rotation"}, {"qubit", x.qubit}, {"basis", std::string(1, x.basis)}});
          else
            gates.push_back({{"type", "cnot"}, {"control", x.control}, {"target", x.target}});
        },
        g);
  return j;
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c(j.at("n_qubits").get<int>());
  for (const auto& g : j.at("gates")) {
    const std::string type = g.at("type");
    if (type == "pauli_rotation")
      c.add(PauliRotation{g.at("pauli"), g.at("angle")});
    else if (type == "basis_rotation")
      c.add(BasisRotation{g.at("qubit"), g.at("basis").get<std::string>().at(0)});
    else if (type == "cnot")
      c.add(Cnot{g.at("control"), g.at("target")});
    else
      throw Error("unknown gate type " + type, "circuit_from_json");
  }
  return c;
}

}  // namespace qacse
