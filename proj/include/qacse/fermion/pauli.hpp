#pragma once

// Pauli strings and weighted sums of them.
//
// A string is a std::string over {I,X,Y,Z}; character j acts on qubit j
// (qubit 0 leftmost). Computational basis index k has qubit j in state bit j of k.

#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qacse/common.hpp"

namespace qacse {

inline constexpr double kPauliDropTolerance = 1e-12;

/// Single-letter product a*b = phase * result.
inline std::pair<Complex, char> multiply_letters(char a, char b) {
  if (a == 'I') return {1.0, b};
  if (b == 'I') return {1.0, a};
  if (a == b) return {1.0, 'I'};
  // cyclic XY = iZ, YZ = iX, ZX = iY
  auto idx = [](char c) { return c == 'X' ? 0 : c == 'Y' ? 1 : 2; };
  const int ia = idx(a), ib = idx(b);
  const char rest = "XYZ"[3 - ia - ib];
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {cyclic ? kI : -kI, rest};
}

struct PauliTerm {
  Complex coefficient{1.0, 0.0};
  std::string letters;

  int n_qubits() const { return static_cast<int>(letters.size()); }

  PauliTerm operator*(const PauliTerm& rhs) const {
    require(letters.size() == rhs.letters.size(), "Pauli product: qubit count mismatch");
    PauliTerm out{coefficient * rhs.coefficient, std::string(letters.size(), 'I')};
    for (std::size_t q = 0; q < letters.size(); ++q) {
      auto [ph, c] = multiply_letters(letters[q], rhs.letters[q]);
      out.coefficient *= ph;
      out.letters[q] = c;
    }
    return out;
  }
};

inline bool is_pauli_string(const std::string& s) {
  return s.find_first_not_of("IXYZ") == std::string::npos;
}

/// True when the two strings commute (even number of positions with distinct non-identity letters).
inline bool pauli_commutes(const std::string& a, const std::string& b) {
  int anti = 0;
  for (std::size_t q = 0; q < a.size(); ++q)
    if (a[q] != 'I' && b[q] != 'I' && a[q] != b[q]) ++anti;
  return anti % 2 == 0;
}

/// Qubit-wise commuting: on every qubit the letters agree or one is I.
inline bool qubitwise_compatible(const std::string& a, const std::string& b) {
  for (std::size_t q = 0; q < a.size(); ++q)
    if (a[q] != 'I' && b[q] != 'I' && a[q] != b[q]) return false;
  return true;
}

inline int pauli_weight(const std::string& s) {
  int w = 0;
  for (char c : s) w += c != 'I';
  return w;
}

class PauliSum {
 public:
  explicit PauliSum(int n_qubits = 0) : n_qubits_(n_qubits) {}

  static PauliSum identity(int n_qubits, Complex c = 1.0) {
    PauliSum s(n_qubits);
    s.add(std::string(n_qubits, 'I'), c);
    return s;
  }
  static PauliSum single(const std::string& letters, Complex c = 1.0) {
    PauliSum s(static_cast<int>(letters.size()));
    s.add(letters, c);
    return s;
  }

  int n_qubits() const { return n_qubits_; }
  const std::map<std::string, Complex>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Complex coefficient(const std::string& letters) const {
    auto it = terms_.find(letters);
    return it == terms_.end() ? Complex{} : it->second;
  }

  void add(const std::string& letters, Complex c) {
    require(static_cast<int>(letters.size()) == n_qubits_, "Pauli string length mismatch");
    require(is_pauli_string(letters), "invalid Pauli letters: " + letters);
    terms_[letters] += c;
  }
  void add(const PauliTerm& t) { add(t.letters, t.coefficient); }

  PauliSum& operator+=(const PauliSum& rhs) {
    check_same(rhs);
    for (const auto& [p, c] : rhs.terms_) terms_[p] += c;
    return simplify();
  }
  PauliSum& operator-=(const PauliSum& rhs) {
    check_same(rhs);
    for (const auto& [p, c] : rhs.terms_) terms_[p] -= c;
    return simplify();
  }
  PauliSum& operator*=(Complex s) {
    for (auto& [p, c] : terms_) c *= s;
    return simplify();
  }
  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, Complex s) { return a *= s; }
  friend PauliSum operator*(Complex s, PauliSum a) { return a *= s; }

  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    a.check_same(b);
    PauliSum out(a.n_qubits_);
    for (const auto& [pa, ca] : a.terms_)
      for (const auto& [pb, cb] : b.terms_) {
        const PauliTerm prod = PauliTerm{ca, pa} * PauliTerm{cb, pb};
        out.terms_[prod.letters] += prod.coefficient;
      }
    out.simplify();
    return out;
  }

  PauliSum adjoint() const {
    PauliSum out(n_qubits_);
    for (const auto& [p, c] : terms_) out.terms_[p] = std::conj(c);
    return out;
  }

  PauliSum& simplify(double tol = kPauliDropTolerance) {
    std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) < tol; });
    return *this;
  }

  bool is_hermitian(double tol = 1e-14) const {
    for (const auto& [p, c] : terms_)
      if (std::abs(c.imag()) > tol) return false;
    return true;
  }
  bool is_anti_hermitian(double tol = 1e-14) const {
    for (const auto& [p, c] : terms_)
      if (std::abs(c.real()) > tol) return false;
    return true;
  }

  double l1_norm() const {
    double s = 0;
    for (const auto& [p, c] : terms_) s += std::abs(c);
    return s;
  }

  /// One term per line: "+0.5 XXIZ" (real coefficients) or "(re,im) XXIZ".
  std::string to_string() const {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& [p, c] : terms_) {
      if (c.imag() == 0.0)
        os << std::showpos << c.real() << std::noshowpos << " " << p << "\n";
      else
        os << "(" << c.real() << "," << c.imag() << ") " << p << "\n";
    }
    return os.str();
  }

  static PauliSum parse(const std::string& text) {
    std::istringstream is(text);
    std::string coeff, letters;
    std::vector<std::pair<std::string, Complex>> rows;
    while (is >> coeff >> letters) {
      Complex c;
      if (coeff.front() == '(') {
        std::istringstream cs(coeff.substr(1, coeff.size() - 2));
        double re = 0, im = 0;
        char comma = 0;
        cs >> re >> comma >> im;
        require(!cs.fail() && comma == ',', "bad complex coefficient: " + coeff);
        c = {re, im};
      } else {
        std::size_t used = 0;
        c = std::stod(coeff, &used);
        require(used == coeff.size(), "bad coefficient: " + coeff);
      }
      rows.emplace_back(letters, c);
    }
    require(!rows.empty(), "empty Pauli sum text");
    PauliSum out(static_cast<int>(rows.front().first.size()));
    for (const auto& [p, c] : rows) out.add(p, c);
    return out.simplify();
  }

 private:
  void check_same(const PauliSum& o) const {
    require(o.n_qubits_ == n_qubits_, "Pauli sums act on different qubit counts");
  }

  int n_qubits_ = 0;
  std::map<std::string, Complex> terms_;
};

/// ab - ba.
inline PauliSum pauli_commutator(const PauliSum& a, const PauliSum& b) {
  require(a.n_qubits() == b.n_qubits(), "pauli_commutator: mismatched qubit counts");
  return a * b - b * a;
}

inline constexpr int kDenseQubitCap = 12;

/// X-mask and phase for applying one Pauli string to basis state |k>: P|k> = phase(k) |k ^ xmask>.
struct PauliAction {
  std::uint64_t xmask = 0;
  std::uint64_t zmask = 0;
  int n_y = 0;

  explicit PauliAction(const std::string& s) {
    for (std::size_t q = 0; q < s.size(); ++q) {
      if (s[q] == 'X' || s[q] == 'Y') xmask |= 1ULL << q;
      if (s[q] == 'Z' || s[q] == 'Y') zmask |= 1ULL << q;
      n_y += s[q] == 'Y';
    }
  }
  // Y = i X Z, so P = i^{n_y} X^x Z^z and Z^z acts first.
  Complex phase(std::uint64_t k) const {
    static constexpr Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    Complex ph = ipow[n_y % 4];
    return popcount(k & zmask) % 2 ? -ph : ph;
  }
};

/// Dense 2^n x 2^n matrix (Kronecker expansion).
inline CMatrix matrix_of(const PauliSum& op, int cap = kDenseQubitCap) {
  const int n = op.n_qubits();
  require(n <= cap, "matrix_of: qubit count above dense cap");
  const std::size_t dim = std::size_t{1} << n;
  CMatrix m = CMatrix::Zero(dim, dim);
  for (const auto& [p, c] : op.terms()) {
    const PauliAction act(p);
    for (std::size_t k = 0; k < dim; ++k) m(k ^ act.xmask, k) += c * act.phase(k);
  }
  return m;
}

}  // namespace qacse
