#pragma once

// Second-quantized operators over spin orbitals.
//
// Spin orbitals use blocked ordering: indices [0, r) are alpha, [r, 2r) beta.
// Terms are kept normal ordered: creators first, then annihilators, each group
// in ascending mode index, with the permutation sign folded into the coefficient.

#include <algorithm>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "qacse/common.hpp"

namespace qacse {

enum class Spin { alpha, beta };

struct SpinOrbital {
  int index = 0;

  static SpinOrbital from_spatial(int spatial, Spin spin, int n_spatial) {
    require(spatial >= 0 && spatial < n_spatial, "spatial orbital out of range");
    return {spatial + (spin == Spin::beta ? n_spatial : 0)};
  }
  Spin spin(int n_spatial) const { return index < n_spatial ? Spin::alpha : Spin::beta; }
  int spatial(int n_spatial) const { return index % n_spatial; }
};

struct LadderOp {
  int mode = 0;
  bool dagger = false;
  friend bool operator==(const LadderOp&, const LadderOp&) = default;
  friend auto operator<=>(const LadderOp& a, const LadderOp& b) {
    if (a.dagger != b.dagger) return b.dagger <=> a.dagger;  // creators sort first
    return a.mode <=> b.mode;
  }
};

using LadderString = std::vector<LadderOp>;

class FermionSum;

/// A single product of ladder operators with a coefficient, in normal order.
struct FermionTerm {
  Complex coefficient{1.0, 0.0};
  LadderString ops;
};

/// Linear combination of normal-ordered ladder strings.
class FermionSum {
 public:
  FermionSum() = default;

  /// Normal-orders `ops` (which may be in any order) and adds coeff * ops.
  void add(Complex coeff, const LadderString& ops) {
    if (coeff == Complex{}) return;
    normal_order_into(coeff, ops);
  }
  void add(const FermionSum& other, Complex scale = 1.0) {
    for (const auto& [ops, c] : other.terms_) accumulate(c * scale, ops);
  }

  static FermionSum term(Complex coeff, const LadderString& ops) {
    FermionSum s;
    s.add(coeff, ops);
    return s;
  }
  static FermionSum creation(int p) { return term(1.0, {{p, true}}); }
  static FermionSum annihilation(int p) { return term(1.0, {{p, false}}); }
  /// a+_i a+_j a_l a_k, the operator whose expectation is the 2-RDM element D^{ij}_{kl}.
  static FermionSum two_body(int i, int j, int k, int l, Complex coeff = 1.0) {
    return term(coeff, {{i, true}, {j, true}, {l, false}, {k, false}});
  }

  FermionSum operator*(const FermionSum& rhs) const {
    FermionSum out;
    for (const auto& [a, ca] : terms_)
      for (const auto& [b, cb] : rhs.terms_) {
        LadderString joined = a;
        joined.insert(joined.end(), b.begin(), b.end());
        out.add(ca * cb, joined);
      }
    return out;
  }
  FermionSum operator+(const FermionSum& rhs) const {
    FermionSum out = *this;
    out.add(rhs);
    return out;
  }
  FermionSum operator-(const FermionSum& rhs) const {
    FermionSum out = *this;
    out.add(rhs, -1.0);
    return out;
  }
  FermionSum operator*(Complex s) const {
    FermionSum out;
    out.add(*this, s);
    return out;
  }

  FermionSum adjoint() const {
    FermionSum out;
    for (const auto& [ops, c] : terms_) {
      LadderString rev(ops.rbegin(), ops.rend());
      for (auto& op : rev) op.dagger = !op.dagger;
      out.add(std::conj(c), rev);
    }
    return out;
  }

  /// Drops coefficients with magnitude at or below tol.
  void simplify(double tol = 1e-12) {
    std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
  }

  bool is_hermitian(double tol = 1e-12) const {
    FermionSum diff = *this - adjoint();
    diff.simplify(tol);
    return diff.empty();
  }
  bool is_anti_hermitian(double tol = 1e-12) const {
    FermionSum sum = *this + adjoint();
    sum.simplify(tol);
    return sum.empty();
  }

  int max_mode() const {
    int m = -1;
    for (const auto& [ops, c] : terms_)
      for (const auto& op : ops) m = std::max(m, op.mode);
    return m;
  }

  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const std::map<LadderString, Complex>& terms() const { return terms_; }

  Complex coefficient(const LadderString& normal_ordered) const {
    auto it = terms_.find(normal_ordered);
    return it == terms_.end() ? Complex{} : it->second;
  }

  std::string to_string() const {
    std::ostringstream os;
    for (const auto& [ops, c] : terms_) {
      os << "(" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)";
      for (const auto& op : ops) os << " " << op.mode << (op.dagger ? "^" : "");
      os << "\n";
    }
    return os.str();
  }

 private:
  void accumulate(Complex c, const LadderString& ops) {
    auto [it, inserted] = terms_.try_emplace(ops, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Complex{}) terms_.erase(it);
    }
  }

  // Bubble sort towards canonical order. Swapping a_p a+_q yields delta_pq - a+_q a_p,
  // so the contraction branch recurses on the shortened string.
  void normal_order_into(Complex coeff, LadderString ops) {
    const std::size_t n = ops.size();
    for (std::size_t pass = 0; pass < n; ++pass) {
      bool swapped = false;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        LadderOp& left = ops[k];
        LadderOp& right = ops[k + 1];
        if (left == right) return;  // a_p a_p = a+_p a+_p = 0
        if (!(right < left)) continue;
        if (!left.dagger && right.dagger && left.mode == right.mode) {
          LadderString contracted;
          contracted.reserve(n - 2);
          for (std::size_t t = 0; t < n; ++t)
            if (t != k && t != k + 1) contracted.push_back(ops[t]);
          normal_order_into(coeff, contracted);
        }
        std::swap(left, right);
        coeff = -coeff;
        swapped = true;
      }
      if (!swapped) break;
    }
    accumulate(coeff, ops);
  }

  std::map<LadderString, Complex> terms_;
};

inline FermionSum operator*(Complex s, const FermionSum& f) { return f * s; }

/// [a, b] = ab - ba.
inline FermionSum commutator(const FermionSum& a, const FermionSum& b) { return a * b - b * a; }

/// Spin operators on 2r blocked spin orbitals.
inline FermionSum number_operator(int n_modes) {
  FermionSum out;
  for (int p = 0; p < n_modes; ++p) out.add(1.0, {{p, true}, {p, false}});
  return out;
}

inline FermionSum sz_operator(int n_spatial) {
  FermionSum out;
  for (int p = 0; p < n_spatial; ++p) {
    out.add(0.5, {{p, true}, {p, false}});
    out.add(-0.5, {{p + n_spatial, true}, {p + n_spatial, false}});
  }
  return out;
}

/// S^2 = S- S+ + Sz (Sz + 1).
inline FermionSum s_squared_operator(int n_spatial) {
  FermionSum s_plus;
  for (int p = 0; p < n_spatial; ++p) s_plus.add(1.0, {{p, true}, {p + n_spatial, false}});
  const FermionSum sz = sz_operator(n_spatial);
  FermionSum one;
  one.add(1.0, {});
  FermionSum out = s_plus.adjoint() * s_plus + sz * (sz + one);
  out.simplify();
  return out;
}

}  // namespace qacse
