#pragma once

// Z2 qubit tapering.
//
// Z-type symmetries of a Pauli sum are the GF(2) kernel of its x-bit check matrix: Z^b
// commutes with a term of x-bits x iff x.b = 0 (mod 2). The kernel basis is put in reduced
// row echelon form (lowest pivot first), so generator i owns a pivot qubit j_i where no other
// generator acts. With U_i = (X_{j_i} + s_i)/sqrt2, U_i s_i U_i = X_{j_i}; after conjugation
// every kept term has I or X on j_i, X is replaced by the sector eigenvalue and the qubit
// is removed.

#include <nlohmann/json.hpp>

#include "qacse/fermion/pauli.hpp"

namespace qacse {

/// Rows: terms (identity excluded); columns: x-bits then z-bits.
struct SymplecticTable {
  int n_qubits = 0;
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<std::string> terms;
};

inline SymplecticTable symplectic_table(const PauliSum& h) {
  SymplecticTable t;
  t.n_qubits = h.n_qubits();
  for (const auto& [p, c] : h.terms()) {
    if (p.find_first_not_of('I') == std::string::npos) continue;
    std::vector<std::uint8_t> row(2 * t.n_qubits, 0);
    for (int q = 0; q < t.n_qubits; ++q) {
      row[q] = p[q] == 'X' || p[q] == 'Y';
      row[t.n_qubits + q] = p[q] == 'Z' || p[q] == 'Y';
    }
    t.rows.push_back(std::move(row));
    t.terms.push_back(p);
  }
  return t;
}

namespace detail {

using Gf2Rows = std::vector<std::vector<std::uint8_t>>;

/// In-place reduced row echelon form; returns pivot columns in order.
inline std::vector<int> gf2_rref(Gf2Rows& m, int cols) {
  std::vector<int> pivots;
  std::size_t r = 0;
  for (int c = 0; c < cols && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && !m[p][c]) ++p;
    if (p == m.size()) continue;
    std::swap(m[r], m[p]);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (i != r && m[i][c])
        for (int k = 0; k < cols; ++k) m[i][k] ^= m[r][k];
    pivots.push_back(c);
    ++r;
  }
  m.resize(r);
  return pivots;
}

/// Basis of {b : M b = 0}.
inline Gf2Rows gf2_kernel(Gf2Rows m, int cols) {
  const auto pivots = gf2_rref(m, cols);
  std::vector<bool> is_pivot(cols, false);
  for (int p : pivots) is_pivot[p] = true;
  Gf2Rows basis;
  for (int f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<std::uint8_t> v(cols, 0);
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r)
      if (m[r][f]) v[pivots[r]] = 1;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace detail

/// Independent Z-type generators of the symmetries of h, in reduced echelon form.
inline std::vector<std::string> find_z2_symmetries(const PauliSum& h) {
  const int n = h.n_qubits();
  const auto table = symplectic_table(h);
  detail::Gf2Rows xs;
  for (const auto& row : table.rows) xs.emplace_back(row.begin(), row.begin() + n);
  auto kernel = detail::gf2_kernel(xs, n);
  detail::gf2_rref(kernel, n);
  std::vector<std::string> gens;
  for (const auto& v : kernel) {
    std::string s(n, 'I');
    for (int q = 0; q < n; ++q)
      if (v[q]) s[q] = 'Z';
    gens.push_back(s);
  }
  return gens;
}

inline std::uint64_t z_mask(const std::string& s) {
  std::uint64_t m = 0;
  for (std::size_t q = 0; q < s.size(); ++q)
    if (s[q] == 'Z') m |= 1ULL << q;
  return m;
}

struct TaperMap {
  int n_qubits = 0;
  std::vector<std::string> generators;
  std::vector<int> removed;  // pivot qubit of each generator
  std::vector<int> sector;   // +1 / -1 per generator

  int n_tapered() const { return n_qubits - static_cast<int>(removed.size()); }

  /// Sector of a computational basis state (e.g. the Hartree-Fock determinant).
  static std::vector<int> sector_of(const std::vector<std::string>& gens, std::uint64_t bits) {
    std::vector<int> s;
    for (const auto& g : gens) s.push_back(popcount(bits & z_mask(g)) % 2 ? -1 : 1);
    return s;
  }
};

inline TaperMap make_taper_map(const PauliSum& h, std::uint64_t reference_bits) {
  TaperMap m;
  m.n_qubits = h.n_qubits();
  m.generators = find_z2_symmetries(h);
  for (const auto& g : m.generators) m.removed.push_back(static_cast<int>(g.find('Z')));
  m.sector = TaperMap::sector_of(m.generators, reference_bits);
  return m;
}

inline void verify_taper_map(const TaperMap& m, const PauliSum& h) {
  require(h.n_qubits() == m.n_qubits, "taper map register mismatch", "taper");
  require(m.removed.size() == m.generators.size() && m.sector.size() == m.generators.size(), "malformed taper map",
          "taper");
  for (std::size_t i = 0; i < m.generators.size(); ++i) {
    for (const auto& [p, c] : h.terms())
      require(pauli_commutes(p, m.generators[i]), "generator " + m.generators[i] + " does not commute with " + p,
              "taper");
    for (std::size_t k = 0; k < m.generators.size(); ++k) {
      const bool hits = m.generators[k][m.removed[i]] == 'Z';
      require(hits == (k == i), "partner X on qubit " + std::to_string(m.removed[i]) + " not found", "taper");
    }
    require(m.sector[i] == 1 || m.sector[i] == -1, "sector eigenvalue must be +-1", "taper");
  }
}

/// Conjugates by the Cliffords and removes the pivot qubits. Terms that anticommute with a
/// generator have zero expectation in a symmetry eigenstate and are dropped.
inline PauliSum apply_taper(const PauliSum& op, const TaperMap& m) {
  require(op.n_qubits() == m.n_qubits, "taper map register mismatch", "taper");
  const int n = m.n_qubits;
  PauliSum kept(n);
  for (const auto& [p, c] : op.terms()) {
    bool ok = true;
    for (const auto& g : m.generators) ok = ok && pauli_commutes(p, g);
    if (ok) kept.add(p, c);
  }
  const double r = 1 / std::sqrt(2.0);
  for (std::size_t i = 0; i < m.generators.size(); ++i) {
    PauliSum u(n);
    std::string x(n, 'I');
    x[m.removed[i]] = 'X';
    u.add(x, r);
    u.add(m.generators[i], r);
    kept = u * kept * u;
    kept.simplify(1e-15);
  }
  std::vector<bool> gone(n, false);
  std::map<int, int> value;
  for (std::size_t i = 0; i < m.removed.size(); ++i) {
    gone[m.removed[i]] = true;
    value[m.removed[i]] = m.sector[i];
  }
  PauliSum out(m.n_tapered());
  for (const auto& [p, c] : kept.terms()) {
    std::string s;
    Complex coef = c;
    for (int q = 0; q < n; ++q) {
      if (!gone[q]) {
        s += p[q];
        continue;
      }
      require(p[q] == 'I' || p[q] == 'X', "conjugated term acts nontrivially on a tapered qubit", "taper");
      if (p[q] == 'X') coef *= value[q];
    }
    out.add(s, coef);
  }
  out.simplify(1e-15);
  return out;
}

inline PauliSum taper(const PauliSum& h, const TaperMap& m) {
  verify_taper_map(m, h);
  return apply_taper(h, m);
}

/// Maps a full-register state in the map's sector onto the tapered register.
inline CVector taper_state(const CVector& psi, const TaperMap& m) {
  const int n = m.n_qubits;
  require(psi.size() == (Eigen::Index{1} << n), "state does not match taper map", "taper");
  CVector v = psi;
  const double r = 1 / std::sqrt(2.0);
  for (std::size_t i = 0; i < m.generators.size(); ++i) {
    // v <- U_i v, U_i = (X_j + s_i)/sqrt2
    const std::uint64_t flip = 1ULL << m.removed[i], zm = z_mask(m.generators[i]);
    CVector w(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const auto uk = static_cast<std::uint64_t>(k);
      w[k] = r * (v[static_cast<Eigen::Index>(uk ^ flip)] + (popcount(uk & zm) % 2 ? -1.0 : 1.0) * v[k]);
    }
    v.swap(w);
  }
  // now X_j v = sector_i v on each removed qubit: keep the |0> half, times sqrt2 per qubit
  CVector out(Eigen::Index{1} << m.n_tapered());
  std::vector<int> keep;
  std::vector<bool> gone(n, false);
  for (int q : m.removed) gone[q] = true;
  for (int q = 0; q < n; ++q)
    if (!gone[q]) keep.push_back(q);
  for (Eigen::Index t = 0; t < out.size(); ++t) {
    std::uint64_t full = 0;
    for (std::size_t b = 0; b < keep.size(); ++b)
      if (t >> b & 1) full |= 1ULL << keep[b];
    out[t] = v[static_cast<Eigen::Index>(full)] * std::pow(std::sqrt(2.0), static_cast<double>(m.removed.size()));
  }
  return out;
}

struct ThresholdReport {
  double drop = 0;
  std::size_t discarded_terms = 0;
  double discarded_l1 = 0;
};

struct ThresholdTaper {
  PauliSum tapered;
  TaperMap map;
  ThresholdReport report;
};

/// Drops terms below `drop` before searching for symmetries (approximate symmetries), then
/// tapers the retained operator.
inline ThresholdTaper taper_with_threshold(const PauliSum& h, double drop, std::uint64_t reference_bits) {
  require(drop >= 0, "drop threshold must be non-negative", "taper");
  PauliSum kept(h.n_qubits());
  ThresholdReport rep{drop, 0, 0};
  for (const auto& [p, c] : h.terms()) {
    if (std::abs(c) < drop) {
      ++rep.discarded_terms;
      rep.discarded_l1 += std::abs(c);
    } else {
      kept.add(p, c);
    }
  }
  require(!kept.empty(), "every term fell below the drop threshold (discarded l1 " + std::to_string(rep.discarded_l1) + ")",
          "taper");
  ThresholdTaper out;
  out.map = make_taper_map(kept, reference_bits);
  out.tapered = taper(kept, out.map);
  out.report = rep;
  return out;
}

inline nlohmann::json to_json(const TaperMap& m) {
  return {{"n_qubits", m.n_qubits}, {"generators", m.generators}, {"removed", m.removed}, {"sector", m.sector}};
}

inline TaperMap taper_map_from_json(const nlohmann::json& j) {
  TaperMap m;
  m.n_qubits = j.at("n_qubits").get<int>();
  m.generators = j.at("generators").get<std::vector<std::string>>();
  m.removed = j.at("removed").get<std::vector<int>>();
  m.sector = j.at("sector").get<std::vector<int>>();
  return m;
}

}  // namespace qacse
