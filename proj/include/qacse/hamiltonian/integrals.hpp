#pragma once

// Molecular integrals over spatial orbitals and the FCIDUMP reader.
//
// FCIDUMP grammar accepted here:
//   header  : everything from the first line up to a line containing "&END" or ending in "/";
//             must contain NORB=<int> and NELEC=<int>; MS2=<int> is optional.
//   records : "<value> i j k l", 1-based orbital indices, chemist notation (ij|kl).
//             i j k l all zero       -> scalar (core/nuclear) energy
//             i j > 0, k = l = 0     -> one-body h_ij
//             i > 0, j = k = l = 0   -> orbital energy, ignored
//             otherwise              -> two-body (ij|kl), expanded over the 8-fold symmetry.

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <istream>
#include <regex>
#include <set>
#include <sstream>
#include <vector>

#include "qacse/common.hpp"

namespace qacse {

struct IntegralSet {
  int n_orbitals = 0;
  int n_electrons = 0;
  int ms2 = 0;
  double core_energy = 0.0;
  RMatrix one_body;            // h_pq
  std::vector<double> two_body;  // physicist <pq|st>, index ((p*r+q)*r+s)*r+t

  IntegralSet() = default;
  IntegralSet(int r, int n_elec) : n_orbitals(r), n_electrons(n_elec), one_body(RMatrix::Zero(r, r)),
                                   two_body(static_cast<std::size_t>(r) * r * r * r, 0.0) {}

  std::size_t index(int p, int q, int s, int t) const {
    const std::size_t r = n_orbitals;
    return ((p * r + q) * r + s) * r + t;
  }
  double& v(int p, int q, int s, int t) { return two_body[index(p, q, s, t)]; }
  double v(int p, int q, int s, int t) const { return two_body[index(p, q, s, t)]; }

  /// Chemist-notation (pq|st) = <ps|qt>.
  double chem(int p, int q, int s, int t) const { return v(p, s, q, t); }

  /// Sets (pq|st) and all of its 8-fold permutation partners.
  void set_chem(int i, int j, int k, int l, double value) {
    const int perms[8][4] = {{i, j, k, l}, {j, i, k, l}, {i, j, l, k}, {j, i, l, k},
                             {k, l, i, j}, {l, k, i, j}, {k, l, j, i}, {l, k, j, i}};
    for (const auto& p : perms) v(p[0], p[2], p[1], p[3]) = value;
  }

  bool check_symmetry(double tol = 1e-12) const {
    const int r = n_orbitals;
    if ((one_body - one_body.transpose()).norm() > tol) return false;
    for (int p = 0; p < r; ++p)
      for (int q = 0; q < r; ++q)
        for (int s = 0; s < r; ++s)
          for (int t = 0; t < r; ++t) {
            const double x = chem(p, q, s, t);
            if (std::abs(x - chem(q, p, s, t)) > tol || std::abs(x - chem(s, t, p, q)) > tol ||
                std::abs(x - chem(p, q, t, s)) > tol)
              return false;
          }
    return true;
  }
};

inline IntegralSet parse_fcidump(std::istream& in) {
  const std::string stage = "parse_fcidump";
  std::string header, line;
  bool header_done = false;
  while (std::getline(in, line)) {
    header += line + "\n";
    std::string upper = line;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    const auto last = upper.find_last_not_of(" \t\r");
    if (upper.find("&END") != std::string::npos || (last != std::string::npos && upper[last] == '/')) {
      header_done = true;
      break;
    }
  }
  require(header_done, "malformed header: missing &END terminator", stage);

  auto field = [&](const std::string& key) -> std::optional<int> {
    std::smatch m;
    const std::regex re(key + R"(\s*=\s*(-?\d+))", std::regex::icase);
    if (std::regex_search(header, m, re)) return std::stoi(m[1]);
    return std::nullopt;
  };
  const auto norb = field("NORB");
  const auto nelec = field("NELEC");
  require(norb && nelec, "malformed header: NORB and NELEC required", stage);
  require(*norb > 0 && *nelec >= 0 && *nelec <= 2 * *norb, "malformed header: bad NORB/NELEC", stage);

  IntegralSet ints(*norb, *nelec);
  ints.ms2 = field("MS2").value_or(0);
  const int r = *norb;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string value_token;
    int i = 0, j = 0, k = 0, l = 0;
    ls >> value_token >> i >> j >> k >> l;
    require(!ls.fail(), "malformed record at line " + std::to_string(lineno) + ": " + line, stage);
    std::replace(value_token.begin(), value_token.end(), 'D', 'E');
    std::replace(value_token.begin(), value_token.end(), 'd', 'e');
    double value = 0;
    try {
      std::size_t used = 0;
      value = std::stod(value_token, &used);
      require(used == value_token.size(), "", stage);
    } catch (const std::exception&) {
      throw Error("non-numeric value at line " + std::to_string(lineno) + ": " + value_token, stage);
    }
    for (int idx : {i, j, k, l})
      require(idx >= 0 && idx <= r, "index out of range at line " + std::to_string(lineno), stage);
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      ints.core_energy = value;
    } else if (k == 0 && l == 0) {
      if (j == 0) continue;
      ints.one_body(i - 1, j - 1) = value;
      ints.one_body(j - 1, i - 1) = value;
    } else {
      require(i > 0 && j > 0 && k > 0 && l > 0, "index out of range at line " + std::to_string(lineno), stage);
      ints.set_chem(i - 1, j - 1, k - 1, l - 1, value);
    }
  }
  return ints;
}

inline IntegralSet parse_fcidump(const std::string& text) {
  std::istringstream is(text);
  return parse_fcidump(is);
}

inline IntegralSet read_fcidump(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot open " + path, "parse_fcidump");
  return parse_fcidump(f);
}

inline std::string write_fcidump(const IntegralSet& ints) {
  std::ostringstream os;
  os << std::setprecision(17);
  const int r = ints.n_orbitals;
  os << " &FCI NORB=" << r << ",NELEC=" << ints.n_electrons << ",MS2=" << ints.ms2 << ",\n &END\n";
  for (int i = 0; i < r; ++i)
    for (int j = 0; j <= i; ++j)
      for (int k = 0; k < r; ++k)
        for (int l = 0; l <= k; ++l) {
          if (i * r + j < k * r + l) continue;
          const double x = ints.chem(i, j, k, l);
          if (x != 0.0) os << x << " " << i + 1 << " " << j + 1 << " " << k + 1 << " " << l + 1 << "\n";
        }
  for (int i = 0; i < r; ++i)
    for (int j = 0; j <= i; ++j)
      if (ints.one_body(i, j) != 0.0) os << ints.one_body(i, j) << " " << i + 1 << " " << j + 1 << " 0 0\n";
  os << ints.core_energy << " 0 0 0 0\n";
  return os.str();
}

/// Folds doubly occupied core orbitals into effective active-space integrals:
///   h~_pq = h_pq + sum_i (2 <pi|qi> - <pi|iq>)
///   E_core = E_0 + sum_i 2 h_ii + sum_ij (2 <ij|ij> - <ij|ji>)
inline IntegralSet fold_active_space(const IntegralSet& full, const std::vector<int>& core,
                                     const std::vector<int>& active) {
  const std::string stage = "fold_active_space";
  std::set<int> seen;
  for (int p : core) {
    require(p >= 0 && p < full.n_orbitals, "core orbital out of range", stage);
    require(seen.insert(p).second, "duplicate or overlapping orbital " + std::to_string(p), stage);
  }
  for (int p : active) {
    require(p >= 0 && p < full.n_orbitals, "active orbital out of range", stage);
    require(seen.insert(p).second, "core and active overlap at orbital " + std::to_string(p), stage);
  }
  const int n_act_el = full.n_electrons - 2 * static_cast<int>(core.size());
  const int na = static_cast<int>(active.size());
  require(n_act_el >= 0 && n_act_el <= 2 * na, "active electron count inconsistent with total", stage);

  IntegralSet out(na, n_act_el);
  out.ms2 = full.ms2;
  double e_core = full.core_energy;
  for (int i : core) {
    e_core += 2.0 * full.one_body(i, i);
    for (int j : core) e_core += 2.0 * full.v(i, j, i, j) - full.v(i, j, j, i);
  }
  out.core_energy = e_core;
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < na; ++b) {
      const int p = active[a], q = active[b];
      double h = full.one_body(p, q);
      for (int i : core) h += 2.0 * full.v(p, i, q, i) - full.v(p, i, i, q);
      out.one_body(a, b) = h;
      for (int c = 0; c < na; ++c)
        for (int d = 0; d < na; ++d) out.v(a, b, c, d) = full.v(p, q, active[c], active[d]);
    }
  return out;
}

}  // namespace qacse
