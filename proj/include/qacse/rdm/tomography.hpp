#pragma once

// 2-RDM tomography from Pauli-string expectation values.
//
// Every independent element D^{ij}_{kl} (i<j, k<l, (ij) <= (kl)) is the expectation of the JW
// image of a+_i a+_j a_l a_k. The strings are grouped into qubit-wise compatible measurement
// settings; setting 0 is always all-Z and carries every Z/I-only string, which is the one
// that commutes with N and Sz.

#include <set>

#include "qacse/backend/statevector.hpp"
#include "qacse/rdm/rdm.hpp"

namespace qacse {

/// Probability (or quasi-probability) per basis index of one setting's outcomes.
using Distribution = std::vector<double>;

inline Distribution to_distribution(const ShotTable& t, int n_qubits) {
  require(t.shots > 0, "empty shot table");
  Distribution p(std::size_t{1} << n_qubits, 0.0);
  for (const auto& [bits, c] : t.counts) p[parse_bitstring(bits)] += static_cast<double>(c) / t.shots;
  return p;
}

/// Expectation of a Pauli string measured in a compatible setting.
inline double string_expectation(const std::string& p, const Distribution& dist) {
  std::uint64_t mask = 0;
  for (std::size_t q = 0; q < p.size(); ++q)
    if (p[q] != 'I') mask |= 1ULL << q;
  double s = 0;
  for (std::size_t k = 0; k < dist.size(); ++k) s += popcount(k & mask) % 2 ? -dist[k] : dist[k];
  return s;
}

struct TomographyPlan {
  int n_modes = 0;   // spin orbitals
  int n_qubits = 0;  // register width (smaller when tapered)
  std::vector<std::array<int, 4>> elements;
  std::vector<PauliSum> element_ops;
  std::vector<std::string> settings;
  std::map<std::string, int> setting_of;  // string -> index into settings

  std::size_t n_strings() const { return setting_of.size(); }
};

namespace detail {

inline bool z_only(const std::string& s) { return s.find_first_of("XY") == std::string::npos; }

inline bool fits(const std::string& setting, const std::string& p) {
  for (std::size_t q = 0; q < p.size(); ++q)
    if (p[q] != 'I' && setting[q] != 'I' && setting[q] != p[q]) return false;
  return true;
}

}  // namespace detail

/// Builds the plan over n_modes spin orbitals. `transform` maps each full-register JW image to
/// the measured register (identity when empty).
inline TomographyPlan make_tomography_plan(int n_modes, const PauliTransform& transform = {}) {
  TomographyPlan plan;
  plan.n_modes = n_modes;
  plan.n_qubits = n_modes;
  std::set<std::string> strings;
  for (int i = 0; i < n_modes; ++i)
    for (int j = i + 1; j < n_modes; ++j)
      for (int k = 0; k < n_modes; ++k)
        for (int l = k + 1; l < n_modes; ++l) {
          if (i * n_modes + j > k * n_modes + l) continue;
          PauliSum img = jordan_wigner(FermionSum::two_body(i, j, k, l), n_modes);
          if (transform) img = transform(img);
          plan.n_qubits = img.n_qubits();
          for (const auto& [p, c] : img.terms())
            if (p.find_first_not_of('I') != std::string::npos) strings.insert(p);
          plan.elements.push_back({i, j, k, l});
          plan.element_ops.push_back(std::move(img));
        }
  const int nq = plan.n_qubits;
  plan.settings.push_back(std::string(nq, 'Z'));
  std::vector<std::string> rest;
  for (const auto& s : strings) {
    if (detail::z_only(s))
      plan.setting_of[s] = 0;
    else
      rest.push_back(s);
  }
  // Heaviest strings first; ties broken lexicographically for determinism.
  std::stable_sort(rest.begin(), rest.end(),
                   [](const std::string& a, const std::string& b) { return pauli_weight(a) > pauli_weight(b); });
  std::vector<std::string> open;  // partially specified settings (I = free)
  std::vector<std::vector<std::string>> members;
  for (const auto& s : rest) {
    std::size_t g = 0;
    while (g < open.size() && !detail::fits(open[g], s)) ++g;
    if (g == open.size()) {
      open.push_back(std::string(nq, 'I'));
      members.emplace_back();
    }
    for (int q = 0; q < nq; ++q)
      if (s[q] != 'I') open[g][q] = s[q];
    members[g].push_back(s);
  }
  for (std::size_t g = 0; g < open.size(); ++g) {
    std::string setting = open[g];
    std::replace(setting.begin(), setting.end(), 'I', 'Z');
    plan.settings.push_back(setting);
    for (const auto& s : members[g]) plan.setting_of[s] = static_cast<int>(plan.settings.size() - 1);
  }
  return plan;
}

/// Builds the Hermitian, antisymmetric 2-RDM from string expectation values.
inline TwoRDM assemble_2rdm(const TomographyPlan& plan, const std::function<double(const std::string&)>& value) {
  const int n = plan.n_modes;
  TwoRDM d(n);
  for (std::size_t e = 0; e < plan.elements.size(); ++e) {
    const auto [i, j, k, l] = plan.elements[e];
    Complex v = 0;
    for (const auto& [p, c] : plan.element_ops[e].terms())
      v += c * (p.find_first_not_of('I') == std::string::npos ? 1.0 : value(p));
    d.at(i, j, k, l) = v;
    d.at(j, i, k, l) = -v;
    d.at(i, j, l, k) = -v;
    d.at(j, i, l, k) = v;
    d.at(k, l, i, j) = std::conj(v);
    d.at(l, k, i, j) = -std::conj(v);
    d.at(k, l, j, i) = -std::conj(v);
    d.at(l, k, j, i) = std::conj(v);
  }
  return d;
}

/// Exact mode: expectations taken directly from the (possibly tapered) statevector.
inline TwoRDM tomograph_2rdm(const TomographyPlan& plan, const StateVector& psi) {
  require(psi.size() == (Eigen::Index{1} << plan.n_qubits), "state does not match plan register", "tomography");
  return assemble_2rdm(plan, [&](const std::string& p) { return pauli_expectation(p, psi); });
}

/// Shot mode: one distribution per setting.
inline TwoRDM tomograph_2rdm(const TomographyPlan& plan, const std::map<std::string, Distribution>& data) {
  for (const auto& s : plan.settings)
    require(data.count(s) == 1, "missing measurement setting " + s, "tomography");
  std::map<std::string, double> cache;
  return assemble_2rdm(plan, [&](const std::string& p) {
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    auto where = plan.setting_of.find(p);
    require(where != plan.setting_of.end(), "no setting covers string " + p, "tomography");
    const double v = string_expectation(p, data.at(plan.settings[where->second]));
    cache.emplace(p, v);
    return v;
  });
}

}  // namespace qacse
