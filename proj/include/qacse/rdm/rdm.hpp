#pragma once

// Reduced density matrices over n spin orbitals.
//
// Conventions (all indices spin orbitals):
//   1D(i,k)          = <a+_i a_k>
//   2D^{ij}_{kl}     = <a+_i a+_j a_l a_k>        stored at (i*n+j, k*n+l)
//   3D^{ijk}_{lmn}   = <a+_i a+_j a+_k a_n a_m a_l>
//   2Q^{ab}_{cd}     = <a_a a_b a+_d a+_c>        stored at (a*n+b, c*n+d)
//   2G^{ab}_{cd}     = <a+_a a_b a+_d a_c>        stored at (a*n+b, c*n+d)
// Traces: Tr 1D = N, Tr 2D = N(N-1).

#include <algorithm>
#include <nlohmann/json.hpp>

#include "qacse/fermion/fock.hpp"
#include "qacse/hamiltonian/reduced_hamiltonian.hpp"

namespace qacse {

struct OneRDM {
  CMatrix d1;
  int n() const { return static_cast<int>(d1.rows()); }
  Complex operator()(int i, int k) const { return d1(i, k); }
};

struct TwoRDM {
  int n_spin_orbitals = 0;
  CMatrix d2;

  TwoRDM() = default;
  explicit TwoRDM(int n) : n_spin_orbitals(n), d2(CMatrix::Zero(n * n, n * n)) {}
  TwoRDM(int n, CMatrix m) : n_spin_orbitals(n), d2(std::move(m)) {}

  int n() const { return n_spin_orbitals; }
  Complex operator()(int i, int j, int k, int l) const { return d2(i * n_spin_orbitals + j, k * n_spin_orbitals + l); }
  Complex& at(int i, int j, int k, int l) { return d2(i * n_spin_orbitals + j, k * n_spin_orbitals + l); }
  Complex trace() const { return d2.trace(); }

  TwoRDM operator+(const TwoRDM& o) const { return {n_spin_orbitals, d2 + o.d2}; }
  TwoRDM operator-(const TwoRDM& o) const { return {n_spin_orbitals, d2 - o.d2}; }
  double frobenius() const { return d2.norm(); }
};

class ThreeRDM {
 public:
  explicit ThreeRDM(int n) : n_(n), data_(static_cast<std::size_t>(std::pow(n, 6)), Complex{}) {}
  int n() const { return n_; }
  Complex& at(int i, int j, int k, int l, int m, int p) { return data_[index(i, j, k, l, m, p)]; }
  Complex operator()(int i, int j, int k, int l, int m, int p) const { return data_[index(i, j, k, l, m, p)]; }
  const std::vector<Complex>& data() const { return data_; }
  std::vector<Complex>& data() { return data_; }

  double frobenius() const {
    double s = 0;
    for (const auto& x : data_) s += std::norm(x);
    return std::sqrt(s);
  }
  double distance(const ThreeRDM& o) const {
    double s = 0;
    for (std::size_t t = 0; t < data_.size(); ++t) s += std::norm(data_[t] - o.data_[t]);
    return std::sqrt(s);
  }

 private:
  std::size_t index(int i, int j, int k, int l, int m, int p) const {
    const std::size_t n = n_;
    return ((((i * n + j) * n + k) * n + l) * n + m) * n + p;
  }
  int n_;
  std::vector<Complex> data_;
};

/// Projects onto the Hermitian, pair-antisymmetric subspace.
inline TwoRDM symmetrize(const TwoRDM& d) {
  const CMatrix herm = 0.5 * (d.d2 + d.d2.adjoint());
  return {d.n(), antisymmetrize_pairs(herm, d.n())};
}

inline TwoRDM exact_2rdm(const CVector& psi, int n) {
  std::vector<CVector> phi(static_cast<std::size_t>(n * n));
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) phi[k * n + l] = apply_ladder({{l, false}, {k, false}}, psi);
  TwoRDM d(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          const Complex v = phi[i * n + j].dot(phi[k * n + l]);
          d.at(i, j, k, l) = v;
          d.at(j, i, k, l) = -v;
          d.at(i, j, l, k) = -v;
          d.at(j, i, l, k) = v;
        }
  return d;
}

inline OneRDM exact_1rdm(const CVector& psi, int n) {
  std::vector<CVector> phi(n);
  for (int k = 0; k < n; ++k) phi[k] = apply_ladder({{k, false}}, psi);
  OneRDM d{CMatrix(n, n)};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) d.d1(i, k) = phi[i].dot(phi[k]);
  return d;
}

inline ThreeRDM exact_3rdm(const CVector& psi, int n) {
  // phi_{lmn} = a_n a_m a_l psi, 3D^{ijk}_{lmn} = <phi_{ijk} | phi_{lmn}>
  std::vector<std::array<int, 3>> triples;
  std::vector<CVector> phi;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        triples.push_back({a, b, c});
        phi.push_back(apply_ladder({{c, false}, {b, false}, {a, false}}, psi));
      }
  ThreeRDM d(n);
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  static constexpr double sgn[6] = {1, -1, -1, 1, 1, -1};
  for (std::size_t u = 0; u < triples.size(); ++u)
    for (std::size_t w = 0; w < triples.size(); ++w) {
      const Complex v = phi[u].dot(phi[w]);
      if (v == Complex{}) continue;
      const auto& up = triples[u];
      const auto& lo = triples[w];
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
          d.at(up[perms[a][0]], up[perms[a][1]], up[perms[a][2]], lo[perms[b][0]], lo[perms[b][1]],
               lo[perms[b][2]]) = sgn[a] * sgn[b] * v;
    }
  return d;
}

/// 1D(i,k) = sum_j 2D^{ij}_{kj} / (N - 1).
inline OneRDM contract_to_1rdm(const TwoRDM& d2, int n_electrons) {
  require(n_electrons >= 2, "contract_to_1rdm needs N >= 2");
  const int n = d2.n();
  OneRDM d{CMatrix::Zero(n, n)};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      Complex s = 0;
      for (int j = 0; j < n; ++j) s += d2(i, j, k, j);
      d.d1(i, k) = s / static_cast<double>(n_electrons - 1);
    }
  return d;
}

/// 2Q^{ab}_{cd} = d_ac d_bd - d_ad d_bc - d_bd 1D(c,a) + d_bc 1D(d,a) + d_ad 1D(c,b) - d_ac 1D(d,b) + 2D^{cd}_{ab}
inline CMatrix d_to_q(const TwoRDM& d2, const OneRDM& d1) {
  const int n = d2.n();
  require(d1.n() == n, "d_to_q: dimension mismatch");
  CMatrix q(n * n, n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Complex v = d2(c, d, a, b);
          if (a == c && b == d) v += 1.0;
          if (a == d && b == c) v -= 1.0;
          if (b == d) v -= d1(c, a);
          if (b == c) v += d1(d, a);
          if (a == d) v += d1(c, b);
          if (a == c) v -= d1(d, b);
          q(a * n + b, c * n + d) = v;
        }
  return q;
}

/// 2G^{ab}_{cd} = d_bd 1D(a,c) - 2D^{ad}_{cb}
inline CMatrix d_to_g(const TwoRDM& d2, const OneRDM& d1) {
  const int n = d2.n();
  require(d1.n() == n, "d_to_g: dimension mismatch");
  CMatrix g(n * n, n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Complex v = -d2(a, d, c, b);
          if (b == d) v += d1(a, c);
          g(a * n + b, c * n + d) = v;
        }
  return g;
}

/// 2D^{ij}_{kl} of a single determinant built from a 1-RDM: 1D(i,k)1D(j,l) - 1D(i,l)1D(j,k).
inline TwoRDM wedge_1d_1d(const OneRDM& d1) {
  const int n = d1.n();
  TwoRDM out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out.at(i, j, k, l) = d1(i, k) * d1(j, l) - d1(i, l) * d1(j, k);
  return out;
}

/// Cumulant reconstruction of the 3-RDM with the connected 3-body cumulant set to zero:
///   3D^{ijk}_{lmn} = det[1D(u, v)]_{u in ijk, v in lmn}
///                  + sum_{a in ijk, b in lmn} (-1)^{pos(a)+pos(b)} 2Delta^{ijk\a}_{lmn\b} 1D(a, b)
/// where 2Delta = 2D - 1D^1D and the remaining index pairs keep their order.
/// For a determinant 2Delta = 0 and the expansion reduces to the Wick determinant.
/// Fewer than three electrons have no 3-RDM, so the result is zero there; N defaults
/// to the rounded trace of the 1-RDM.
inline ThreeRDM reconstruct_3rdm(const OneRDM& d1, const TwoRDM& d2, std::optional<int> n_electrons = {}) {
  const int n = d2.n();
  require(d1.n() == n, "reconstruct_3rdm: dimension mismatch");
  ThreeRDM out(n);
  if (n_electrons.value_or(static_cast<int>(std::lround(d1.d1.trace().real()))) < 3) return out;
  const TwoRDM delta = d2 - wedge_1d_1d(d1);
  static constexpr int rest[3][2] = {{1, 2}, {0, 2}, {0, 1}};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        const int up[3] = {i, j, k};
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m)
            for (int p = 0; p < n; ++p) {
              if (l == m || m == p || l == p) continue;
              const int lo[3] = {l, m, p};
              auto g = [&](int a, int b) { return d1(up[a], lo[b]); };
              Complex v = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) -
                          g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0)) +
                          g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
              for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                  const double sign = (a + b) % 2 ? -1.0 : 1.0;
                  v += sign * delta(up[rest[a][0]], up[rest[a][1]], lo[rest[b][0]], lo[rest[b][1]]) * g(a, b);
                }
              out.at(i, j, k, l, m, p) = v;
            }
      }
  return out;
}

/// Eigenvalues of the spin-orbital 1-RDM, descending.
inline std::vector<double> natural_occupations(const OneRDM& d1, double herm_tol = 1e-8) {
  require((d1.d1 - d1.d1.adjoint()).cwiseAbs().maxCoeff() <= herm_tol, "natural_occupations: non-Hermitian 1-RDM");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d1.d1 + d1.d1.adjoint()), Eigen::EigenvaluesOnly);
  std::vector<double> occ(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(occ.rbegin(), occ.rend());
  return occ;
}

/// Eigenvalues of the spin-summed spatial 1-RDM (alpha + beta blocks), descending; range [0, 2].
inline std::vector<double> spatial_natural_occupations(const OneRDM& d1, double herm_tol = 1e-8) {
  const int r = d1.n() / 2;
  OneRDM s{d1.d1.topLeftCorner(r, r) + d1.d1.bottomRightCorner(r, r)};
  return natural_occupations(s, herm_tol);
}

/// E = sum K^{pq}_{st} 2D^{pq}_{st} + constant.
inline double energy_from_2rdm(const ReducedHamiltonian& ham, const TwoRDM& d2) {
  require(ham.n() == d2.n(), "energy_from_2rdm: dimension mismatch");
  return ham.k2.cwiseProduct(d2.d2).sum().real() + ham.constant;
}

/// Determinant 2-RDM for the basis state `bits`.
inline TwoRDM determinant_2rdm(int n, std::uint64_t bits) {
  TwoRDM d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && (bits >> i & 1) && (bits >> j & 1)) {
        d.at(i, j, i, j) = 1.0;
        d.at(i, j, j, i) = -1.0;
      }
  return d;
}

/// Element order: row-major over (i, j, k, l), each entry [re, im].
inline nlohmann::json to_json(const TwoRDM& d) {
  nlohmann::json j;
  j["n_spin_orbitals"] = d.n();
  j["layout"] = "row-major i,j,k,l; element = <a+_i a+_j a_l a_k>";
  auto& arr = j["elements"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < d.d2.rows(); ++r)
    for (Eigen::Index c = 0; c < d.d2.cols(); ++c) arr.push_back({d.d2(r, c).real(), d.d2(r, c).imag()});
  return j;
}

inline TwoRDM two_rdm_from_json(const nlohmann::json& j) {
  const int n = j.at("n_spin_orbitals");
  TwoRDM d(n);
  const auto& arr = j.at("elements");
  require(arr.size() == static_cast<std::size_t>(n * n * n * n), "2-RDM JSON: wrong element count");
  std::size_t t = 0;
  for (Eigen::Index r = 0; r < d.d2.rows(); ++r)
    for (Eigen::Index c = 0; c < d.d2.cols(); ++c, ++t) d.d2(r, c) = {arr[t][0].get<double>(), arr[t][1].get<double>()};
  return d;
}

}  // namespace qacse
