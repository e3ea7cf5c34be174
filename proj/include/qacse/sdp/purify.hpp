#pragma once

// DQG purification: the nearest (Frobenius) 2-RDM whose D, Q and G matrices are positive
// semidefinite, at fixed trace N(N-1).
//
// The variable is the Hermitian pair-basis matrix X(P, Q) = 2D^{ij}_{kl}, P = (i<j), Q = (k<l).
// The full n^2 x n^2 tensor repeats each pair entry four times (with signs), so full-tensor
// distances are twice the pair-basis ones and both objectives share a minimizer.

#include <nlohmann/json.hpp>

#include "qacse/rdm/rdm.hpp"
#include "qacse/sdp/boundary_point.hpp"

namespace qacse {

struct PurifyOptions {
  SdpTolerances tolerances;
  bool spin_blocks = false;  // zero couplings between pairs of different Sz
  double hermiticity_tolerance = 1e-8;
  double trace_tolerance = 1e-6;
};

struct PurificationResult {
  TwoRDM d2_purified;
  double frobenius_distance = 0;
  std::array<double, 3> min_eigenvalues{};  // D, Q, G
  int iterations = 0;
  bool converged = false;
};

struct DqgCheck {
  std::array<double, 3> min_eigenvalues{};
  bool trace_ok = false;
  bool feasible = false;
};

inline constexpr double kDqgTolerance = 1e-8;

inline DqgCheck check_dqg(const TwoRDM& d2, int n_electrons, double tol = kDqgTolerance) {
  DqgCheck out;
  const int n = d2.n();
  require(d2.d2.rows() == n * n && d2.d2.cols() == n * n, "2-RDM shape mismatch", "check_dqg");
  const OneRDM d1 = contract_to_1rdm(d2, n_electrons);
  auto lam = [](const CMatrix& m) {
    const CMatrix h = (m + m.adjoint()) / 2.0;
    return Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues()[0];
  };
  // Q and G are evaluated on the antisymmetric pair space for D and Q; the symmetric
  // complement of the full tensor is identically zero and carries no information.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  auto pair_block = [&](const CMatrix& full) {
    CMatrix b(pairs.size(), pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p)
      for (std::size_t q = 0; q < pairs.size(); ++q)
        b(p, q) = full(pairs[p].first * n + pairs[p].second, pairs[q].first * n + pairs[q].second);
    return b;
  };
  out.min_eigenvalues = {lam(pair_block(d2.d2)), lam(pair_block(d_to_q(d2, d1))), lam(d_to_g(d2, d1))};
  const double expected = static_cast<double>(n_electrons) * (n_electrons - 1);
  out.trace_ok = std::abs(d2.trace() - expected) <= 1e-6;
  out.feasible = out.trace_ok && std::all_of(out.min_eigenvalues.begin(), out.min_eigenvalues.end(),
                                             [tol](double l) { return l >= -tol; });
  return out;
}

namespace detail {

struct DqgMaps {
  int n = 0;
  std::vector<std::pair<int, int>> pairs;
  HermitianParam vars;  // pair-basis coordinates that are free
  HermitianParam pair_full;
  HermitianParam g_full;

  TwoRDM to_2rdm(const RVector& x) const {
    const CMatrix xp = vars.to_matrix(x);
    TwoRDM d(n);
    for (std::size_t p = 0; p < pairs.size(); ++p)
      for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto [i, j] = pairs[p];
        const auto [k, l] = pairs[q];
        const Complex v = xp(p, q);
        d.at(i, j, k, l) = v;
        d.at(j, i, k, l) = -v;
        d.at(i, j, l, k) = -v;
        d.at(j, i, l, k) = v;
      }
    return d;
  }
  CMatrix pair_block(const CMatrix& full) const {
    CMatrix b(pairs.size(), pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p)
      for (std::size_t q = 0; q < pairs.size(); ++q)
        b(p, q) = full(pairs[p].first * n + pairs[p].second, pairs[q].first * n + pairs[q].second);
    return b;
  }
};

inline DqgMaps make_dqg_maps(int n, bool spin_blocks) {
  DqgMaps m;
  m.n = n;
  const int r = n / 2;
  std::vector<int> sz;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m.pairs.emplace_back(i, j);
      sz.push_back((i < r ? 1 : -1) + (j < r ? 1 : -1));
    }
  const int dim = static_cast<int>(m.pairs.size());
  m.vars = spin_blocks ? HermitianParam(dim, [&](int p, int q) { return sz[p] == sz[q]; }) : HermitianParam(dim);
  m.pair_full = HermitianParam(dim);
  m.g_full = HermitianParam(n * n);
  return m;
}

/// Linear parts and constants of the D, Q, G maps, built by evaluating each on the unit
/// coordinate vectors.
inline std::vector<ConeBlock> dqg_cones(const DqgMaps& m, int n_electrons) {
  const int nv = m.vars.size();
  auto evaluate = [&](const RVector& x) {
    const TwoRDM d = m.to_2rdm(x);
    const OneRDM d1{[&] {
      CMatrix c = CMatrix::Zero(m.n, m.n);
      for (int i = 0; i < m.n; ++i)
        for (int k = 0; k < m.n; ++k)
          for (int j = 0; j < m.n; ++j) c(i, k) += d(i, j, k, j);
      return CMatrix(c / static_cast<double>(n_electrons - 1));
    }()};
    return std::array<RVector, 3>{m.pair_full.to_vector(m.pair_block(d.d2)),
                                  m.pair_full.to_vector(m.pair_block(d_to_q(d, d1))), m.g_full.to_vector(d_to_g(d, d1))};
  };
  const auto base = evaluate(RVector::Zero(nv));
  std::array<std::vector<Eigen::Triplet<double>>, 3> trip;
  for (int t = 0; t < nv; ++t) {
    const auto col = evaluate(RVector::Unit(nv, t));
    for (int b = 0; b < 3; ++b)
      for (Eigen::Index row = 0; row < col[b].size(); ++row) {
        const double v = col[b][row] - base[b][row];
        if (std::abs(v) > 1e-15) trip[b].emplace_back(static_cast<int>(row), t, v);
      }
  }
  std::vector<ConeBlock> cones;
  const char* names[3] = {"D", "Q", "G"};
  for (int b = 0; b < 3; ++b) {
    ConeBlock k;
    k.name = names[b];
    k.param = b == 2 ? m.g_full : m.pair_full;
    k.a = SparseRMatrix(k.param.size(), nv);
    k.a.setFromTriplets(trip[b].begin(), trip[b].end());
    k.b = base[b];
    cones.push_back(std::move(k));
  }
  return cones;
}

/// Largest step t in [0,1] toward `interior` that makes every cone block PSD; the blocks are
/// affine in x so feasibility along the segment is monotone.
inline RVector restore_feasibility(const SdpProblem& p, const RVector& x, const RVector& interior, double tol) {
  auto ok = [&](const RVector& y) {
    for (double l : cone_min_eigenvalues(p, y))
      if (l < -tol * 0.01) return false;
    return true;
  };
  if (ok(x)) return x;
  double lo = 0, hi = 1;
  for (int it = 0; it < 60; ++it) {
    const double mid = (lo + hi) / 2;
    (ok((1 - mid) * x + mid * interior) ? hi : lo) = mid;
  }
  return (1 - hi) * x + hi * interior;
}

}  // namespace detail

/// Minimizes w/2 |X - X0|^2 + <C, X> over the DQG set at fixed trace. With w = 0 and C the
/// reduced Hamiltonian this is the variational DQG lower bound.
struct DqgProblem {
  detail::DqgMaps maps;
  SdpProblem sdp;
  RVector interior;
};

inline DqgProblem make_dqg_problem(int n, int n_electrons, bool spin_blocks) {
  require(n >= 4 && n % 2 == 0, "need an even number of at least 4 spin orbitals", "purify_dqg");
  require(n <= 12, "purification capped at 12 spin orbitals", "purify_dqg");
  require(n_electrons >= 2 && n_electrons <= n - 2, "need 2 <= N <= n-2", "purify_dqg");
  DqgProblem d;
  d.maps = detail::make_dqg_maps(n, spin_blocks);
  d.sdp.n_vars = d.maps.vars.size();
  d.sdp.cones = detail::dqg_cones(d.maps, n_electrons);
  const int dim = static_cast<int>(d.maps.pairs.size());
  const double pair_trace = n_electrons * (n_electrons - 1) / 2.0;
  d.sdp.eq = d.maps.vars.to_vector(CMatrix::Identity(dim, dim)).transpose();
  d.sdp.eq_rhs = RVector::Constant(1, pair_trace);
  // Uniform ensemble over all N-electron determinants: strictly inside D, Q and G.
  d.interior = d.maps.vars.to_vector(CMatrix::Identity(dim, dim) * (pair_trace / dim));
  return d;
}

inline RVector pair_coordinates(const detail::DqgMaps& m, const TwoRDM& d2) {
  return m.vars.to_vector(m.pair_block(d2.d2));
}

inline PurificationResult purify_dqg(const TwoRDM& d2, int n_electrons, const PurifyOptions& opt = {}) {
  const std::string stage = "purify_dqg";
  const int n = d2.n();
  require(d2.d2.rows() == n * n && d2.d2.cols() == n * n, "2-RDM shape mismatch", stage);
  require((d2.d2 - d2.d2.adjoint()).norm() <= opt.hermiticity_tolerance * std::max(1.0, d2.d2.norm()),
          "input 2-RDM is not Hermitian", stage);
  const double expected = static_cast<double>(n_electrons) * (n_electrons - 1);
  require(std::abs(d2.trace() - expected) <= opt.trace_tolerance, "input trace differs from N(N-1)", stage);

  DqgProblem prob = make_dqg_problem(n, n_electrons, opt.spin_blocks);
  prob.sdp.x0 = pair_coordinates(prob.maps, symmetrize(d2));
  prob.sdp.weight = 1.0;
  const SdpSolution sol = solve_boundary_point(prob.sdp, opt.tolerances);
  const RVector x = detail::restore_feasibility(prob.sdp, sol.x, prob.interior, opt.tolerances.eigenvalue);

  PurificationResult out;
  out.d2_purified = prob.maps.to_2rdm(x);
  out.frobenius_distance = (out.d2_purified.d2 - d2.d2).norm();
  const auto eigs = cone_min_eigenvalues(prob.sdp, x);
  out.min_eigenvalues = {eigs[0], eigs[1], eigs[2]};
  out.iterations = sol.iterations;
  out.converged = sol.converged;
  return out;
}

/// min <K, 2D> + const over the DQG set; a lower bound to the ground-state energy.
inline double dqg_lower_bound(const ReducedHamiltonian& ham, int n_electrons, const SdpTolerances& tol = {}) {
  const int n = ham.n_spin_orbitals;
  DqgProblem prob = make_dqg_problem(n, n_electrons, false);
  // sum_{ijkl} K(ij,kl) D(ij,kl) = 4 sum_{P,Q} K(P,Q) X(P,Q) for antisymmetric K; as the
  // coordinates are an isometry, <K, D> = 4 k.x.
  const CMatrix kp = prob.maps.pair_block(ham.k2);
  const CMatrix kh = (kp + kp.adjoint()) / 2.0;
  prob.sdp.c = 4.0 * prob.maps.vars.to_vector(kh.conjugate());
  prob.sdp.x0 = prob.interior;
  prob.sdp.weight = 0.0;
  SdpTolerances t = tol;
  t.rho = std::max(1.0, kh.norm());
  const SdpSolution sol = solve_boundary_point(prob.sdp, t);
  return energy_from_2rdm(ham, prob.maps.to_2rdm(sol.x));
}

inline nlohmann::json to_json(const PurificationResult& r, bool include_rdm = false) {
  nlohmann::json j = {{"frobenius_distance", r.frobenius_distance},
                      {"min_eigenvalues", {{"D", r.min_eigenvalues[0]}, {"Q", r.min_eigenvalues[1]}, {"G", r.min_eigenvalues[2]}}},
                      {"iterations", r.iterations},
                      {"converged", r.converged}};
  if (include_rdm) j["d2_purified"] = to_json(r.d2_purified);
  return j;
}

}  // namespace qacse
