#pragma once

// Boundary-point (ADMM / augmented Lagrangian) solver for
//
//   minimize   w/2 |x - x0|^2 + c.x
//   subject to E x = f,   A_k x + b_k in PSD(dim_k) for every cone block k
//
// over a real vector x. Each cone block's matrix is Hermitian and is stored through
// HermitianParam, an isometry between Hermitian matrices (Frobenius) and real vectors.
// Every iteration does one prefactored linear solve, one eigendecomposition per block and a
// dual update.

#include <Eigen/Sparse>
#include <Eigen/SparseCore>
#include <functional>

#include "qacse/common.hpp"

namespace qacse {

using SparseRMatrix = Eigen::SparseMatrix<double>;

/// Real coordinates of a d x d Hermitian matrix: diagonal entries, then sqrt2*Re and sqrt2*Im of
/// each upper off-diagonal entry. <A, B>_F = a.b.
struct HermitianParam {
  int dim = 0;
  std::vector<std::array<int, 3>> coords;  // (row, col, kind): kind 0 diag, 1 real, 2 imag

  explicit HermitianParam(int d = 0, const std::function<bool(int, int)>& keep = {}) : dim(d) {
    for (int i = 0; i < d; ++i)
      if (!keep || keep(i, i)) coords.push_back({i, i, 0});
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        if (!keep || keep(i, j)) {
          coords.push_back({i, j, 1});
          coords.push_back({i, j, 2});
        }
  }
  int size() const { return static_cast<int>(coords.size()); }

  RVector to_vector(const CMatrix& m) const {
    RVector v(size());
    for (int t = 0; t < size(); ++t) {
      const auto [i, j, kind] = coords[t];
      v[t] = kind == 0 ? m(i, i).real() : kind == 1 ? std::sqrt(2.0) * m(i, j).real() : std::sqrt(2.0) * m(i, j).imag();
    }
    return v;
  }
  CMatrix to_matrix(const RVector& v) const {
    CMatrix m = CMatrix::Zero(dim, dim);
    const double r = 1 / std::sqrt(2.0);
    for (int t = 0; t < size(); ++t) {
      const auto [i, j, kind] = coords[t];
      if (kind == 0) m(i, i) = v[t];
      if (kind == 1) {
        m(i, j) += r * v[t];
        m(j, i) += r * v[t];
      }
      if (kind == 2) {
        m(i, j) += Complex(0, r * v[t]);
        m(j, i) -= Complex(0, r * v[t]);
      }
    }
    return m;
  }
};

struct ConeBlock {
  std::string name;
  HermitianParam param;  // full parametrization of the block matrix
  SparseRMatrix a;       // param.size() x n_vars
  RVector b;
};

struct SdpProblem {
  int n_vars = 0;
  RVector x0;
  double weight = 1.0;
  RVector c;   // linear objective, zero if empty
  RMatrix eq;  // rows of E
  RVector eq_rhs;
  std::vector<ConeBlock> cones;
};

struct SdpTolerances {
  double infeasibility = 1e-7;
  double eigenvalue = 1e-8;
  int max_iterations = 10000;
  double rho = 1.0;
};

struct SdpSolution {
  RVector x;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0;
  double dual_residual = 0;
  std::vector<double> min_eigenvalues;  // per cone block at x
};

struct EigenProjection {
  RVector projected;
  double min_eigenvalue;
};

inline EigenProjection project_psd(const HermitianParam& p, const RVector& v) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(p.to_matrix(v));
  const RVector clamped = es.eigenvalues().cwiseMax(0.0);
  const CMatrix m = es.eigenvectors() * clamped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return {p.to_vector(m), es.eigenvalues()[0]};
}

inline double min_eigenvalue(const HermitianParam& p, const RVector& v) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(p.to_matrix(v), Eigen::EigenvaluesOnly).eigenvalues()[0];
}

inline std::vector<double> cone_min_eigenvalues(const SdpProblem& p, const RVector& x) {
  std::vector<double> out;
  for (const auto& k : p.cones) out.push_back(min_eigenvalue(k.param, k.a * x + k.b));
  return out;
}

inline SdpSolution solve_boundary_point(const SdpProblem& p, const SdpTolerances& tol = {}) {
  const std::string stage = "solve_boundary_point";
  const int m = p.n_vars;
  require(p.x0.size() == m, "x0 size mismatch", stage);
  for (const auto& k : p.cones) require(k.a.cols() == m && k.a.rows() == k.param.size(), "cone map shape", stage);
  const RVector c = p.c.size() ? p.c : RVector::Zero(m);
  const double rho = tol.rho;

  RMatrix normal = p.weight * RMatrix::Identity(m, m);
  for (const auto& k : p.cones) normal += rho * RMatrix(k.a.transpose() * k.a);
  Eigen::LDLT<RMatrix> fact(normal);
  require(fact.info() == Eigen::Success, "singular normal matrix", stage);
  const int n_eq = static_cast<int>(p.eq.rows());
  // KKT for E x = f:  x = N^{-1}(r - E^T l),  (E N^{-1} E^T) l = E N^{-1} r - f
  RMatrix ninv_et;
  Eigen::LDLT<RMatrix> schur;
  if (n_eq) {
    ninv_et = fact.solve(p.eq.transpose());
    schur.compute(p.eq * ninv_et);
  }
  auto solve_x = [&](const RVector& rhs) -> RVector {
    RVector x = fact.solve(rhs);
    if (n_eq) x -= ninv_et * schur.solve(p.eq * x - p.eq_rhs);
    return x;
  };

  std::vector<RVector> z, u;
  for (const auto& k : p.cones) {
    z.push_back(project_psd(k.param, k.a * p.x0 + k.b).projected);
    u.push_back(RVector::Zero(k.param.size()));
  }
  SdpSolution sol;
  RVector x = p.x0;
  for (int it = 1; it <= tol.max_iterations; ++it) {
    RVector rhs = p.weight * p.x0 - c;
    for (std::size_t k = 0; k < p.cones.size(); ++k) rhs += rho * (p.cones[k].a.transpose() * (z[k] - p.cones[k].b - u[k]));
    x = solve_x(rhs);
    double primal = 0;
    RVector dual = RVector::Zero(m);
    std::vector<double> eigs;
    for (std::size_t k = 0; k < p.cones.size(); ++k) {
      const RVector ax = p.cones[k].a * x + p.cones[k].b;
      auto proj = project_psd(p.cones[k].param, ax + u[k]);
      dual += p.cones[k].a.transpose() * (proj.projected - z[k]);
      z[k] = std::move(proj.projected);
      u[k] += ax - z[k];
      primal += (ax - z[k]).squaredNorm();
    }
    sol.iterations = it;
    sol.primal_residual = std::sqrt(primal);
    sol.dual_residual = rho * dual.norm();
    if (sol.primal_residual < tol.infeasibility && sol.dual_residual < tol.infeasibility) {
      sol.converged = true;
      break;
    }
  }
  sol.x = x;
  sol.min_eigenvalues = cone_min_eigenvalues(p, x);
  return sol;
}

}  // namespace qacse
