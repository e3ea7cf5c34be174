#pragma once

// Readout (SPAM) inversion and N/Sz post-selection of computational-basis distributions.

#include <optional>
#include <unsupported/Eigen/KroneckerProduct>

#include "qacse/rdm/tomography.hpp"

namespace qacse {

/// Readout transition matrix M[measured][true]; a tensor of per-qubit 2x2 blocks by default,
/// or a full 2^n x 2^n matrix for small registers.
struct ConfusionMatrix {
  std::vector<Confusion2> local;
  std::optional<RMatrix> full;

  static constexpr int kFullQubitCap = 5;

  int n_qubits() const {
    if (full) return static_cast<int>(std::log2(static_cast<double>(full->rows())));
    return static_cast<int>(local.size());
  }

  static ConfusionMatrix identity(int n) { return {std::vector<Confusion2>(n, Confusion2::Identity()), {}}; }
  static ConfusionMatrix from_noise(const NoiseModel& noise, int n) {
    return noise.readout.empty() ? identity(n) : ConfusionMatrix{noise.readout, {}};
  }

  void validate() const {
    auto stochastic = [](const RMatrix& m) {
      return (m.array() >= -1e-12).all() && ((m.colwise().sum().array() - 1).abs() < 1e-9).all();
    };
    if (full) {
      require(full->rows() == full->cols() && (full->rows() & (full->rows() - 1)) == 0, "full confusion matrix shape",
              "spam");
      require(n_qubits() <= kFullQubitCap, "full confusion matrix above qubit cap", "spam");
      require(stochastic(*full), "confusion columns must sum to one", "spam");
    }
    for (const auto& m : local) require(stochastic(m), "confusion columns must sum to one", "spam");
  }

  /// Dense form (small registers).
  RMatrix dense() const {
    if (full) return *full;
    RMatrix m = RMatrix::Ones(1, 1);
    // qubit q is bit q of the index, so it is the slowest-varying factor at the left
    for (const auto& c : local) m = Eigen::kroneckerProduct(c, m).eval();
    return m;
  }

  /// 2-norm condition number; for the local form, the product of the per-qubit ones.
  double condition_number() const {
    auto cond = [](const RMatrix& m) {
      const auto s = m.jacobiSvd().singularValues();
      return s[s.size() - 1] > 0 ? s[0] / s[s.size() - 1] : std::numeric_limits<double>::infinity();
    };
    if (full) return cond(*full);
    double c = 1;
    for (const auto& m : local) c *= cond(m);
    return c;
  }
};

namespace detail {

/// Applies a 2x2 matrix on one bit of a distribution over basis indices.
inline void apply_bit_map(const Eigen::Matrix2d& m, int q, std::vector<double>& p) {
  const std::uint64_t bit = 1ULL << q;
  for (std::uint64_t k = 0; k < p.size(); ++k) {
    if (k & bit) continue;
    const double a = p[k], b = p[k | bit];
    p[k] = m(0, 0) * a + m(0, 1) * b;
    p[k | bit] = m(1, 0) * a + m(1, 1) * b;
  }
}

}  // namespace detail

/// Forward readout map applied to a true distribution.
inline Distribution apply_confusion(const Distribution& p, const ConfusionMatrix& cm) {
  cm.validate();
  require(p.size() == (std::size_t{1} << cm.n_qubits()), "distribution size mismatch", "spam");
  if (cm.full) {
    const RVector v = *cm.full * Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size()));
    return {v.data(), v.data() + v.size()};
  }
  Distribution out = p;
  for (int q = 0; q < cm.n_qubits(); ++q) detail::apply_bit_map(cm.local[q], q, out);
  return out;
}

/// Inverse readout map. The result is a quasi-probability vector: it sums to one but may
/// hold small negative entries.
inline Distribution spam_correct(const Distribution& p, const ConfusionMatrix& cm) {
  cm.validate();
  require(p.size() == (std::size_t{1} << cm.n_qubits()), "distribution size mismatch", "spam");
  if (cm.full) {
    Eigen::FullPivLU<RMatrix> lu(*cm.full);
    require(lu.isInvertible(), "singular confusion matrix", "spam");
    const RVector v = lu.solve(Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size())));
    return {v.data(), v.data() + v.size()};
  }
  Distribution out = p;
  for (int q = 0; q < cm.n_qubits(); ++q) {
    const auto& m = cm.local[q];
    require(std::abs(m.determinant()) > 1e-12, "singular confusion matrix on qubit " + std::to_string(q), "spam");
    detail::apply_bit_map(m.inverse(), q, out);
  }
  return out;
}

inline Distribution spam_correct(const ShotTable& t, const ConfusionMatrix& cm) {
  return spam_correct(to_distribution(t, cm.n_qubits()), cm);
}

/// Estimates per-qubit confusion blocks by preparing |0...0> and |1...1> and reading them
/// out through the noise model.
inline ConfusionMatrix calibrate_confusion(int n_qubits, const NoiseModel& noise, std::int64_t shots, std::uint64_t seed) {
  require(shots > 0, "calibration needs shots", "spam");
  ConfusionMatrix cm = ConfusionMatrix::identity(n_qubits);
  for (int truth = 0; truth < 2; ++truth) {
    StateVector psi = StateVector::Zero(Eigen::Index{1} << n_qubits);
    psi[truth ? psi.size() - 1 : 0] = 1.0;
    const auto tables = sample(psi, {std::string(n_qubits, 'Z')}, shots, &noise, mix_seed(seed, truth));
    const auto& t = tables.begin()->second;
    for (int q = 0; q < n_qubits; ++q) {
      std::int64_t ones = 0;
      for (const auto& [bits, c] : t.counts)
        if (bits[q] == '1') ones += c;
      const double p1 = static_cast<double>(ones) / t.shots;
      cm.local[q](1, truth) = p1;
      cm.local[q](0, truth) = 1 - p1;
    }
  }
  return cm;
}

/// Spin of each mode in the blocked ordering: +1 for the first half, -1 for the second.
inline std::vector<int> blocked_mode_spins(int n_modes) {
  std::vector<int> s(n_modes, 1);
  for (int q = n_modes / 2; q < n_modes; ++q) s[q] = -1;
  return s;
}

struct ProjectionStats {
  double kept_weight = 0;     // weight on the correct sector before renormalizing
  double rejected_weight = 0;
};

/// Zeroes every basis state whose particle number or 2Sz differs from the target, then
/// renormalizes. Bit q must be mode q of the register.
inline Distribution project_n_sz(const Distribution& p, int n_electrons, int two_sz, const std::vector<int>& mode_spin,
                                 ProjectionStats* stats = nullptr) {
  const int n = static_cast<int>(mode_spin.size());
  require(p.size() == (std::size_t{1} << n), "distribution size mismatch", "projection");
  std::uint64_t up_mask = 0;
  for (int q = 0; q < n; ++q)
    if (mode_spin[q] > 0) up_mask |= 1ULL << q;
  Distribution out(p.size(), 0.0);
  double kept = 0, total = 0;
  for (std::uint64_t k = 0; k < p.size(); ++k) {
    total += p[k];
    const int na = popcount(k & up_mask), nb = popcount(k & ~up_mask);
    if (na + nb == n_electrons && na - nb == two_sz) {
      out[k] = p[k];
      kept += p[k];
    }
  }
  require(kept > 1e-12, "no weight left in the (N, Sz) sector", "projection");
  for (auto& x : out) x /= kept;
  if (stats) *stats = {kept, total - kept};
  return out;
}

inline Distribution project_n_sz(const ShotTable& t, int n_electrons, int two_sz, const std::vector<int>& mode_spin,
                                 ProjectionStats* stats = nullptr) {
  return project_n_sz(to_distribution(t, static_cast<int>(mode_spin.size())), n_electrons, two_sz, mode_spin, stats);
}

}  // namespace qacse
