#pragma once

// Runs a state-preparation circuit and returns what the tomography plan needs: either the
// exact final state (noiseless, infinite shots) or one outcome distribution per setting.

#include <optional>

#include "qacse/rdm/tomography.hpp"

namespace qacse {

struct ExecutionConfig {
  std::int64_t shots = 0;  // 0 = exact probabilities
  int trajectories = 1;    // noise trajectories per measurement when gate noise is on
  NoiseModel noise;
  std::uint64_t seed = 0;

  bool noiseless() const { return !noise.gate_noise() && noise.readout.empty(); }
};

struct RawMeasurement {
  std::optional<StateVector> state;  // set when the run has no gate noise
  std::map<std::string, Distribution> distributions;
  std::int64_t shots_used = 0;
};

/// Forward readout map on one distribution (per-qubit blocks).
inline void apply_readout(const NoiseModel& noise, Distribution& p) {
  for (std::size_t q = 0; q < noise.readout.size(); ++q) {
    const auto& m = noise.readout[q];
    const std::uint64_t bit = 1ULL << q;
    for (std::uint64_t k = 0; k < p.size(); ++k) {
      if (k & bit) continue;
      const double a = p[k], b = p[k | bit];
      p[k] = m(0, 0) * a + m(0, 1) * b;
      p[k | bit] = m(1, 0) * a + m(1, 1) * b;
    }
  }
}

class Executor {
 public:
  Executor(TomographyPlan plan, StateVector initial, ExecutionConfig cfg)
      : plan_(std::move(plan)), initial_(std::move(initial)), cfg_(std::move(cfg)) {
    require(initial_.size() == (Eigen::Index{1} << plan_.n_qubits), "initial state does not match register", "backend");
    require(cfg_.shots >= 0, "shots must be non-negative", "backend");
    require(cfg_.trajectories >= 1, "need at least one trajectory", "backend");
    cfg_.noise.validate(plan_.n_qubits);
  }

  const TomographyPlan& plan() const { return plan_; }
  const ExecutionConfig& config() const { return cfg_; }
  const StateVector& initial() const { return initial_; }
  int n_qubits() const { return plan_.n_qubits; }

  /// `stream` selects an independent random stream, so repeated runs of the same circuit with
  /// different streams see independent noise and shot samples.
  RawMeasurement run(const Circuit& c, std::uint64_t stream) const {
    RawMeasurement out;
    const std::uint64_t seed = mix_seed(cfg_.seed, stream);
    const bool gate_noise = cfg_.noise.gate_noise();
    if (!gate_noise) {
      out.state = evolve(c, initial_);
      if (cfg_.noiseless() && cfg_.shots == 0) return out;
    }
    const int traj = gate_noise ? cfg_.trajectories : 1;
    const std::size_t dim = std::size_t{1} << plan_.n_qubits;
    std::map<std::string, ShotTable> tables;
    for (const auto& s : plan_.settings) out.distributions[s].assign(dim, 0.0);
    for (int t = 0; t < traj; ++t) {
      const StateVector psi = gate_noise ? evolve(c, initial_, &cfg_.noise, mix_seed(seed, 2 * t)) : *out.state;
      if (cfg_.shots == 0) {
        for (const auto& s : plan_.settings) {
          auto p = setting_probabilities(psi, s);
          for (std::size_t k = 0; k < dim; ++k) out.distributions[s][k] += p[k] / traj;
        }
      } else {
        const std::int64_t n = cfg_.shots / traj + (t < cfg_.shots % traj ? 1 : 0);
        if (n == 0) continue;
        for (auto& [s, tab] : sample(psi, plan_.settings, n, &cfg_.noise, mix_seed(seed, 2 * t + 1)))
          for (const auto& [bits, k] : tab.counts) tables[s].add(bits, k);
      }
    }
    if (cfg_.shots == 0) {
      for (auto& [s, p] : out.distributions) apply_readout(cfg_.noise, p);
    } else {
      for (const auto& s : plan_.settings) out.distributions[s] = to_distribution(tables.at(s), plan_.n_qubits);
      out.shots_used = cfg_.shots * static_cast<std::int64_t>(plan_.settings.size());
    }
    return out;
  }

 private:
  TomographyPlan plan_;
  StateVector initial_;
  ExecutionConfig cfg_;
};

}  // namespace qacse
