#pragma once

// The qACSE loop: residual -> selection -> ansatz extension -> measured, mitigated 2-RDM ->
// energy, repeated until the residual norm drops below the threshold.

#include <cmath>
#include <limits>

#include "qacse/backend/executor.hpp"
#include "qacse/fermion/jordan_wigner.hpp"
#include "qacse/hamiltonian/reduced_hamiltonian.hpp"
#include "qacse/mitigation/pipeline.hpp"
#include "qacse/solver/residual.hpp"
#include "qacse/solver/trust_region.hpp"
#include "qacse/taper/taper.hpp"

namespace qacse {

enum class EpsilonStrategy { fixed_euler, trust_region };
enum class ResidualPath { classical, quantum };
enum class AnsatzMode { exact_exponential, trotter_circuit };
enum class PurifySchedule { every_measurement, final_only };

struct SolverConfig {
  double delta = 0.25;
  EpsilonStrategy strategy = EpsilonStrategy::trust_region;
  TrustRegionConfig trust;
  double euler_step = 0.2;
  int euler_halvings = 10;
  std::optional<double> convergence_norm;  // 0.01 Euler, 0.02 trust region
  std::optional<int> max_iterations;       // 20 Euler, 5 trust region
  double selection_fraction = 0.75;
  ResidualPath residual_path = ResidualPath::quantum;
  AnsatzMode ansatz = AnsatzMode::trotter_circuit;
  bool reevaluate_on_reject = false;
  bool gamma_reuse = false;
  PurifySchedule purify_schedule = PurifySchedule::every_measurement;

  double threshold() const { return convergence_norm.value_or(strategy == EpsilonStrategy::fixed_euler ? 0.01 : 0.02); }
  int iterations() const { return max_iterations.value_or(strategy == EpsilonStrategy::fixed_euler ? 20 : 5); }

  void validate() const {
    require(delta > 0, "delta must be positive", "solver_config");
    require(threshold() > 0, "convergence threshold must be positive", "solver_config");
    require(iterations() >= 0, "max_iterations must be non-negative", "solver_config");
    require(selection_fraction > 0 && selection_fraction <= 1, "selection_fraction must lie in (0, 1]", "solver_config");
    require(euler_step > 0, "euler_step must be positive", "solver_config");
    require(trust.initial_radius > 0 && trust.fit_point > 0, "trust region parameters must be positive", "solver_config");
  }
};

/// Backend, mitigation and register options for one solve.
struct QuantumSetup {
  ExecutionConfig exec;
  PipelineConfig mitigation;
  PurifyOptions purifier;
  std::optional<ConfusionMatrix> confusion;  // default: calibrated or taken from the noise model
  std::int64_t calibration_shots = 0;        // > 0: estimate the confusion matrix by sampling
  bool taper = false;
  double taper_drop = 0;
  std::optional<int> two_sz;

  /// Exact state simulation: no noise and exact probabilities.
  bool exact() const { return exec.noiseless() && exec.shots == 0; }
};

struct IterationRecord {
  int iteration = 0;
  double energy = 0;
  double residual_norm = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0;
  std::size_t terms_added = 0;
  bool accepted = true;
  double trust_radius = 0;
  double gamma_norm = 0;
  double gamma_limit_error = 0;  // |D~_{n+1}(0+) - D~_n|
  std::map<double, double> evaluations;
  std::optional<nlohmann::json> purification;
};

inline nlohmann::json to_json(const IterationRecord& r) {
  nlohmann::json j = {{"iteration", r.iteration},        {"energy", r.energy},
                      {"residual_norm", r.residual_norm}, {"epsilon", r.epsilon},
                      {"terms_added", r.terms_added},     {"accepted", r.accepted},
                      {"trust_radius", r.trust_radius},   {"gamma_norm", r.gamma_norm},
                      {"gamma_limit_error", r.gamma_limit_error}};
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& [e, v] : r.evaluations) ev.push_back({e, v});
  j["evaluations"] = ev;
  if (r.purification) j["purification"] = *r.purification;
  if (std::isnan(r.residual_norm)) j["residual_norm"] = nullptr;
  return j;
}

using AnsatzSteps = std::vector<std::pair<FermionSum, double>>;

struct SolveResult {
  TwoRDM rdm;
  double energy = 0;
  double initial_energy = 0;
  double final_residual_norm = 0;
  std::vector<IterationRecord> records;
  AnsatzSteps ansatz;
  bool converged = false;
  GammaLedger ledger;
  std::optional<PurificationResult> purification;
  std::optional<TaperMap> taper;
  int n_qubits = 0;
  std::optional<CVector> state;  // exact mode, on the (possibly tapered) register
  nlohmann::json audit = nlohmann::json::array();

  std::size_t accepted_steps() const { return ansatz.size(); }
};

namespace detail {

class SolveEngine {
 public:
  SolveEngine(const ReducedHamiltonian& ham, const SolverConfig& cfg, const QuantumSetup& setup)
      : ham_(ham), cfg_(cfg), setup_(setup), n_(ham.n()) {
    cfg_.validate();
    setup_.mitigation.validate();
    two_sz_ = setup.two_sz.value_or(default_two_sz(ham.n_electrons));
    const auto [na, nb] = spin_split(ham.n_electrons, two_sz_);
    hf_bits_ = hartree_fock_bits(ham.n_spatial(), na, nb);
    exact_ = setup.exact();
    require(exact_ || cfg_.ansatz == AnsatzMode::trotter_circuit,
            "exact exponential ansatz needs a noiseless exact backend", "solver_config");

    h_pauli_ = hamiltonian_pauli(ham);
    if (setup.taper) {
      auto tt = taper_with_threshold(h_pauli_, setup.taper_drop, hf_bits_);
      taper_ = tt.map;
      h_register_ = tt.tapered;
      const TaperMap map = *taper_;
      transform_ = [map](const PauliSum& p) { return apply_taper(p, map); };
    } else {
      h_register_ = h_pauli_;
    }
    plan_ = make_tomography_plan(n_, transform_);
    CVector hf = basis_state(n_, hf_bits_);
    if (taper_) hf = taper_state(hf, *taper_);
    initial_ = hf;
    if (exact_) h_sparse_ = taper_ ? sparse_matrix_of(h_register_) : hamiltonian_fock_matrix(ham);

    ExecutionConfig ec = setup.exec;
    executor_.emplace(plan_, initial_, ec);

    ctx_.plan = &plan_;
    ctx_.n_electrons = ham.n_electrons;
    ctx_.two_sz = two_sz_;
    ctx_.tapered = taper_.has_value();
    ctx_.purifier = setup.purifier;
    if (setup.confusion) {
      ctx_.confusion = *setup.confusion;
    } else if (setup.calibration_shots > 0) {
      ctx_.confusion = calibrate_confusion(plan_.n_qubits, setup.exec.noise, setup.calibration_shots,
                                           mix_seed(setup.exec.seed, 0xCA1BULL));
    } else {
      ctx_.confusion = ConfusionMatrix::from_noise(setup.exec.noise, plan_.n_qubits);
    }
    loop_flags_ = setup.mitigation;
    if (cfg_.purify_schedule == PurifySchedule::final_only) loop_flags_.purify = false;
    lambda_flags_ = setup.mitigation;
    lambda_flags_.gamma = false;
    lambda_flags_.purify = false;
  }

  struct Measurement {
    PipelineOutput out;
    std::optional<CVector> state;
    double energy = 0;
  };

  SolveResult run() {
    SolveResult res;
    res.n_qubits = plan_.n_qubits;
    res.taper = taper_;
    GammaLedger ledger(n_);

    Measurement cur = measure_exact_or_circuit(std::nullopt, ansatz_, initial_, loop_flags_, &ledger);
    res.initial_energy = cur.energy;
    IterationRecord rec0;
    rec0.iteration = 0;
    rec0.energy = cur.energy;
    trust_.radius = cfg_.trust.initial_radius;
    rec0.trust_radius = trust_.radius;
    if (cur.out.purification) rec0.purification = to_json(*cur.out.purification);
    res.records.push_back(rec0);

    double euler_eps = cfg_.euler_step;
    std::optional<ResidualA> pending;
    for (int it = 1;; ++it) {
      std::optional<ResidualA> measured;
      if (pending && !cfg_.reevaluate_on_reject) {
        measured = *pending;
      } else {
        try {
          measured = residual(cur);
        } catch (const Error& e) {
          if (e.stage() != "projection") throw;
        }
      }
      pending.reset();
      if (!measured) {
        // auxiliary measurement lost every shot: count the iteration and measure again
        if (it > cfg_.iterations()) break;
        IterationRecord failed;
        failed.iteration = it;
        failed.energy = cur.energy;
        failed.accepted = false;
        failed.trust_radius = trust_.radius;
        res.records.push_back(failed);
        continue;
      }
      const ResidualA a = *measured;
      const double norm = a.norm();
      if (std::isnan(res.records.back().residual_norm)) res.records.back().residual_norm = norm;
      res.final_residual_norm = norm;
      if (norm < cfg_.threshold()) {
        res.converged = true;
        break;
      }
      if (it > cfg_.iterations()) break;

      const ResidualA sel = select_operators(a, cfg_.selection_fraction);
      const FermionSum op = sel.to_operator();
      IterationRecord rec;
      rec.iteration = it;
      rec.terms_added = op.size();

      // Gamma: the extended circuit at zero angle against the previous accepted RDM
      GammaLedger trial_ledger = ledger;
      if (loop_flags_.gamma) {
        if (cfg_.gamma_reuse && !ledger.history.empty()) {
          const TwoRDM last = ledger.history.back();
          trial_ledger.norms.push_back(last.frobenius());
          trial_ledger.sum = trial_ledger.sum + last;
          trial_ledger.history.push_back(last);
        } else {
          PipelineConfig raw_flags = loop_flags_;
          raw_flags.gamma = false;
          raw_flags.purify = false;
          std::optional<Measurement> zero;
          try {
            zero = measure_exact_or_circuit(std::make_pair(op, 0.0), ansatz_, cur_state(cur), raw_flags, nullptr);
          } catch (const Error& e) {
            if (e.stage() != "projection") throw;
          }
          if (!zero) {
            rec.accepted = false;
            rec.energy = cur.energy;
            rec.residual_norm = norm;
            rec.trust_radius = trust_.radius;
            pending = a;
            res.records.push_back(rec);
            continue;
          }
          gamma_update(trial_ledger, cur.out.assembled, zero->out.assembled);
          rec.gamma_limit_error = (trial_ledger.corrected(zero->out.assembled) - cur.out.shifted).frobenius();
        }
        rec.gamma_norm = trial_ledger.norms.back();
      }

      std::map<double, Measurement> cache;
      auto evaluate = [&](double eps) {
        auto f = cache.find(eps);
        if (f == cache.end()) {
          Measurement m;
          try {
            m = measure_exact_or_circuit(std::make_pair(op, eps), ansatz_, cur_state(cur), loop_flags_, &trial_ledger);
          } catch (const Error& e) {
            if (e.stage() != "projection") throw;
            m.energy = std::numeric_limits<double>::infinity();  // no surviving shots: reject
          }
          f = cache.emplace(eps, std::move(m)).first;
        }
        return f->second.energy;
      };

      double eps = 0;
      bool accepted = false;
      if (cfg_.strategy == EpsilonStrategy::trust_region) {
        const double radius = trust_.radius;
        const StepResult sr = optimize_epsilon(evaluate, trust_, cfg_.trust);
        eps = sr.epsilon;
        // a step that only beats the extended circuit's own zero-angle energy does not help
        accepted = sr.accepted && sr.energy < cur.energy - cfg_.trust.noise_floor;
        if (sr.accepted && !accepted) trust_.radius = std::max(cfg_.trust.min_radius, radius / 2);
        rec.evaluations = sr.evaluations;
      } else {
        eps = euler_eps;
        double e = evaluate(eps);
        if (exact_) {
          for (int h = 0; h < cfg_.euler_halvings && e >= cur.energy; ++h) {
            eps /= 2;
            e = evaluate(eps);
          }
          accepted = e < cur.energy;
          if (accepted) euler_eps = eps;
        } else {
          accepted = e < cur.energy - cfg_.trust.noise_floor;
        }
        for (const auto& [k, m] : cache) rec.evaluations.emplace(k, m.energy);
      }
      rec.trust_radius = trust_.radius;
      rec.epsilon = eps;
      rec.accepted = accepted;
      if (accepted) {
        Measurement next = cache.at(eps);
        ansatz_.emplace_back(op, eps);
        cur = std::move(next);
        ledger = std::move(trial_ledger);
        rec.energy = cur.energy;
        if (cur.out.purification) rec.purification = to_json(*cur.out.purification);
      } else {
        rec.energy = cur.energy;
        rec.residual_norm = norm;
        pending = a;
      }
      res.records.push_back(rec);
    }

    res.ansatz = ansatz_;
    res.ledger = ledger;
    res.rdm = cur.out.final_rdm;
    res.energy = cur.energy;
    res.purification = cur.out.purification;
    res.audit = cur.out.audit;
    if (setup_.mitigation.purify && cfg_.purify_schedule == PurifySchedule::final_only) {
      PipelineOutput fin = cur.out;
      TwoRDM input = symmetrize(fin.shifted);
      const double expected = static_cast<double>(ham_.n_electrons) * (ham_.n_electrons - 1);
      if (taper_) input.d2 *= expected / input.trace().real();
      res.purification = purify_dqg(input, ham_.n_electrons, setup_.purifier);
      res.rdm = res.purification->d2_purified;
      res.energy = energy_from_2rdm(ham_, res.rdm);
      res.audit.push_back({{"stage", "purification"}, {"result", to_json(*res.purification)}});
    }
    if (exact_) res.state = cur.state;
    return res;
  }

 private:
  const CVector& cur_state(const Measurement& m) const { return m.state ? *m.state : initial_; }

  /// The state (exact mode) or circuit run for the accepted ansatz extended by `extra`.
  Measurement measure_exact_or_circuit(const std::optional<std::pair<FermionSum, double>>& extra,
                                       const AnsatzSteps& steps, const CVector& base, const PipelineConfig& flags,
                                       const GammaLedger* ledger) {
    Measurement m;
    RawMeasurement raw;
    if (exact_) {
      CVector psi = base;
      if (extra) psi = advance(psi, extra->first, extra->second);
      raw.state = psi;
      m.state = std::move(psi);
    } else {
      AnsatzSteps all = steps;
      if (extra) all.push_back(*extra);
      raw = executor_->run(build_ansatz_circuit(all, n_, transform_), stream_++);
    }
    m.out = apply_pipeline(raw, flags, ctx_, ledger);
    m.energy = energy_from_2rdm(ham_, m.out.final_rdm);
    return m;
  }

  CVector advance(const CVector& psi, const FermionSum& op, double eps) const {
    if (eps == 0.0 && cfg_.ansatz == AnsatzMode::exact_exponential) return psi;
    if (cfg_.ansatz == AnsatzMode::exact_exponential) {
      PauliSum img = jordan_wigner(op, n_);
      if (transform_) img = transform_(img);
      return expmv(sparse_matrix_of(img), psi, Complex(eps));
    }
    return evolve(build_ansatz_circuit({{op, eps}}, n_, transform_), psi);
  }

  TwoRDM state_rdm(const CVector& psi) const { return taper_ ? tomograph_2rdm(plan_, psi) : exact_2rdm(psi, n_); }

  ResidualA residual(const Measurement& cur) {
    if (cfg_.residual_path == ResidualPath::classical) {
      const TwoRDM d2 = symmetrize(cur.out.final_rdm);
      return residual_classical(contract_to_1rdm(d2, ham_.n_electrons), d2, ham_);
    }
    if (exact_) {
      const CVector& psi = cur_state(cur);
      const CVector plus = expmv(h_sparse_, psi, Complex(0.0, cfg_.delta));
      const CVector minus = expmv(h_sparse_, psi, Complex(0.0, -cfg_.delta));
      return residual_from_auxiliary(state_rdm(plus), state_rdm(minus), cfg_.delta);
    }
    const Circuit prep = build_ansatz_circuit(ansatz_, n_, transform_);
    TwoRDM lam[2];
    for (int k = 0; k < 2; ++k) {
      Circuit c = prep;
      c.append(trotter_slice(h_register_, cfg_.delta, k == 0 ? 1 : -1));
      lam[k] = apply_pipeline(executor_->run(c, stream_++), lambda_flags_, ctx_).final_rdm;
    }
    return residual_from_auxiliary(lam[0], lam[1], cfg_.delta);
  }

  const ReducedHamiltonian& ham_;
  SolverConfig cfg_;
  QuantumSetup setup_;
  int n_;
  int two_sz_ = 0;
  std::uint64_t hf_bits_ = 0;
  bool exact_ = true;
  PauliSum h_pauli_, h_register_;
  std::optional<TaperMap> taper_;
  PauliTransform transform_;
  TomographyPlan plan_;
  CVector initial_;
  SparseCMatrix h_sparse_;
  std::optional<Executor> executor_;
  PipelineContext ctx_;
  PipelineConfig loop_flags_, lambda_flags_;
  TrustRegionState trust_;
  AnsatzSteps ansatz_;
  std::uint64_t stream_ = 1;
};

}  // namespace detail

/// Runs the loop from the Hartree-Fock determinant.
inline SolveResult solve(const ReducedHamiltonian& ham, const SolverConfig& cfg, const QuantumSetup& setup = {}) {
  detail::SolveEngine engine(ham, cfg, setup);
  return engine.run();
}

}  // namespace qacse
