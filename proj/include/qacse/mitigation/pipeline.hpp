#pragma once

// Mitigation of one measured 2-RDM:
//   readout inversion -> N/Sz post-selection of the all-Z setting -> assembly
//   -> shift by the accumulated Gamma corrections -> optional DQG purification.

#include "qacse/backend/executor.hpp"
#include "qacse/mitigation/readout.hpp"
#include "qacse/sdp/purify.hpp"

namespace qacse {

/// Flags written as the labels "M", "MP", "MPL", "MPL+" (or "none").
struct PipelineConfig {
  bool spam = false;
  bool projection = false;
  bool gamma = false;
  bool purify = false;

  static PipelineConfig parse(const std::string& label) {
    PipelineConfig c;
    if (label == "none" || label.empty()) return c;
    const std::string order = "MPL+";
    std::size_t at = 0;
    for (char ch : label) {
      const auto pos = order.find(ch, at);
      require(pos != std::string::npos, "bad mitigation label '" + label + "'", "pipeline_config");
      at = pos + 1;
      (ch == 'M' ? c.spam : ch == 'P' ? c.projection : ch == 'L' ? c.gamma : c.purify) = true;
    }
    c.validate();
    return c;
  }

  std::string label() const {
    std::string s;
    if (spam) s += 'M';
    if (projection) s += 'P';
    if (gamma) s += 'L';
    if (purify) s += '+';
    return s.empty() ? "none" : s;
  }

  void validate() const {
    require(!gamma || projection, "Gamma correction requires projection (L needs P)", "pipeline_config");
    require(!purify || projection, "purification requires projection (+ needs P)", "pipeline_config");
  }
};

/// Running sum of Gamma_n = D_n(eps_{n-1}) - D_{n+1}(0+).
struct GammaLedger {
  int n_spin_orbitals = 0;
  TwoRDM sum;
  std::vector<TwoRDM> history;
  std::vector<double> norms;

  explicit GammaLedger(int n = 0) : n_spin_orbitals(n), sum(n) {}

  TwoRDM corrected(const TwoRDM& d) const {
    require(d.n() == n_spin_orbitals, "ledger dimension mismatch", "gamma");
    return d + sum;
  }
};

inline void gamma_update(GammaLedger& ledger, const TwoRDM& d_prev, const TwoRDM& d_zero_plus) {
  require(d_prev.n() == ledger.n_spin_orbitals && d_zero_plus.n() == ledger.n_spin_orbitals,
          "ledger dimension mismatch", "gamma");
  TwoRDM g = d_prev - d_zero_plus;
  ledger.norms.push_back(g.frobenius());
  ledger.sum = ledger.sum + g;
  ledger.history.push_back(std::move(g));
}

struct PipelineContext {
  const TomographyPlan* plan = nullptr;
  int n_electrons = 0;
  int two_sz = 0;
  ConfusionMatrix confusion;  // measured register
  bool tapered = false;       // projection is skipped: register bits are not modes
  PurifyOptions purifier;
};

struct PipelineOutput {
  std::string label;
  std::map<std::string, Distribution> distributions;  // after readout inversion and projection
  TwoRDM assembled;                                   // before the Gamma shift
  TwoRDM shifted;                                     // after the Gamma shift
  TwoRDM final_rdm;
  std::optional<PurificationResult> purification;
  nlohmann::json audit = nlohmann::json::array();
};

inline PipelineOutput apply_pipeline(const RawMeasurement& raw, const PipelineConfig& cfg, const PipelineContext& ctx,
                                     const GammaLedger* ledger = nullptr) {
  cfg.validate();
  require(ctx.plan != nullptr, "no tomography plan", "pipeline");
  const TomographyPlan& plan = *ctx.plan;
  PipelineOutput out;
  out.label = cfg.label();
  const bool distributions_needed = raw.distributions.size() || cfg.spam || cfg.projection;
  if (!distributions_needed) {
    require(raw.state.has_value(), "measurement has neither state nor distributions", "assembly");
    out.assembled = tomograph_2rdm(plan, *raw.state);
    out.audit.push_back({{"stage", "assembly"}, {"source", "state"}, {"trace", out.assembled.trace().real()}});
  } else {
    if (raw.distributions.empty()) {
      require(raw.state.has_value(), "measurement has neither state nor distributions", "assembly");
      for (const auto& s : plan.settings) out.distributions[s] = setting_probabilities(*raw.state, s);
    } else {
      out.distributions = raw.distributions;
    }
    if (cfg.spam) {
      double negative = 0;
      for (auto& [s, p] : out.distributions) {
        p = spam_correct(p, ctx.confusion);
        for (double x : p) negative += std::min(x, 0.0);
      }
      out.audit.push_back({{"stage", "spam"},
                           {"condition_number", ctx.confusion.condition_number()},
                           {"negative_mass", negative}});
    }
    if (cfg.projection) {
      if (ctx.tapered) {
        out.audit.push_back({{"stage", "projection"}, {"skipped", "tapered register"}});
      } else {
        const std::string z(plan.n_qubits, 'Z');
        ProjectionStats st;
        out.distributions[z] =
            project_n_sz(out.distributions.at(z), ctx.n_electrons, ctx.two_sz, blocked_mode_spins(plan.n_modes), &st);
        out.audit.push_back({{"stage", "projection"}, {"kept_weight", st.kept_weight}, {"rejected_weight", st.rejected_weight}});
      }
    }
    out.assembled = tomograph_2rdm(plan, out.distributions);
    out.audit.push_back({{"stage", "assembly"}, {"source", "distributions"}, {"trace", out.assembled.trace().real()}});
  }
  out.shifted = out.assembled;
  if (cfg.gamma && ledger) {
    out.shifted = ledger->corrected(out.assembled);
    out.audit.push_back({{"stage", "gamma"}, {"ledger_norm", ledger->sum.frobenius()}, {"entries", ledger->history.size()}});
  }
  out.final_rdm = out.shifted;
  if (cfg.purify) {
    TwoRDM input = symmetrize(out.shifted);
    const double expected = static_cast<double>(ctx.n_electrons) * (ctx.n_electrons - 1);
    if (ctx.tapered && std::abs(input.trace().real() - expected) > ctx.purifier.trace_tolerance) {
      // no projection on a tapered register, so the trace carries shot noise
      out.audit.push_back({{"stage", "purification"}, {"trace_rescaled_from", input.trace().real()}});
      input.d2 *= expected / input.trace().real();
    }
    out.purification = purify_dqg(input, ctx.n_electrons, ctx.purifier);
    out.final_rdm = out.purification->d2_purified;
    out.audit.push_back({{"stage", "purification"}, {"result", to_json(*out.purification)}});
  }
  return out;
}

}  // namespace qacse
