#include <gtest/gtest.h>

#include "qacse/hamiltonian/fci.hpp"
#include "qacse/mitigation/pipeline.hpp"
#include "support/systems.hpp"

using namespace qacse;

namespace {

Confusion2 confusion(double p01, double p10) {
  // p01: P(read 0 | true 1), p10: P(read 1 | true 0)
  Confusion2 m;
  m << 1 - p10, p01, p10, 1 - p01;
  return m;
}

Distribution random_distribution(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  Distribution p(std::size_t{1} << n);
  double s = 0;
  for (auto& x : p) s += (x = u(rng));
  for (auto& x : p) x /= s;
  return p;
}

double sum(const Distribution& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

}  // namespace

TEST(PipelineConfig, ParsesTableLabels) {
  for (const std::string l : {"M", "MP", "MPL", "MPL+", "P", "PL", "none"}) EXPECT_EQ(PipelineConfig::parse(l).label(), l);
  const auto c = PipelineConfig::parse("MPL+");
  EXPECT_TRUE(c.spam && c.projection && c.gamma && c.purify);
}

TEST(PipelineConfig, RejectsGammaWithoutProjection) {
  EXPECT_THROW(PipelineConfig::parse("ML"), Error);
  EXPECT_THROW(PipelineConfig::parse("L"), Error);
  EXPECT_THROW(PipelineConfig::parse("PM"), Error);
  EXPECT_THROW(PipelineConfig::parse("MX"), Error);
}

TEST(Spam, IdentityLeavesDistribution) {
  std::mt19937_64 rng(1);
  const auto p = random_distribution(3, rng);
  const auto q = spam_correct(p, ConfusionMatrix::identity(3));
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(q[k], p[k], 1e-15);
}

TEST(Spam, OneQubitRoundTrip) {
  Confusion2 m;
  m << 0.9, 0.2, 0.1, 0.8;
  const ConfusionMatrix cm{{m}, {}};
  const auto fwd = apply_confusion({1.0, 0.0}, cm);
  EXPECT_NEAR(fwd[0], 0.9, 1e-15);
  EXPECT_NEAR(fwd[1], 0.1, 1e-15);
  const auto back = spam_correct(fwd, cm);
  EXPECT_NEAR(back[0], 1.0, 1e-12);
  EXPECT_NEAR(back[1], 0.0, 1e-12);
  EXPECT_NEAR(sum(spam_correct({0.5, 0.5}, cm)), 1.0, 1e-12);
}

TEST(Spam, RandomRoundTripsLocalAndFull) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 0.15);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + t % 4;
    ConfusionMatrix cm;
    for (int q = 0; q < n; ++q) cm.local.push_back(confusion(u(rng), u(rng)));
    const auto p = random_distribution(n, rng);
    const auto back = spam_correct(apply_confusion(p, cm), cm);
    for (std::size_t k = 0; k < p.size(); ++k) ASSERT_NEAR(back[k], p[k], 1e-10);
    // the dense form gives the same forward image
    const ConfusionMatrix full{{}, cm.dense()};
    const auto a = apply_confusion(p, cm), b = apply_confusion(p, full);
    for (std::size_t k = 0; k < p.size(); ++k) ASSERT_NEAR(a[k], b[k], 1e-13);
    const auto back_full = spam_correct(b, full);
    for (std::size_t k = 0; k < p.size(); ++k) ASSERT_NEAR(back_full[k], p[k], 1e-10);
  }
}

TEST(Spam, SingularAndNonStochasticRejected) {
  Confusion2 half;
  half << 0.5, 0.5, 0.5, 0.5;
  EXPECT_THROW(spam_correct({0.5, 0.5}, ConfusionMatrix{{half}, {}}), Error);
  Confusion2 bad;
  bad << 0.9, 0.1, 0.2, 0.9;
  EXPECT_THROW(spam_correct({0.5, 0.5}, ConfusionMatrix{{bad}, {}}), Error);
}

TEST(Spam, ConditionNumberGrowsWithFlipRate) {
  const auto low = ConfusionMatrix{{confusion(0.01, 0.01)}, {}}.condition_number();
  const auto high = ConfusionMatrix{{confusion(0.3, 0.3)}, {}}.condition_number();
  EXPECT_GT(high, low);
  EXPECT_NEAR(ConfusionMatrix::identity(3).condition_number(), 1.0, 1e-12);
}

TEST(Spam, CalibrationRecoversFlipRates) {
  NoiseModel nm;
  nm.readout = {confusion(0.05, 0.02), confusion(0.1, 0.03)};
  const auto cm = calibrate_confusion(2, nm, 200000, 5);
  for (int q = 0; q < 2; ++q) EXPECT_LT((cm.local[q] - nm.readout[q]).cwiseAbs().maxCoeff(), 5e-3);
}

TEST(Projection, RejectsWrongSectorAndRenormalizes) {
  ShotTable t;
  t.add("0011", 500);
  t.add("0111", 24);
  const auto p = project_n_sz(t, 2, -2, blocked_mode_spins(4));
  EXPECT_NEAR(p[parse_bitstring("0011")], 1.0, 1e-15);
  EXPECT_EQ(p[parse_bitstring("0111")], 0.0);
}

TEST(Projection, SectorDataUnchangedAndIdempotent) {
  std::mt19937_64 rng(3);
  auto p = random_distribution(4, rng);
  const auto once = project_n_sz(p, 2, 0, blocked_mode_spins(4));
  const auto twice = project_n_sz(once, 2, 0, blocked_mode_spins(4));
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(once[k], twice[k], 1e-15);
  EXPECT_NEAR(sum(once), 1.0, 1e-14);
  EXPECT_GT(once[0b0101], 0.0);
  EXPECT_EQ(once[0b0011], 0.0);  // two alpha electrons: 2Sz = 2
}

TEST(Projection, EmptySupportThrows) {
  Distribution p(16, 0.0);
  p[0] = 1.0;
  EXPECT_THROW(project_n_sz(p, 2, 0, blocked_mode_spins(4)), Error);
}

TEST(Projection, NoisyHartreeFockTraceExactOnlyWhenProjected) {
  const int n = 6;
  const auto plan = make_tomography_plan(n);
  ExecutionConfig cfg;
  cfg.shots = 4000;
  cfg.noise = NoiseModel::uniform(n, 0, 0, 0.05);
  cfg.seed = 11;
  const Executor ex(plan, basis_state(n, hartree_fock_bits(3, 1, 1)), cfg);
  const auto raw = ex.run(Circuit(n), 0);
  PipelineContext ctx{&plan, 2, 0, ConfusionMatrix::from_noise(cfg.noise, n), false, {}};
  const auto m = apply_pipeline(raw, PipelineConfig::parse("M"), ctx);
  const auto mp = apply_pipeline(raw, PipelineConfig::parse("MP"), ctx);
  EXPECT_NEAR(mp.assembled.trace().real(), 2.0, 1e-12);
  EXPECT_GT(std::abs(m.assembled.trace().real() - 2.0), 1e-6);
  // raw, uncorrected trace is further off still
  const auto none = apply_pipeline(raw, PipelineConfig::parse("none"), ctx);
  EXPECT_GT(std::abs(none.assembled.trace().real() - 2.0), 1e-3);
}

TEST(Gamma, NoiselessBackendGivesZeroCorrections) {
  const auto ham = build_reduced_hamiltonian(qacse::testing::random_integrals(2, 2, 4));
  const int n = 4;
  const auto plan = make_tomography_plan(n);
  const Executor ex(plan, basis_state(n, hartree_fock_bits(2, 1, 1)), {});
  PipelineContext ctx{&plan, 2, 0, ConfusionMatrix::identity(n), false, {}};
  // one double excitation at a finite angle, then the same block appended at zero angle
  FermionSum a = FermionSum::two_body(1, 3, 0, 2) - FermionSum::two_body(0, 2, 1, 3);
  const auto c1 = build_ansatz_circuit({{a, 0.3}}, n);
  const auto c2 = build_ansatz_circuit({{a, 0.3}, {a, 0.0}}, n);
  GammaLedger ledger(n);
  const auto d_prev = apply_pipeline(ex.run(c1, 0), PipelineConfig::parse("PL"), ctx, &ledger).assembled;
  const auto d_zero = apply_pipeline(ex.run(c2, 1), PipelineConfig::parse("PL"), ctx, &ledger).assembled;
  gamma_update(ledger, d_prev, d_zero);
  EXPECT_LT(ledger.norms.back(), 1e-10);
  (void)ham;
}

TEST(Gamma, LimitIdentityAndTraceNeutrality) {
  const int n = 4;
  const auto noisy_prev = exact_2rdm(qacse::testing::random_sector_state(2, 1, 1, 1), n);
  // depolarized state at the zero-angle extension: uniform (N, Sz) ensemble
  TwoRDM mixed(n);
  for (auto bits : sector_basis(2, 1, 1)) mixed = mixed + determinant_2rdm(n, bits);
  mixed.d2 /= static_cast<double>(sector_basis(2, 1, 1).size());
  GammaLedger ledger(n);
  gamma_update(ledger, noisy_prev, mixed);
  EXPECT_LT((ledger.corrected(mixed) - noisy_prev).frobenius(), 1e-12);
  EXPECT_LT(std::abs(ledger.history.back().trace()), 1e-12);
  const TwoRDM& g = ledger.history.back();
  EXPECT_LT((g.d2 - g.d2.adjoint()).norm(), 1e-14);
  EXPECT_NEAR(std::abs(ledger.corrected(noisy_prev).trace() - 2.0), 0.0, 1e-8);
}

TEST(Gamma, ConstantShiftAccumulates) {
  const int n = 4;
  TwoRDM s(n);
  s.at(0, 2, 1, 3) = 0.01;
  s.at(2, 0, 1, 3) = -0.01;
  s.at(0, 2, 3, 1) = -0.01;
  s.at(2, 0, 3, 1) = 0.01;
  s = symmetrize(s);
  const TwoRDM clean = determinant_2rdm(n, 0b0101);
  GammaLedger ledger(n);
  // each iteration the zero-angle measurement reads clean - s while the previous read clean
  for (int it = 0; it < 2; ++it) gamma_update(ledger, clean, clean - s);
  EXPECT_LT((ledger.sum - (s + s)).frobenius(), 1e-15);
  EXPECT_THROW(gamma_update(ledger, TwoRDM(6), TwoRDM(6)), Error);
}

TEST(Pipeline, FlagsOffMatchesTomography) {
  const int n = 6;
  const auto plan = make_tomography_plan(n);
  const auto psi = qacse::testing::random_sector_state(3, 2, 1, 3);
  RawMeasurement raw;
  raw.state = psi;
  PipelineContext ctx{&plan, 3, 1, ConfusionMatrix::identity(n), false, {}};
  const auto out = apply_pipeline(raw, PipelineConfig{}, ctx);
  EXPECT_LT((out.final_rdm - tomograph_2rdm(plan, psi)).frobenius(), 1e-15);
  EXPECT_LT((out.final_rdm - exact_2rdm(psi, n)).frobenius(), 1e-12);
  // the distribution path agrees too
  const auto mp = apply_pipeline(raw, PipelineConfig::parse("MP"), ctx);
  EXPECT_LT((mp.final_rdm - exact_2rdm(psi, n)).frobenius(), 1e-12);
}

TEST(Pipeline, PurificationMakesNoisyRdmFeasible) {
  const int n = 4;
  const auto plan = make_tomography_plan(n);
  ExecutionConfig cfg;
  cfg.shots = 300;
  cfg.noise = NoiseModel::uniform(n, 0.0, 0.05, 0.05);
  cfg.trajectories = 10;
  cfg.seed = 2;
  const Executor ex(plan, basis_state(n, hartree_fock_bits(2, 1, 1)), cfg);
  FermionSum a = FermionSum::two_body(1, 3, 0, 2) - FermionSum::two_body(0, 2, 1, 3);
  const auto raw = ex.run(build_ansatz_circuit({{a, 0.4}}, n), 0);
  PipelineContext ctx{&plan, 2, 0, ConfusionMatrix::from_noise(cfg.noise, n), false, {}};
  const auto mp = apply_pipeline(raw, PipelineConfig::parse("MP"), ctx);
  const auto plus = apply_pipeline(raw, PipelineConfig::parse("MP+"), ctx);
  EXPECT_FALSE(check_dqg(symmetrize(mp.final_rdm), 2).feasible);
  EXPECT_TRUE(check_dqg(plus.final_rdm, 2).feasible);
  EXPECT_EQ(plus.audit.back()["stage"], "purification");
}
