#include <gtest/gtest.h>

#include "qacse/runner/runner.hpp"
#include "support/systems.hpp"

using namespace qacse;

namespace {

nlohmann::json h2_config(const std::string& r = "0.7414") {
  return {{"integrals", qacse::testing::fixture("h2_sto3g_" + r + ".fcidump")},
          {"solver", {{"strategy", "euler"}, {"convergence_norm", 1e-4}, {"max_iterations", 40}}}};
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("qacse_runner_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST(RunConfig, Defaults) {
  const auto c = parse_run_config(h2_config());
  EXPECT_EQ(c.mitigation.label(), "none");
  EXPECT_EQ(c.solver.strategy, EpsilonStrategy::fixed_euler);
  EXPECT_EQ(c.exec.shots, 0);
  EXPECT_FALSE(c.taper);
  EXPECT_EQ(c.name, "h2_sto3g_0.7414");
}

TEST(RunConfig, RejectsBadInput) {
  auto bad = [](nlohmann::json j) {
    try {
      parse_run_config(j);
    } catch (const Error& e) {
      return e.stage();
    }
    return std::string("accepted");
  };
  auto j = h2_config();
  j["mitigation"] = "L";
  EXPECT_EQ(bad(j), "pipeline_config");
  j = h2_config();
  j["bogus"] = 1;
  EXPECT_EQ(bad(j), "config");
  j = h2_config();
  j["integrals"] = "/nonexistent.fcidump";
  EXPECT_EQ(bad(j), "config");
  j = h2_config();
  j["noise"] = {{"readout_flip", 0.7}};
  EXPECT_EQ(bad(j), "config");
  j = h2_config();
  j["solver"]["strategy"] = "newton";
  EXPECT_EQ(bad(j), "config");
}

TEST(RunConfig, RelativePathsResolveAgainstConfigDir) {
  const auto dir = scratch("relative");
  std::filesystem::create_directories(dir);
  std::filesystem::copy_file(qacse::testing::fixture("h2_sto3g_1.0.fcidump"), dir / "h2.fcidump");
  const auto c = parse_run_config({{"integrals", "h2.fcidump"}, {"output", "out"}}, dir);
  EXPECT_EQ(c.integrals, dir / "h2.fcidump");
  EXPECT_EQ(c.output, dir / "out");
}

TEST(Run, H2MatchesFci) {
  for (const char* r : {"0.7414", "1.5"}) {
    const auto out = run(parse_run_config(h2_config(r)));
    ASSERT_FALSE(out.report.contains("error")) << out.report["error"];
    EXPECT_EQ(out.exit_code, kExitOk);
    EXPECT_LT(std::abs(out.report["fci"]["error"].get<double>()), 1e-6) << r;
    EXPECT_EQ(out.report["schema_version"], kReportSchemaVersion);
    EXPECT_FALSE(out.report.contains("timings"));
  }
}

TEST(Run, StretchedH2IsBiradical) {
  const auto out = run(parse_run_config(h2_config("2.5")));
  const auto occ = out.report["natural_occupations"].get<std::vector<double>>();
  ASSERT_EQ(occ.size(), 2u);
  EXPECT_NEAR(occ[0], 1.0, 0.25);
  EXPECT_NEAR(occ[1], 1.0, 0.25);
  const auto eq = run(parse_run_config(h2_config()));
  EXPECT_GT(eq.report["natural_occupations"][0].get<double>(), 1.9);
}

TEST(Run, NonConvergenceExitCode) {
  auto j = h2_config();
  j["solver"]["max_iterations"] = 1;
  const auto out = run(parse_run_config(j));
  EXPECT_EQ(out.exit_code, kExitNotConverged);
  EXPECT_FALSE(out.report["final"]["converged"].get<bool>());
}

TEST(Run, StageFailureGivesPartialReport) {
  auto j = h2_config();
  j["active_space"] = {{"active", {0, 9}}};
  const auto out = run(parse_run_config(j));
  EXPECT_EQ(out.exit_code, kExitStage);
  ASSERT_TRUE(out.report.contains("error"));
  EXPECT_FALSE(out.report["error"]["message"].get<std::string>().empty());
  EXPECT_FALSE(out.report.contains("final"));
  EXPECT_EQ(out.report["name"], "h2_sto3g_0.7414");
}

TEST(Run, NoisyMitigatedRunRecordsGammaAndPurification) {
  auto j = h2_config();
  j["mitigation"] = "MPL+";
  j["seed"] = 3;
  j["noise"] = {{"p2", 0.01}, {"readout_flip", 0.02}, {"trajectories", 20}};
  j["solver"] = {{"max_iterations", 6}};
  const auto out = run(parse_run_config(j));
  ASSERT_FALSE(out.report.contains("error")) << out.report["error"];
  ASSERT_FALSE(out.report["gamma_norms"].empty());
  EXPECT_GT(out.report["gamma_norms"][0].get<double>(), 0.0);
  ASSERT_FALSE(out.report["purification"].is_null());
  for (const auto& [k, v] : out.report["purification"]["min_eigenvalues"].items()) EXPECT_GT(v.get<double>(), -1e-6) << k;
}

TEST(Run, OutputsAreDeterministic) {
  auto j = h2_config();
  j["mitigation"] = "MP";
  j["seed"] = 11;
  j["noise"] = {{"readout_flip", 0.03}, {"shots", 2000}};
  j["solver"] = {{"max_iterations", 3}};
  const auto a = scratch("det_a"), b = scratch("det_b");
  write_run_outputs(run(parse_run_config(j)).report, a);
  write_run_outputs(run(parse_run_config(j)).report, b);
  for (const char* f : {"report.json", "iterations.jsonl", "energy.tsv", "occupations.tsv"}) {
    const auto s = slurp(a / f);
    EXPECT_FALSE(s.empty()) << f;
    EXPECT_EQ(s, slurp(b / f)) << f;
  }
}

TEST(Run, TaperedActiveSpaceRun) {
  nlohmann::json j = {{"integrals", qacse::testing::fixture("lih_sto3g.fcidump")},
                      {"active_space", {{"core", {0}}, {"active", {1, 2, 5}}}},
                      {"taper", true},
                      {"include_timings", true},
                      {"solver", {{"convergence_norm", 1e-3}, {"max_iterations", 30}}}};
  const auto out = run(parse_run_config(j));
  ASSERT_FALSE(out.report.contains("error")) << out.report["error"];
  EXPECT_EQ(out.report["system"]["n_spin_orbitals"], 6);
  EXPECT_EQ(out.report["final"]["n_qubits"], 6 - static_cast<int>(out.report["taper"]["map"]["removed"].size()));
  EXPECT_LT(std::abs(out.report["fci"]["error"].get<double>()), 1e-4);
  EXPECT_TRUE(out.report["timings"].contains("solve"));
}

TEST(PlotData, OneRowPerRecord) {
  const auto rep = run(parse_run_config(h2_config())).report;
  const auto energy = energy_table(rep);
  EXPECT_EQ(static_cast<std::size_t>(std::count(energy.begin(), energy.end(), '\n')), rep["iterations"].size() + 1);
  EXPECT_EQ(energy.rfind("iteration\tenergy", 0), 0u);
  const auto occ = occupation_table(rep);
  EXPECT_EQ(std::count(occ.begin(), occ.end(), '\n'), 3);
}

TEST(Compare, RelativeKcal) {
  const auto a = run(parse_run_config(h2_config("0.7414"))).report;
  const auto b = run(parse_run_config(h2_config("1.5"))).report;
  const auto rows = compare_reports({a, b});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0]["relative_kcal_mol"].get<double>(), 0.0);
  const double expect = (b["final"]["energy"].get<double>() - a["final"]["energy"].get<double>()) * 627.509;
  EXPECT_NEAR(rows[1]["relative_kcal_mol"].get<double>(), expect, 1e-9);
  EXPECT_GT(rows[1]["relative_kcal_mol"].get<double>(), 0.0);
}

TEST(Compare, RejectsIncompatibleReports) {
  const auto a = run(parse_run_config(h2_config())).report;
  auto b = a;
  b["system"]["n_electrons"] = 4;
  EXPECT_THROW(compare_reports({a, b}), Error);
  auto c = a;
  c.erase("final");
  c["error"] = {{"stage", "solve"}, {"message", "x"}};
  EXPECT_THROW(compare_reports({a, c}), Error);
  EXPECT_THROW(compare_reports({a}), Error);
}
