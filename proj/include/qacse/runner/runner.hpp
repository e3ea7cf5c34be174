#pragma once

// End-to-end runs: config -> integrals -> folding -> tapering -> solve -> report files.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qacse/hamiltonian/fci.hpp"
#include "qacse/solver/solver.hpp"

namespace qacse {

inline constexpr int kReportSchemaVersion = 1;

/// Exit codes of the command-line verbs.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitStage = 3, kExitNotConverged = 4 };

struct ActiveSpaceSpec {
  std::vector<int> core;
  std::vector<int> active;
};

struct RunConfig {
  std::string name;
  std::filesystem::path integrals;
  std::optional<ActiveSpaceSpec> active_space;
  PipelineConfig mitigation;
  SolverConfig solver;
  ExecutionConfig exec;
  std::int64_t calibration_shots = 0;
  bool taper = false;
  double taper_drop = 0;
  std::optional<int> two_sz;
  std::filesystem::path output = "qacse_out";
  bool include_timings = false;
  nlohmann::json source;  // the parsed file, echoed into the report
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    require(ok, "unknown key '" + k + "' in " + where, "config");
  }
}

}  // namespace detail

/// Parses a JSON run config. Relative paths are resolved against `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::get_or;
  require(j.is_object(), "config must be a JSON object", "config");
  detail::reject_unknown(j, {"name", "integrals", "active_space", "mitigation", "solver", "noise", "taper", "seed", "two_sz",
                             "output", "include_timings"},
                         "config");
  RunConfig c;
  c.source = j;
  require(j.contains("integrals"), "missing 'integrals'", "config");
  c.integrals = j.at("integrals").get<std::string>();
  if (c.integrals.is_relative() && !base_dir.empty()) c.integrals = base_dir / c.integrals;
  require(std::filesystem::exists(c.integrals), "integrals file not found: " + c.integrals.string(), "config");
  c.name = get_or<std::string>(j, "name", c.integrals.stem().string());
  if (j.contains("active_space")) {
    const auto& a = j.at("active_space");
    detail::reject_unknown(a, {"core", "active"}, "active_space");
    c.active_space = ActiveSpaceSpec{get_or<std::vector<int>>(a, "core", {}), get_or<std::vector<int>>(a, "active", {})};
    require(!c.active_space->active.empty(), "active_space.active must be nonempty", "config");
  }
  c.mitigation = PipelineConfig::parse(get_or<std::string>(j, "mitigation", "none"));

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    detail::reject_unknown(s, {"strategy", "delta", "euler_step", "convergence_norm", "max_iterations", "selection_fraction",
                               "residual_path", "ansatz", "reevaluate_on_reject", "gamma_reuse", "purify_schedule",
                               "trust_radius", "fit_point", "noise_floor"},
                           "solver");
    const auto strategy = get_or<std::string>(s, "strategy", "trust_region");
    require(strategy == "trust_region" || strategy == "euler", "solver.strategy must be 'euler' or 'trust_region'", "config");
    c.solver.strategy = strategy == "euler" ? EpsilonStrategy::fixed_euler : EpsilonStrategy::trust_region;
    c.solver.delta = get_or(s, "delta", c.solver.delta);
    c.solver.euler_step = get_or(s, "euler_step", c.solver.euler_step);
    if (s.contains("convergence_norm")) c.solver.convergence_norm = s.at("convergence_norm").get<double>();
    if (s.contains("max_iterations")) c.solver.max_iterations = s.at("max_iterations").get<int>();
    c.solver.selection_fraction = get_or(s, "selection_fraction", c.solver.selection_fraction);
    const auto path = get_or<std::string>(s, "residual_path", "quantum");
    require(path == "quantum" || path == "classical", "solver.residual_path must be 'quantum' or 'classical'", "config");
    c.solver.residual_path = path == "classical" ? ResidualPath::classical : ResidualPath::quantum;
    const auto ansatz = get_or<std::string>(s, "ansatz", "trotter");
    require(ansatz == "trotter" || ansatz == "exact", "solver.ansatz must be 'trotter' or 'exact'", "config");
    c.solver.ansatz = ansatz == "exact" ? AnsatzMode::exact_exponential : AnsatzMode::trotter_circuit;
    c.solver.reevaluate_on_reject = get_or(s, "reevaluate_on_reject", false);
    c.solver.gamma_reuse = get_or(s, "gamma_reuse", false);
    const auto sched = get_or<std::string>(s, "purify_schedule", "every_measurement");
    require(sched == "every_measurement" || sched == "final_only",
            "solver.purify_schedule must be 'every_measurement' or 'final_only'", "config");
    c.solver.purify_schedule = sched == "final_only" ? PurifySchedule::final_only : PurifySchedule::every_measurement;
    c.solver.trust.initial_radius = get_or(s, "trust_radius", c.solver.trust.initial_radius);
    c.solver.trust.fit_point = get_or(s, "fit_point", c.solver.trust.fit_point);
    c.solver.trust.noise_floor = get_or(s, "noise_floor", c.solver.trust.noise_floor);
  }
  c.solver.validate();

  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    detail::reject_unknown(n, {"p1", "p2", "readout_flip", "shots", "trajectories", "calibration_shots"}, "noise");
    c.exec.shots = get_or<std::int64_t>(n, "shots", 0);
    c.exec.trajectories = get_or(n, "trajectories", 1);
    c.calibration_shots = get_or<std::int64_t>(n, "calibration_shots", 0);
    const double p1 = get_or(n, "p1", 0.0), p2 = get_or(n, "p2", 0.0), flip = get_or(n, "readout_flip", 0.0);
    require(p1 >= 0 && p1 <= 1 && p2 >= 0 && p2 <= 1 && flip >= 0 && flip < 0.5, "noise probabilities out of range",
            "config");
    require(c.exec.shots >= 0 && c.exec.trajectories >= 1, "shots must be >= 0 and trajectories >= 1", "config");
    c.exec.noise.depolarizing_1q = p1;
    c.exec.noise.depolarizing_2q = p2;
    c.exec.noise.readout.clear();
    if (flip > 0) c.exec.noise.readout.assign(1, NoiseModel::symmetric_flip(flip));  // widened once the register is known
  }
  c.exec.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("taper")) {
    const auto& t = j.at("taper");
    if (t.is_boolean()) {
      c.taper = t.get<bool>();
    } else {
      detail::reject_unknown(t, {"enabled", "drop"}, "taper");
      c.taper = get_or(t, "enabled", true);
      c.taper_drop = get_or(t, "drop", 0.0);
      require(c.taper_drop >= 0, "taper.drop must be non-negative", "config");
    }
  }
  if (j.contains("two_sz")) c.two_sz = j.at("two_sz").get<int>();
  if (j.contains("output")) {
    c.output = j.at("output").get<std::string>();
    if (c.output.is_relative() && !base_dir.empty()) c.output = base_dir / c.output;
  }
  c.include_timings = get_or(j, "include_timings", false);
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config " + path.string(), "config");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed JSON: ") + e.what(), "config");
  }
  return parse_run_config(j, path.parent_path());
}

struct RunOutcome {
  nlohmann::json report;
  int exit_code = kExitOk;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(nlohmann::json& timings) : timings_(timings) {}
  template <typename F>
  auto time(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto v = f();
    timings_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
  }

 private:
  nlohmann::json& timings_;
};

}  // namespace detail

/// Executes one run and returns the report. Stage failures are recorded in the report
/// rather than thrown.
inline RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  nlohmann::json& rep = out.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["name"] = cfg.name;
  rep["config"] = cfg.source;
  rep["mitigation"] = cfg.mitigation.label();
  nlohmann::json timings = nlohmann::json::object();
  detail::StageClock clock(timings);
  std::string stage = "ingestion";
  try {
    IntegralSet ints = clock.time("ingestion", [&] { return read_fcidump(cfg.integrals.string()); });
    if (cfg.active_space) {
      stage = "folding";
      ints = clock.time("folding", [&] { return fold_active_space(ints, cfg.active_space->core, cfg.active_space->active); });
    }
    stage = "hamiltonian";
    const ReducedHamiltonian ham = build_reduced_hamiltonian(ints);
    const int two_sz = cfg.two_sz.value_or(ints.ms2);
    rep["system"] = {{"n_orbitals", ints.n_orbitals},
                     {"n_electrons", ints.n_electrons},
                     {"n_spin_orbitals", ham.n()},
                     {"two_sz", two_sz},
                     {"constant", ham.constant}};

    stage = "solve";
    QuantumSetup q;
    q.exec = cfg.exec;
    q.mitigation = cfg.mitigation;
    q.calibration_shots = cfg.calibration_shots;
    q.taper = cfg.taper;
    q.taper_drop = cfg.taper_drop;
    q.two_sz = two_sz;
    if (cfg.taper) {
      stage = "tapering";
      const auto [na, nb] = spin_split(ints.n_electrons, two_sz);
      const auto tt = taper_with_threshold(hamiltonian_pauli(ham), cfg.taper_drop, hartree_fock_bits(ints.n_orbitals, na, nb));
      rep["taper"] = {{"map", to_json(tt.map)},
                      {"discarded_terms", tt.report.discarded_terms},
                      {"discarded_l1", tt.report.discarded_l1},
                      {"drop", tt.report.drop}};
      stage = "solve";
    }
    const int register_qubits = cfg.taper ? rep["taper"]["map"]["n_qubits"].get<int>() -
                                                static_cast<int>(rep["taper"]["map"]["removed"].size())
                                          : ham.n();
    if (q.exec.noise.readout.size() == 1)
      q.exec.noise.readout.assign(static_cast<std::size_t>(register_qubits), q.exec.noise.readout.front());
    const SolveResult res = clock.time("solve", [&] { return solve(ham, cfg.solver, q); });

    rep["iterations"] = nlohmann::json::array();
    for (const auto& r : res.records) rep["iterations"].push_back(to_json(r));
    std::size_t accepted = 0;
    for (const auto& r : res.records) accepted += r.iteration > 0 && r.accepted;
    rep["final"] = {{"energy", res.energy},
                    {"initial_energy", res.initial_energy},
                    {"residual_norm", res.final_residual_norm},
                    {"converged", res.converged},
                    {"iterations", res.records.back().iteration},
                    {"accepted_steps", accepted},
                    {"n_qubits", res.n_qubits}};
    const TwoRDM d2 = symmetrize(res.rdm);
    stage = "report";
    rep["natural_occupations"] = spatial_natural_occupations(contract_to_1rdm(d2, ints.n_electrons), 1e-6);
    rep["gamma_norms"] = res.ledger.norms;
    rep["purification"] = res.purification ? to_json(*res.purification) : nlohmann::json(nullptr);
    rep["audit"] = res.audit;

    if (ham.n() <= kFciSpinOrbitalCap) {
      stage = "fci_reference";
      const auto fci = clock.time("fci_reference", [&] { return fci_reference(ham, ham.n(), two_sz); });
      rep["fci"] = {{"energy", fci.energy}, {"error", res.energy - fci.energy}};
    }
    out.exit_code = res.converged ? kExitOk : kExitNotConverged;
  } catch (const Error& e) {
    rep["error"] = {{"stage", e.stage().empty() ? stage : e.stage()}, {"message", e.what()}};
    out.exit_code = kExitStage;
  } catch (const std::exception& e) {
    rep["error"] = {{"stage", stage}, {"message", e.what()}};
    out.exit_code = kExitStage;
  }
  if (cfg.include_timings) rep["timings"] = timings;
  return out;
}

/// energy.tsv: one row per iteration record.
inline std::string energy_table(const nlohmann::json& report) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "iteration\tenergy\tresidual_norm\tepsilon\taccepted\n";
  for (const auto& r : report.value("iterations", nlohmann::json::array())) {
    os << r.at("iteration").get<int>() << '\t' << r.at("energy").get<double>() << '\t';
    if (r.at("residual_norm").is_null())
      os << "nan";
    else
      os << r.at("residual_norm").get<double>();
    os << '\t' << r.at("epsilon").get<double>() << '\t' << (r.at("accepted").get<bool>() ? 1 : 0) << '\n';
  }
  return os.str();
}

/// occupations.tsv: spatial natural-orbital occupations, largest first.
inline std::string occupation_table(const nlohmann::json& report) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "orbital\toccupation\n";
  int k = 0;
  for (const auto& v : report.value("natural_occupations", nlohmann::json::array())) os << k++ << '\t' << v.get<double>() << '\n';
  return os.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  require(f.good(), "cannot write " + p.string(), "report");
  f << text;
}

inline void emit_plot_data(const nlohmann::json& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "energy.tsv", energy_table(report));
  write_text(dir / "occupations.tsv", occupation_table(report));
}

/// report.json, iterations.jsonl and the plot tables.
inline void write_run_outputs(const nlohmann::json& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", report.dump(2) + "\n");
  std::string lines;
  for (const auto& r : report.value("iterations", nlohmann::json::array())) lines += r.dump() + "\n";
  write_text(dir / "iterations.jsonl", lines);
  if (!report.contains("error")) emit_plot_data(report, dir);
}

/// Relative energies against the first report, in kcal/mol.
inline nlohmann::json compare_reports(const std::vector<nlohmann::json>& reports) {
  require(reports.size() >= 2, "compare needs at least two reports", "compare");
  auto energy = [](const nlohmann::json& r) {
    require(r.contains("final") && !r.contains("error"), "report '" + r.value("name", std::string("?")) + "' has no final energy",
            "compare");
    return r.at("final").at("energy").get<double>();
  };
  const auto& sys0 = reports.front().at("system");
  const double e0 = energy(reports.front());
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) {
    const auto& sys = r.at("system");
    require(sys.at("n_electrons") == sys0.at("n_electrons") && sys.at("n_spin_orbitals") == sys0.at("n_spin_orbitals"),
            "report '" + r.value("name", std::string("?")) + "' has a different active space", "compare");
    const double e = energy(r);
    rows.push_back({{"name", r.value("name", std::string())},
                    {"mitigation", r.value("mitigation", std::string())},
                    {"energy", e},
                    {"relative_kcal_mol", (e - e0) * kKcalPerHartree}});
  }
  return rows;
}

inline std::string comparison_table(const nlohmann::json& rows) {
  std::ostringstream os;
  os << "name\tmitigation\tenergy\trelative_kcal_mol\n";
  for (const auto& r : rows) {
    os << r.at("name").get<std::string>() << '\t' << r.at("mitigation").get<std::string>() << '\t' << std::setprecision(12)
       << r.at("energy").get<double>() << '\t' << std::setprecision(6) << std::fixed << r.at("relative_kcal_mol").get<double>()
       << std::defaultfloat << '\n';
  }
  return os.str();
}

}  // namespace qacse
