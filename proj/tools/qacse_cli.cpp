#include <iostream>

#include <CLI11.hpp>

#include "qacse/runner/runner.hpp"

namespace {

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  qacse::require(in.good(), "cannot open " + p.string(), "config");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw qacse::Error(p.string() + ": " + e.what(), "config");
  }
}

int do_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& output, bool timings) {
  qacse::RunConfig cfg;
  try {
    cfg = qacse::load_run_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return qacse::kExitConfig;
  }
  if (seed) {
    cfg.exec.seed = *seed;
    cfg.source["seed"] = *seed;
  }
  if (!output.empty()) cfg.output = output;
  if (timings) cfg.include_timings = true;

  const auto out = qacse::run(cfg);
  try {
    qacse::write_run_outputs(out.report, cfg.output);
  } catch (const std::exception& e) {
    std::cerr << "report error: " << e.what() << '\n';
    return qacse::kExitStage;
  }
  if (out.report.contains("error")) {
    std::cerr << "stage " << out.report["error"]["stage"].get<std::string>() << " failed: "
              << out.report["error"]["message"].get<std::string>() << '\n';
  } else {
    const auto& f = out.report["final"];
    std::cout << std::setprecision(10) << cfg.name << " [" << out.report["mitigation"].get<std::string>()
              << "] E = " << f["energy"].get<double>() << " after " << f["iterations"].get<int>() << " iterations";
    if (out.report.contains("fci")) std::cout << " (FCI error " << out.report["fci"]["error"].get<double>() << ")";
    std::cout << '\n';
    if (out.exit_code == qacse::kExitNotConverged) std::cerr << "warning: residual did not reach the threshold\n";
  }
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contracted Schrodinger equation solver on a simulated quantum device"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "solve one system from a JSON config");
  std::string config_path, output;
  std::optional<std::uint64_t> seed;
  bool timings = false;
  run->add_option("-c,--config", config_path, "run config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("-o,--output", output, "output directory");
  run->add_flag("--timings", timings, "include stage timings in the report");

  auto* compare = app.add_subcommand("compare", "relative energies (kcal/mol) against the first report");
  std::vector<std::string> reports;
  std::string compare_out;
  compare->add_option("reports", reports, "report.json files")->required()->check(CLI::ExistingFile);
  compare->add_option("-o,--output", compare_out, "also write the table as JSON here");

  auto* plot = app.add_subcommand("plot-data", "write energy.tsv and occupations.tsv from a report");
  std::string report_path, plot_dir;
  plot->add_option("report", report_path, "report.json")->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--output", plot_dir, "output directory (default: next to the report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qacse::kExitConfig;
  }

  try {
    if (*run) return do_run(config_path, seed, output, timings);
    if (*compare) {
      std::vector<nlohmann::json> js;
      for (const auto& p : reports) js.push_back(read_json(p));
      const auto rows = qacse::compare_reports(js);
      std::cout << qacse::comparison_table(rows);
      if (!compare_out.empty()) qacse::write_text(compare_out, rows.dump(2) + "\n");
      return qacse::kExitOk;
    }
    if (*plot) {
      const auto rep = read_json(report_path);
      const std::filesystem::path dir = plot_dir.empty() ? std::filesystem::path(report_path).parent_path() : std::filesystem::path(plot_dir);
      qacse::emit_plot_data(rep, dir.empty() ? std::filesystem::path(".") : dir);
      return qacse::kExitOk;
    }
  } catch (const qacse::Error& e) {
    std::cerr << e.what() << '\n';
    return e.stage() == "config" ? qacse::kExitConfig : qacse::kExitStage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return qacse::kExitStage;
  }
  return qacse::kExitOk;
}
