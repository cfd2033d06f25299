// Scenario runner and verification harness. Exit codes: 0 when every check
// passes, 1 when any check fails (or a run aborts), 2 on input errors.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "statlens/scenario.hpp"

namespace {

using statlens::Json;

int write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  out << contents;
  return 0;
}

void print_report(const statlens::Report& report, bool quiet) {
  if (!quiet) {
    for (const auto& check : report.checks) {
      std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << "\n";
    }
  }
  std::size_t passed = 0;
  for (const auto& check : report.checks) passed += check.pass ? 1 : 0;
  std::cout << report.scenario_id << ": " << (report.pass ? "PASS" : "FAIL") << " (" << passed
            << "/" << report.checks.size() << " checks, " << report.wall_time_ms << " ms)\n";
}

std::string trace_csv(const Json& trace) {
  std::string csv = "iteration,fitness\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    csv += std::to_string(i) + "," + trace[i].dump() + "\n";
  }
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statlens: compositional Bayesian inference scenario runner"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string trace_path;
  std::string mode_override;
  std::uint64_t seed_override = 0;
  std::uint64_t instances_override = 0;
  bool quiet = false;

  auto* run_cmd = app.add_subcommand("run", "execute a scenario and report per-check pass/fail");
  run_cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run_cmd->add_option("--out", out_path, "write the report JSON to this path");
  run_cmd->add_option("--trace-csv", trace_path,
                      "write the optimizer trace (when the suite produces one) as CSV");
  auto* seed_opt = run_cmd->add_option("--seed", seed_override, "override the scenario seed");
  auto* mode_opt = run_cmd->add_option("--mode", mode_override, "override the numeric mode")
                       ->check(CLI::IsMember({"rational", "float"}));
  auto* inst_opt =
      run_cmd->add_option("--instances", instances_override, "override the instance count");
  run_cmd->add_flag("--quiet", quiet, "suppress per-check lines");

  std::string gen_kind;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  std::vector<std::uint64_t> gen_spaces;
  std::uint64_t gen_instances = 0;
  std::uint64_t gen_heads = 0;
  std::uint64_t gen_flips = 0;

  auto* gen_cmd = app.add_subcommand("generate", "write a deterministic scenario file");
  gen_cmd->add_option("kind", gen_kind, "scenario kind")->required();
  gen_cmd->add_option("--out", gen_out, "output path (default: <kind>.json)");
  gen_cmd->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->add_option("--spaces", gen_spaces, "space sizes for compose-check")->delimiter(',');
  auto* gi = gen_cmd->add_option("--instances", gen_instances, "instance count");
  auto* gh = gen_cmd->add_option("--heads", gen_heads, "observed heads for coin-mle");
  auto* gf = gen_cmd->add_option("--flips", gen_flips, "total flips for coin-mle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run_cmd->parsed()) {
    std::ifstream in(scenario_path);
    if (!in) {
      std::cerr << "error: cannot read " << scenario_path << "\n";
      return 2;
    }
    Json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      std::cerr << "error: " << scenario_path << " is not valid JSON: " << e.what() << "\n";
      return 2;
    }

    statlens::Report report;
    try {
      statlens::Scenario scenario =
          statlens::parse_scenario(j, std::filesystem::path(scenario_path).stem().string());
      if (*seed_opt) scenario.seed = seed_override;
      if (*mode_opt) scenario.mode = mode_override;
      if (*inst_opt) scenario.payload["instances"] = instances_override;
      report = statlens::run_scenario(scenario);
    } catch (const statlens::SchemaError& e) {
      std::cerr << "error: invalid scenario: " << e.what() << "\n";
      return 2;
    } catch (const statlens::Error& e) {
      std::cerr << "error: scenario run failed: " << e.what() << "\n";
      return 1;
    }

    if (!out_path.empty()) {
      if (int rc = write_file(out_path, report.to_json().dump(2) + "\n"); rc != 0) return rc;
    }
    if (!trace_path.empty()) {
      if (!report.summary.contains("trace")) {
        std::cerr << "error: this scenario kind does not produce a trace\n";
        return 2;
      }
      if (int rc = write_file(trace_path, trace_csv(report.summary.at("trace"))); rc != 0) {
        return rc;
      }
    }
    print_report(report, quiet);
    return report.pass ? 0 : 1;
  }

  // generate
  Json params = Json::object();
  if (!gen_spaces.empty()) params["spaces"] = gen_spaces;
  if (*gi) params["instances"] = gen_instances;
  if (*gh) params["heads"] = gen_heads;
  if (*gf) params["flips"] = gen_flips;

  Json scenario_json;
  try {
    scenario_json = statlens::generate_scenario(gen_kind, params, gen_seed);
  } catch (const statlens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const std::string path = gen_out.empty() ? gen_kind + ".json" : gen_out;
  if (int rc = write_file(path, scenario_json.dump(2) + "\n"); rc != 0) return rc;
  std::cout << "wrote " << path << "\n";
  return 0;
}
