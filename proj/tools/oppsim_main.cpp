// Command-line driver: load a scenario file, optionally sweep one axis,
// simulate, compare against the closed forms, and emit a CSV or JSON report.
//
// Exit codes: 0 success; 2 validation error (flags, scenario file, sweep
// grid, closed-form applicability); 3 runtime error (I/O and anything else).

#include "oppsim/runner.hpp"
#include "oppsim/scenario.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Threshold-based opportunistic scheduling: simulation vs closed forms"};
  std::string scenario_path;
  std::string sweep_text;
  std::string format = "csv";
  std::string out_path;
  std::optional<std::uint64_t> slots_flag;
  std::optional<std::uint64_t> seed_flag;
  int threads = 1;
  bool timings = false;

  app.add_option("--scenario", scenario_path, "Scenario file (see README for the grammar)")
      ->required();
  app.add_option("--sweep", sweep_text, "Single-axis sweep: axis=v1,v2,... (k | K | l | scheme)");
  app.add_option("--slots", slots_flag, "Override the scenario's slot count");
  app.add_option("--seed", seed_flag, "Override the scenario's seed");
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", out_path, "Output file (default: stdout)");
  app.add_option("--threads", threads, "Worker threads for the simulation")
      ->check(CLI::Range(1, 1 << 10));
  app.add_flag("--timings", timings,
               "Record wall-clock runtime per record (makes reruns non-identical)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 2;
  }

  try {
    oppsim::scn::Scenario s = oppsim::scn::load_scenario(scenario_path);
    if (slots_flag) s.slots = *slots_flag;
    if (seed_flag) s.seed = *seed_flag;

    const oppsim::run::SweepSpec sweep = oppsim::run::parse_sweep(sweep_text);
    const oppsim::run::RunOptions opts{threads, timings};
    const auto records = oppsim::run::run_sweep(s, sweep, opts);

    const auto fmt = format == "json" ? oppsim::run::ReportFormat::json
                                      : oppsim::run::ReportFormat::csv;
    if (out_path.empty()) {
      std::cout << oppsim::run::render_report(records, fmt);
    } else {
      oppsim::run::emit_report(records, fmt, out_path);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
