#pragma once

// Sweep orchestration and report emission: runs scenarios, pairs every
// simulated statistic with its closed-form prediction, and renders the table
// as CSV or JSON with deterministic bytes.

#include "oppsim/analytic.hpp"
#include "oppsim/scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oppsim::run {

struct ResultRecord {
  std::string scenario_id;
  std::string scheme;
  std::uint64_t K = 0;
  // Configured k for the gaussian rules; for explicit/tuned/per-user rules the
  // exact mean number of exceeders per slot implied by the thresholds.
  double k = 0.0;
  std::uint64_t l = 0;
  std::string threshold_rule;

  double analytic_capacity = 0.0;
  double analytic_p_idle = 0.0;
  double analytic_p_collision = 0.0;
  double analytic_p_utilized = 0.0;
  std::optional<double> analytic_delay_minislots;  // enhanced only

  double sim_capacity = 0.0;
  double sim_capacity_halfwidth = 0.0;
  double sim_p_idle = 0.0;
  double sim_p_idle_halfwidth = 0.0;
  double sim_p_collision = 0.0;
  double sim_p_collision_halfwidth = 0.0;
  double sim_p_utilized = 0.0;
  double sim_p_utilized_halfwidth = 0.0;
  std::optional<double> sim_delay_minislots;  // enhanced, non-idle slots seen
  std::optional<double> sim_delay_halfwidth;

  double rel_err_capacity = 0.0;
  double rel_err_p_idle = 0.0;
  double rel_err_p_collision = 0.0;
  double rel_err_p_utilized = 0.0;
  std::optional<double> rel_err_delay;

  // 0 unless timings were requested: wall-clock time would break the
  // byte-identical rerun guarantee, so it is opt-in.
  double runtime_seconds = 0.0;
  std::uint64_t seed = 0;
};

struct RunOptions {
  int threads = 1;
  bool timings = false;
};

enum class SweepAxis { none, k, K, l, scheme };

struct SweepSpec {
  SweepAxis axis = SweepAxis::none;
  std::vector<std::string> values;
};

// Parse "axis=v1,v2,..." with axis in {k, K, l, scheme}. Empty text means no
// sweep. Values are validated per axis inside run_sweep.
SweepSpec parse_sweep(const std::string& text);

// Closed-form predictions for a resolved scenario. Throws
// std::invalid_argument when no closed form applies (capture needs a common
// threshold; enhanced needs homogeneous profiles).
an::AnalyticReport analytic_for(const sim::ScenarioConfig& cfg);

ResultRecord run_one(const scn::Scenario& s, const RunOptions& opts);

// One record per grid point, in axis order; an empty sweep runs the base
// scenario once. Every grid point is validated (config and analytic
// applicability) before the first simulation starts.
std::vector<ResultRecord> run_sweep(const scn::Scenario& s, const SweepSpec& sweep,
                                    const RunOptions& opts);

enum class ReportFormat { csv, json };

// Stable CSV column order; JSON objects use the same names as keys.
const std::vector<std::string>& report_columns();

// Render the full report. Numbers carry 12 significant digits; absent values
// are empty CSV cells / JSON nulls. Identical records give identical bytes.
std::string render_report(const std::vector<ResultRecord>& records, ReportFormat fmt);

// Render, then write in one shot (no partial files). Throws
// std::invalid_argument on empty records, std::runtime_error on I/O failure.
void emit_report(const std::vector<ResultRecord>& records, ReportFormat fmt,
                 const std::string& out_path);

// Inverse of render_report(..., json), used for round-trip validation.
std::vector<ResultRecord> parse_report_json(const std::string& text);

}  // namespace oppsim::run
