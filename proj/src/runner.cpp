#include "oppsim/runner.hpp"

#include "oppsim/evt.hpp"
#include "oppsim/point_process.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oppsim::run {
namespace {

constexpr double kRelErrFloor = 1e-9;

double rel_error(double sim, double analytic) {
  return std::abs(sim - analytic) / std::max(std::abs(analytic), kRelErrFloor);
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

bool gaussian_rule(sim::ThresholdRule r) {
  return r == sim::ThresholdRule::gaussian_exact || r == sim::ThresholdRule::gaussian_series ||
         r == sim::ThresholdRule::gumbel;
}

double exact_mean_exceeders(const sim::ScenarioConfig& cfg, const std::vector<double>& u) {
  double total = 0.0;
  for (std::size_t i = 0; i < cfg.profiles.size(); ++i)
    total += pp::user_rate_exact(u[i], cfg.profiles[i], cfg.K);
  return total / static_cast<double>(cfg.K);
}

double prob_halfwidth(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return 1.96 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

}  // namespace

SweepSpec parse_sweep(const std::string& text) {
  SweepSpec spec;
  if (text.empty()) return spec;
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("sweep: expected axis=v1,v2,..., got \"" + text + "\"");
  const std::string axis = text.substr(0, eq);
  if (axis == "k") spec.axis = SweepAxis::k;
  else if (axis == "K") spec.axis = SweepAxis::K;
  else if (axis == "l") spec.axis = SweepAxis::l;
  else if (axis == "scheme") spec.axis = SweepAxis::scheme;
  else throw std::invalid_argument("sweep: unknown axis \"" + axis + "\" (k | K | l | scheme)");
  std::string rest = text.substr(eq + 1);
  std::istringstream in(rest);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) throw std::invalid_argument("sweep: empty value in \"" + text + "\"");
    spec.values.push_back(tok);
  }
  if (spec.values.empty())
    throw std::invalid_argument("sweep: axis \"" + axis + "\" needs at least one value");
  return spec;
}

an::AnalyticReport analytic_for(const sim::ScenarioConfig& cfg) {
  const std::vector<double> thresholds = sim::resolve_thresholds(cfg);
  switch (cfg.scheme) {
    case sim::Scheme::baseline: {
      if (cfg.threshold_rule == sim::ThresholdRule::per_user_qos)
        return an::capacity_qos(cfg.profiles);
      return an::capacity_thresholds(thresholds, cfg.profiles);
    }
    case sim::Scheme::capture: {
      for (double u : thresholds)
        if (u != thresholds[0])
          throw std::invalid_argument(
              "capture closed form requires a common threshold (explicit, rate_target, or "
              "homogeneous profiles)");
      return an::capacity_capture(thresholds[0], cfg.profiles);
    }
    case sim::Scheme::enhanced: {
      const pp::UserProfile& p0 = cfg.profiles.front();
      for (const auto& p : cfg.profiles)
        if (p.mu != p0.mu || p.sigma != p0.sigma)
          throw std::invalid_argument("enhanced closed form requires homogeneous profiles");
      double k_eff = cfg.k_target;
      if (cfg.threshold_rule != sim::ThresholdRule::gaussian_exact) {
        const double z = (thresholds[0] - p0.mu) / p0.sigma;
        k_eff = static_cast<double>(cfg.K) * evt::normal_survival(z);
      }
      return an::enhanced_report(cfg.K, k_eff, cfg.l, p0.mu, p0.sigma);
    }
  }
  throw std::logic_error("unreachable scheme");
}

ResultRecord run_one(const scn::Scenario& s, const RunOptions& opts) {
  if (opts.threads < 1) throw std::invalid_argument("threads must be >= 1");
  sim::ScenarioConfig cfg = scn::resolve(s);
  cfg.threads = opts.threads;
  const an::AnalyticReport an_rep = analytic_for(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const sim::SimStats st = sim::run_scenario(cfg);
  const auto t1 = std::chrono::steady_clock::now();

  ResultRecord r;
  r.scenario_id = s.id;
  r.scheme = scn::scheme_name(cfg.scheme);
  r.K = cfg.K;
  r.k = gaussian_rule(cfg.threshold_rule)
            ? cfg.k_target
            : exact_mean_exceeders(cfg, sim::resolve_thresholds(cfg));
  r.l = cfg.l;
  r.threshold_rule = scn::rule_name(cfg.threshold_rule);

  r.analytic_capacity = an_rep.expected_capacity;
  r.analytic_p_idle = an_rep.p_idle;
  r.analytic_p_collision = an_rep.p_collision;
  r.analytic_p_utilized = an_rep.p_utilized;
  r.analytic_delay_minislots = an_rep.expected_delay_minislots;

  r.sim_capacity = st.mean_capacity();
  r.sim_capacity_halfwidth = st.mean_capacity_halfwidth();
  r.sim_p_idle = st.p_idle();
  r.sim_p_idle_halfwidth = prob_halfwidth(r.sim_p_idle, st.n_slots);
  r.sim_p_collision = st.p_collision();
  r.sim_p_collision_halfwidth = prob_halfwidth(r.sim_p_collision, st.n_slots);
  r.sim_p_utilized = st.p_utilized();
  r.sim_p_utilized_halfwidth = prob_halfwidth(r.sim_p_utilized, st.n_slots);
  if (st.delay_slots > 0) {
    const double n = static_cast<double>(st.delay_slots);
    const double mean = static_cast<double>(st.delay_sum) / n;
    double m2 = 0.0;
    for (std::size_t j = 0; j < st.delay_hist.size(); ++j) {
      const double d = static_cast<double>(j) - mean;
      m2 += d * d * static_cast<double>(st.delay_hist[j]);
    }
    r.sim_delay_minislots = mean;
    r.sim_delay_halfwidth = 1.96 * std::sqrt(m2 / n / n);
  }

  r.rel_err_capacity = rel_error(r.sim_capacity, r.analytic_capacity);
  r.rel_err_p_idle = rel_error(r.sim_p_idle, r.analytic_p_idle);
  r.rel_err_p_collision = rel_error(r.sim_p_collision, r.analytic_p_collision);
  r.rel_err_p_utilized = rel_error(r.sim_p_utilized, r.analytic_p_utilized);
  if (r.sim_delay_minislots && r.analytic_delay_minislots)
    r.rel_err_delay = rel_error(*r.sim_delay_minislots, *r.analytic_delay_minislots);

  if (opts.timings)
    r.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.seed = cfg.seed;
  return r;
}

namespace {

std::vector<scn::Scenario> expand_grid(const scn::Scenario& base, const SweepSpec& sweep) {
  std::vector<scn::Scenario> grid;
  if (sweep.axis == SweepAxis::none) {
    grid.push_back(base);
    return grid;
  }
  for (const std::string& tok : sweep.values) {
    scn::Scenario pt = base;
    switch (sweep.axis) {
      case SweepAxis::k: {
        if (!gaussian_rule(base.rule) || base.rate_target)
          throw std::invalid_argument("k sweep requires a gaussian threshold rule");
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size() || !(v > 0) || !std::isfinite(v))
          throw std::invalid_argument("k sweep: invalid value \"" + tok + "\"");
        pt.k_target = v;
        break;
      }
      case SweepAxis::K: {
        if (base.mode == scn::ProfileMode::list)
          throw std::invalid_argument("K sweep requires homogeneous or generator profiles");
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(tok, &pos);
        if (pos != tok.size() || v == 0)
          throw std::invalid_argument("K sweep: invalid value \"" + tok + "\"");
        pt.K = v;
        break;
      }
      case SweepAxis::l: {
        if (base.scheme != sim::Scheme::enhanced)
          throw std::invalid_argument("l sweep requires scheme=enhanced");
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(tok, &pos);
        if (pos != tok.size() || v == 0)
          throw std::invalid_argument("l sweep: invalid value \"" + tok + "\"");
        pt.l = v;
        break;
      }
      case SweepAxis::scheme: {
        const sim::Scheme sch = scn::scheme_from_name(tok);
        if (sch == sim::Scheme::enhanced && base.l == 0)
          throw std::invalid_argument("scheme sweep including enhanced requires l in the scenario");
        pt.scheme = sch;
        if (sch != sim::Scheme::enhanced) pt.l = 0;
        break;
      }
      case SweepAxis::none: break;
    }
    grid.push_back(std::move(pt));
  }
  return grid;
}

}  // namespace

std::vector<ResultRecord> run_sweep(const scn::Scenario& s, const SweepSpec& sweep,
                                    const RunOptions& opts) {
  const std::vector<scn::Scenario> grid = expand_grid(s, sweep);
  // Fail fast: surface every config or closed-form error before simulating.
  for (const scn::Scenario& pt : grid) {
    const sim::ScenarioConfig cfg = scn::resolve(pt);
    (void)analytic_for(cfg);
  }
  std::vector<ResultRecord> records;
  records.reserve(grid.size());
  for (const scn::Scenario& pt : grid) records.push_back(run_one(pt, opts));
  return records;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "scenario_id", "scheme", "K", "k", "l", "threshold_rule",
      "analytic_capacity", "analytic_p_idle", "analytic_p_collision", "analytic_p_utilized",
      "analytic_delay_minislots",
      "sim_capacity", "sim_capacity_halfwidth",
      "sim_p_idle", "sim_p_idle_halfwidth",
      "sim_p_collision", "sim_p_collision_halfwidth",
      "sim_p_utilized", "sim_p_utilized_halfwidth",
      "sim_delay_minislots", "sim_delay_halfwidth",
      "rel_err_capacity", "rel_err_p_idle", "rel_err_p_collision", "rel_err_p_utilized",
      "rel_err_delay",
      "runtime_seconds", "seed"};
  return cols;
}

namespace {

std::string opt_cell(const std::optional<double>& v) { return v ? fmt12(*v) : std::string(); }

void append_json_value(std::string& out, const std::string& column, const ResultRecord& r) {
  const auto str = [&](const std::string& s) { out += '"' + s + '"'; };
  const auto num = [&](double v) { out += fmt12(v); };
  const auto opt = [&](const std::optional<double>& v) {
    if (v) num(*v);
    else out += "null";
  };
  if (column == "scenario_id") str(r.scenario_id);
  else if (column == "scheme") str(r.scheme);
  else if (column == "K") out += std::to_string(r.K);
  else if (column == "k") num(r.k);
  else if (column == "l") out += std::to_string(r.l);
  else if (column == "threshold_rule") str(r.threshold_rule);
  else if (column == "analytic_capacity") num(r.analytic_capacity);
  else if (column == "analytic_p_idle") num(r.analytic_p_idle);
  else if (column == "analytic_p_collision") num(r.analytic_p_collision);
  else if (column == "analytic_p_utilized") num(r.analytic_p_utilized);
  else if (column == "analytic_delay_minislots") opt(r.analytic_delay_minislots);
  else if (column == "sim_capacity") num(r.sim_capacity);
  else if (column == "sim_capacity_halfwidth") num(r.sim_capacity_halfwidth);
  else if (column == "sim_p_idle") num(r.sim_p_idle);
  else if (column == "sim_p_idle_halfwidth") num(r.sim_p_idle_halfwidth);
  else if (column == "sim_p_collision") num(r.sim_p_collision);
  else if (column == "sim_p_collision_halfwidth") num(r.sim_p_collision_halfwidth);
  else if (column == "sim_p_utilized") num(r.sim_p_utilized);
  else if (column == "sim_p_utilized_halfwidth") num(r.sim_p_utilized_halfwidth);
  else if (column == "sim_delay_minislots") opt(r.sim_delay_minislots);
  else if (column == "sim_delay_halfwidth") opt(r.sim_delay_halfwidth);
  else if (column == "rel_err_capacity") num(r.rel_err_capacity);
  else if (column == "rel_err_p_idle") num(r.rel_err_p_idle);
  else if (column == "rel_err_p_collision") num(r.rel_err_p_collision);
  else if (column == "rel_err_p_utilized") num(r.rel_err_p_utilized);
  else if (column == "rel_err_delay") opt(r.rel_err_delay);
  else if (column == "runtime_seconds") num(r.runtime_seconds);
  else if (column == "seed") out += std::to_string(r.seed);
  else throw std::logic_error("unknown report column: " + column);
}

std::string csv_cell(const std::string& column, const ResultRecord& r) {
  if (column == "scenario_id") return r.scenario_id;
  if (column == "scheme") return r.scheme;
  if (column == "K") return std::to_string(r.K);
  if (column == "k") return fmt12(r.k);
  if (column == "l") return std::to_string(r.l);
  if (column == "threshold_rule") return r.threshold_rule;
  if (column == "analytic_delay_minislots") return opt_cell(r.analytic_delay_minislots);
  if (column == "sim_delay_minislots") return opt_cell(r.sim_delay_minislots);
  if (column == "sim_delay_halfwidth") return opt_cell(r.sim_delay_halfwidth);
  if (column == "rel_err_delay") return opt_cell(r.rel_err_delay);
  if (column == "seed") return std::to_string(r.seed);
  std::string json;
  append_json_value(json, column, r);  // plain numbers share the JSON rendering
  return json;
}

}  // namespace

std::string render_report(const std::vector<ResultRecord>& records, ReportFormat fmt) {
  if (records.empty()) throw std::invalid_argument("report: no records");
  const auto& cols = report_columns();
  std::string out;
  if (fmt == ReportFormat::csv) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ',';
      out += cols[c];
    }
    out += '\n';
    for (const auto& r : records) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out += ',';
        out += csv_cell(cols[c], r);
      }
      out += '\n';
    }
    return out;
  }
  out += "[\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out += "  {";
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ", ";
      out += '"' + cols[c] + "\": ";
      append_json_value(out, cols[c], records[i]);
    }
    out += i + 1 < records.size() ? "},\n" : "}\n";
  }
  out += "]\n";
  return out;
}

void emit_report(const std::vector<ResultRecord>& records, ReportFormat fmt,
                 const std::string& out_path) {
  const std::string text = render_report(records, fmt);  // build fully before touching the file
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write output file: " + out_path);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + out_path);
}

std::vector<ResultRecord> parse_report_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (!doc.is_array()) throw std::invalid_argument("report JSON: expected an array");
  std::vector<ResultRecord> records;
  records.reserve(doc.size());
  for (const auto& obj : doc) {
    ResultRecord r;
    r.scenario_id = obj.at("scenario_id").get<std::string>();
    r.scheme = obj.at("scheme").get<std::string>();
    r.K = obj.at("K").get<std::uint64_t>();
    r.k = obj.at("k").get<double>();
    r.l = obj.at("l").get<std::uint64_t>();
    r.threshold_rule = obj.at("threshold_rule").get<std::string>();
    const auto opt = [&](const char* key) -> std::optional<double> {
      const auto& v = obj.at(key);
      if (v.is_null()) return std::nullopt;
      return v.get<double>();
    };
    r.analytic_capacity = obj.at("analytic_capacity").get<double>();
    r.analytic_p_idle = obj.at("analytic_p_idle").get<double>();
    r.analytic_p_collision = obj.at("analytic_p_collision").get<double>();
    r.analytic_p_utilized = obj.at("analytic_p_utilized").get<double>();
    r.analytic_delay_minislots = opt("analytic_delay_minislots");
    r.sim_capacity = obj.at("sim_capacity").get<double>();
    r.sim_capacity_halfwidth = obj.at("sim_capacity_halfwidth").get<double>();
    r.sim_p_idle = obj.at("sim_p_idle").get<double>();
    r.sim_p_idle_halfwidth = obj.at("sim_p_idle_halfwidth").get<double>();
    r.sim_p_collision = obj.at("sim_p_collision").get<double>();
    r.sim_p_collision_halfwidth = obj.at("sim_p_collision_halfwidth").get<double>();
    r.sim_p_utilized = obj.at("sim_p_utilized").get<double>();
    r.sim_p_utilized_halfwidth = obj.at("sim_p_utilized_halfwidth").get<double>();
    r.sim_delay_minislots = opt("sim_delay_minislots");
    r.sim_delay_halfwidth = opt("sim_delay_halfwidth");
    r.rel_err_capacity = obj.at("rel_err_capacity").get<double>();
    r.rel_err_p_idle = obj.at("rel_err_p_idle").get<double>();
    r.rel_err_p_collision = obj.at("rel_err_p_collision").get<double>();
    r.rel_err_p_utilized = obj.at("rel_err_p_utilized").get<double>();
    r.rel_err_delay = opt("rel_err_delay");
    r.runtime_seconds = obj.at("runtime_seconds").get<double>();
    r.seed = obj.at("seed").get<std::uint64_t>();
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace oppsim::run
