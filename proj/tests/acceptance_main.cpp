// Acceptance harness: each invocation checks one numbered criterion and
// prints exactly one line
//     ANN <name>: PASS|FAIL (measured ...)
// exiting 0 on pass and 1 on fail.  Criteria 4, 5 and 9 are expected to fail:
// they pin known, documented gaps between the closed-form approximations and
// the simulated system (see README, "Known-red acceptance checks").

#include "oppsim/analytic.hpp"
#include "oppsim/evt.hpp"
#include "oppsim/kernels.hpp"
#include "oppsim/mimo.hpp"
#include "oppsim/point_process.hpp"
#include "oppsim/runner.hpp"
#include "oppsim/scenario.hpp"
#include "oppsim/simulator.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace oppsim;

namespace {

struct Ctx {
  std::string bin;
  std::string scenario_dir;
  std::string work_dir;
};

double rel(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-9);
}

class Timer {
 public:
  Timer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

run::ResultRecord run_scenario_file(const Ctx& ctx, const std::string& file) {
  const scn::Scenario s = scn::load_scenario(ctx.scenario_dir + "/" + file);
  return run::run_one(s, {1, false});
}

int report(int num, const std::string& name, bool pass, const std::string& measured) {
  std::printf("A%02d %s: %s (%s)\n", num, name.c_str(), pass ? "PASS" : "FAIL", measured.c_str());
  return pass ? 0 : 1;
}

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
int criterion01(const Ctx& ctx) {
  Timer t;
  const auto rec = run_scenario_file(ctx, "homogeneous_k1.scn");
  const double secs = t.seconds();
  const double inv_e = std::exp(-1.0);
  const double d_util = std::abs(rec.sim_p_utilized - inv_e);
  const double d_idle = std::abs(rec.sim_p_idle - inv_e);
  const bool pass = d_util <= 0.01 && d_idle <= 0.01 && secs < 10.0;
  return report(1, "homogeneous-throughput", pass,
                fmt("p_utilized=%.6f p_idle=%.6f vs 1/e=%.6f, max dev %.4g <= 0.01, "
                    "runtime %.2fs < 10s",
                    rec.sim_p_utilized, rec.sim_p_idle, inv_e, std::max(d_util, d_idle), secs));
}

// ---------------------------------------------------------------- criterion 2
int criterion02(const Ctx& ctx) {
  const auto rec = run_scenario_file(ctx, "homogeneous_k1.scn");
  const bool cap_ok = rec.rel_err_capacity <= 0.02;

  scn::Scenario s = scn::load_scenario(ctx.scenario_dir + "/homogeneous_k1.scn");
  s.slots = 20000;  // the sweep checks curve shape, not tight tolerances
  const auto recs = run::run_sweep(s, run::parse_sweep("k=1,2,3,4,5,6,7,8,9,10"), {1, false});
  bool shape_ok = true;
  std::size_t sim_argmax = 0;
  for (std::size_t j = 1; j < recs.size(); ++j) {
    if (recs[j].analytic_capacity >= recs[0].analytic_capacity) shape_ok = false;
    if (j + 1 < recs.size() && recs[j + 1].analytic_capacity >= recs[j].analytic_capacity)
      shape_ok = false;  // monotone decline for k >= 2
    if (recs[j].sim_capacity > recs[sim_argmax].sim_capacity) sim_argmax = j;
  }
  const bool pass = cap_ok && shape_ok && sim_argmax == 0;
  return report(2, "homogeneous-capacity-and-sweep", pass,
                fmt("capacity rel err %.4f <= 0.02, analytic sweep max at k=%d with monotone "
                    "decline=%s, simulated max at k=%d",
                    rec.rel_err_capacity, 1, shape_ok ? "yes" : "no", int(sim_argmax) + 1));
}

// ---------------------------------------------------------------- criterion 3
int criterion03(const Ctx& ctx) {
  Timer t;
  const auto rec = run_scenario_file(ctx, "heterogeneous_rate1.scn");
  const double secs = t.seconds();
  // Homogeneous reference populations at their own unit-rate thresholds: one
  // made of the average user, one of the single strongest user.
  const auto profiles = sim::generate_profiles(1000, 6);
  double mu_bar = 0.0, sigma_bar = 0.0;
  double strongest = 0.0;
  for (const auto& p : profiles) {
    mu_bar += p.mu / 1000.0;
    sigma_bar += p.sigma / 1000.0;
    strongest = std::max(
        strongest, an::capacity_homogeneous(1000, 1.0, p.mu, p.sigma).expected_capacity);
  }
  const double mean_user =
      an::capacity_homogeneous(1000, 1.0, mu_bar, sigma_bar).expected_capacity;
  const bool between = rec.sim_capacity > mean_user && rec.sim_capacity < strongest;
  const bool pass = rec.rel_err_capacity <= 0.03 && between && secs < 60.0;
  return report(3, "heterogeneous-capacity", pass,
                fmt("rel err %.4f <= 0.03, sim %.4f in (mean-user %.4f, strongest-user %.4f), "
                    "runtime %.1fs < 60s",
                    rec.rel_err_capacity, rec.sim_capacity, mean_user, strongest, secs));
}

// ---------------------------------------------------------------- criterion 4
int criterion04(const Ctx& ctx) {
  const auto hetero = run_scenario_file(ctx, "capture_hetero.scn");
  const bool hetero_ok = hetero.rel_err_capacity <= 0.03;

  scn::Scenario cap = scn::load_scenario(ctx.scenario_dir + "/capture_hom_sweep.scn");
  scn::Scenario base = cap;
  base.scheme = sim::Scheme::baseline;
  const auto sweep = run::parse_sweep("k=0.5,1,1.5,2,3");
  const auto cap_recs = run::run_sweep(cap, sweep, {1, false});
  const auto base_recs = run::run_sweep(base, sweep, {1, false});
  bool hom_tol_ok = true, dominance_ok = true;
  double worst_hom = 0.0;
  for (std::size_t j = 0; j < cap_recs.size(); ++j) {
    worst_hom = std::max(worst_hom, cap_recs[j].rel_err_capacity);
    if (cap_recs[j].rel_err_capacity > 0.03) hom_tol_ok = false;
    if (cap_recs[j].sim_capacity < base_recs[j].sim_capacity) dominance_ok = false;
    if (cap_recs[j].analytic_capacity < base_recs[j].analytic_capacity) dominance_ok = false;
  }
  // Optimal threshold under capture sits below the baseline's (higher k).
  const std::vector<pp::UserProfile> hom(1000, pp::UserProfile{0.0, 1.0, {}});
  double best_k = 0.0, best_c = -1.0;
  for (double k = 0.25; k <= 4.0 + 1e-12; k += 0.01) {
    const double u = evt::threshold_gaussian(1000, k, 0.0, 1.0);
    const double c = an::capacity_capture(u, hom).expected_capacity;
    if (c > best_c) {
      best_c = c;
      best_k = k;
    }
  }
  const bool argmax_ok = best_k > 1.0;
  const bool pass = hetero_ok && hom_tol_ok && dominance_ok && argmax_ok;
  return report(4, "capture-effect", pass,
                fmt("hetero rel err %.4f vs 0.03 (known red), hom sweep worst %.4f <= 0.03, "
                    "capture>=baseline pointwise=%s, analytic optimum k=%.2f > 1",
                    hetero.rel_err_capacity, worst_hom, dominance_ok ? "yes" : "no", best_k));
}

// ---------------------------------------------------------------- criterion 5
int criterion05(const Ctx& ctx) {
  const auto rec = run_scenario_file(ctx, "enhanced_k7.scn");
  const double d_idle = std::abs(rec.sim_p_idle - 0.001);
  const bool idle_ok = d_idle <= 3e-3;
  const double winner_mean = rec.sim_capacity / rec.sim_p_utilized;
  const double emax = evt::expected_max(1000, 0.0, 1.0);
  const double cap_rel = rel(winner_mean, emax);
  const bool cap_ok = cap_rel <= 0.05;
  const bool util_ok = rec.rel_err_p_utilized <= 0.01;
  const bool delay_ok = rec.rel_err_delay && *rec.rel_err_delay <= 0.02;
  const bool pass = idle_ok && cap_ok && util_ok && delay_ok;
  return report(5, "enhanced-scheme", pass,
                fmt("p_idle dev %.2e <= 3e-3, winner capacity rel %.4f <= 0.05, utilized-prob "
                    "rel %.4f vs 0.01 (known red), delay rel %.4f vs 0.02 (known red)",
                    d_idle, cap_rel, rec.rel_err_p_utilized,
                    rec.rel_err_delay ? *rec.rel_err_delay : -1.0));
}

// ---------------------------------------------------------------- criterion 6
int criterion06(const Ctx&) {
  // Excesses above the one-in-10^8 threshold, where the exponential tail law
  // holds tightest; 10^4 conditional draws.
  const pp::UserProfile prof{0.0, 1.0, {}};
  const std::uint64_t K = 100000000ULL;
  const double u = evt::threshold_gaussian(K, 1.0, 0.0, 1.0);
  const double scale = evt::norm_constants(K, 0.0, 1.0).a;
  auto xs = sim::sample_excesses_conditional(prof, u, 10000, 42);
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = -std::expm1(-xs[i] / scale);
    ks = std::max(ks, std::max(std::abs((i + 1) / n - F), std::abs(F - i / n)));
  }
  const bool pass = ks <= 0.02;
  return report(6, "exponential-tail-law", pass,
                fmt("Kolmogorov distance %.5f <= 0.02 at 10^4 excesses above u=%.4f", ks, u));
}

// ---------------------------------------------------------------- criterion 7
int criterion07(const Ctx&) {
  // 50-digit reference values for the (1 - 1/K) Gaussian quantile.
  struct Oracle {
    std::uint64_t K;
    double u;
  };
  const Oracle oracles[] = {{100, 2.3263478740408408},
                            {1000, 3.0902323061678135},
                            {10000, 3.7190164854556804},
                            {1000000, 4.753424308822899}};
  double worst_quantile = 0.0;
  for (const auto& o : oracles)
    worst_quantile =
        std::max(worst_quantile, std::abs(evt::threshold_gaussian(o.K, 1.0, 0.0, 1.0) - o.u));
  const bool quant_ok = worst_quantile <= 1e-8;

  double worst_series = 0.0;
  for (std::uint64_t K : {1000ULL, 10000ULL, 1000000ULL, 100000000ULL})
    worst_series = std::max(worst_series, rel(evt::threshold_gaussian_series(K, 1.0, 0.0, 1.0),
                                              evt::threshold_gaussian(K, 1.0, 0.0, 1.0)));
  const bool series_ok = worst_series <= 0.005;

  const double ratio = evt::threshold_gumbel(100000000ULL, 1.0, 0.0, 1.0) /
                       evt::threshold_gaussian(100000000ULL, 1.0, 0.0, 1.0);
  const double limit = 3.0 / (2.0 * std::sqrt(2.0));
  const bool ratio_ok = std::abs(ratio - limit) <= 0.03;

  const bool pass = quant_ok && series_ok && ratio_ok;
  return report(7, "threshold-estimators", pass,
                fmt("quantile worst |err| %.2e <= 1e-8, series worst rel %.4f <= 0.005, "
                    "gumbel/gaussian ratio %.4f within 0.03 of %.4f",
                    worst_quantile, worst_series, ratio, limit));
}

// ---------------------------------------------------------------- criterion 8
namespace brute {

struct Buckets {
  // count[m][j][s]: number of bin assignments with m exceeders, lowest
  // occupied bin j (1-based; j=0 for none), s=1 when that bin holds exactly
  // one user.
  std::vector<std::vector<std::array<double, 2>>> count;
};

Buckets enumerate(std::uint64_t K, std::uint64_t l) {
  Buckets b;
  b.count.assign(K + 1, std::vector<std::array<double, 2>>(l + 1, {0.0, 0.0}));
  std::vector<std::uint64_t> state(K, 0);  // 0 = below threshold, 1..l = bin
  while (true) {
    std::uint64_t m = 0, minbin = 0, occupants = 0;
    for (std::uint64_t i = 0; i < K; ++i) {
      if (state[i] == 0) continue;
      ++m;
      if (minbin == 0 || state[i] < minbin) {
        minbin = state[i];
        occupants = 1;
      } else if (state[i] == minbin) {
        ++occupants;
      }
    }
    b.count[m][minbin][occupants == 1 ? 1 : 0] += 1.0;
    std::uint64_t pos = 0;
    while (pos < K && state[pos] == l) state[pos++] = 0;
    if (pos == K) break;
    ++state[pos];
  }
  return b;
}

}  // namespace brute

int criterion08(const Ctx&) {
  // Grid: every half-integer k inside the closed forms' declared domain
  // 0 < k < K with K >= 2 (K = 1 and k = K are degenerate: exceedance is
  // Binomial(K, k/K) so q = 1 or a single user leave nothing to scan).
  double worst_util = 0.0, worst_pmf = 0.0;
  for (std::uint64_t K = 2; K <= 8; ++K) {
    for (std::uint64_t l = 1; l <= 5; ++l) {
      const brute::Buckets b = brute::enumerate(K, l);
      for (double k = 0.5; k < static_cast<double>(K) - 0.25; k += 0.5) {
        const double q = k / static_cast<double>(K);
        const double per_bin = q / static_cast<double>(l);
        // Weight of one assignment with m exceeders.
        std::vector<double> w(K + 1);
        for (std::uint64_t m = 0; m <= K; ++m)
          w[m] = std::pow(1.0 - q, double(K - m)) * std::pow(per_bin, double(m));
        double util = 0.0;
        std::vector<double> pmf(l, 0.0);
        for (std::uint64_t m = 1; m <= K; ++m) {
          for (std::uint64_t j = 1; j <= l; ++j) {
            const double mass = (b.count[m][j][0] + b.count[m][j][1]) * w[m];
            pmf[j - 1] += mass;
            util += b.count[m][j][1] * w[m];
          }
        }
        worst_util = std::max(worst_util,
                              std::abs(util - an::enhanced_utilized_prob(K, k, l)));
        const auto stats = an::expected_max_bin(K, k, l);
        for (std::uint64_t j = 0; j < l; ++j)
          worst_pmf = std::max(worst_pmf, std::abs(pmf[j] - stats.pmf[j]));
      }
    }
  }
  const bool exhaustive_ok = worst_util <= 1e-10 && worst_pmf <= 1e-10;

  // Random (k, l) pairs: the closed-form collision-free probability never
  // exceeds its Jensen bound.
  const auto& kk = kern::kernels();
  std::vector<std::uint64_t> lat(2000);
  kk.fill_lattice(0xACCE97, 0, StreamTag::capacity, 0, 1000, lat.data());
  bool bound_ok = true;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t k =
        1 + static_cast<std::uint64_t>(kern::uniform_from_lattice(lat[2 * i]) * 12.0);
    const std::uint64_t l =
        1 + static_cast<std::uint64_t>(kern::uniform_from_lattice(lat[2 * i + 1]) * 100.0);
    const auto cf = an::collision_free_bound(k, l);
    if (!(cf.exact <= cf.bound + 1e-12)) bound_ok = false;
    if (!(cf.exact >= -1e-12 && cf.exact <= 1.0 + 1e-12)) bound_ok = false;
    if (!(cf.bound >= -1e-12 && cf.bound <= 1.0 + 1e-12)) bound_ok = false;
  }
  const bool pass = exhaustive_ok && bound_ok;
  return report(8, "bin-combinatorics-oracles", pass,
                fmt("exhaustive (2<=K<=8, 0<k<K, l<=5): worst utilized-prob dev %.2e, worst pmf "
                    "dev %.2e <= 1e-10; exact <= bound on 1000 random (k,l): %s",
                    worst_util, worst_pmf, bound_ok ? "yes" : "no"));
}

// ---------------------------------------------------------------- criterion 9
int criterion09(const Ctx&) {
  // (a) Distance between the law of the normalized 500-sample Gaussian
  // maximum and its Gumbel limit.  The exact Kolmogorov distance is the
  // quantity the criterion bounds; an empirical estimate from 10^4
  // replications is printed alongside.
  const std::uint64_t n = 500;
  const auto nc = evt::norm_constants(n, 0.0, 1.0);
  double exact_ks = 0.0;
  for (double x = -4.0; x <= 10.0; x += 5e-4) {
    const double phi = 1.0 - evt::normal_survival(nc.a * x + nc.b);
    const double fn = std::pow(phi, static_cast<double>(n));
    exact_ks = std::max(exact_ks, std::abs(fn - std::exp(-std::exp(-x))));
  }

  const auto& kk = kern::kernels();
  const std::uint64_t reps = 10000;
  std::vector<double> maxima(reps);
  std::vector<double> buf(n);
  for (std::uint64_t r = 0; r < reps; ++r) {
    kk.fill_normals(20260817, r, StreamTag::capacity, 0, n, buf.data());
    maxima[r] = (*std::max_element(buf.begin(), buf.end()) - nc.b) / nc.a;
  }
  std::sort(maxima.begin(), maxima.end());
  double emp_ks = 0.0;
  for (std::uint64_t i = 0; i < reps; ++i) {
    const double F = std::exp(-std::exp(-maxima[i]));
    emp_ks = std::max(emp_ks, std::max((i + 1) / double(reps) - F, F - i / double(reps)));
  }
  const bool gumbel_ok = exact_ks <= 0.05;

  // (b) Total variation between per-slot exceeder counts and the Poisson law
  // at unit rate, K = 10^4, 10^5 slots.
  sim::ScenarioConfig cfg;
  cfg.K = 10000;
  cfg.profiles.assign(10000, pp::UserProfile{0.0, 1.0, {}});
  cfg.k_target = 1.0;
  cfg.slots = 100000;
  cfg.seed = 9;
  const auto st = sim::run_scenario(cfg);
  const double rate =
      pp::total_rate_exact(evt::threshold_gaussian(10000, 1.0, 0.0, 1.0), cfg.profiles).total;
  double tv = 0.0;
  for (std::size_t c = 0; c < st.exceeder_hist.size(); ++c) {
    const double emp = st.exceeder_hist[c] / static_cast<double>(st.n_slots);
    const double model =
        c < 64 ? pp::count_pmf(rate, 10000, static_cast<std::uint64_t>(c)) : 0.0;
    tv += std::abs(emp - model);
  }
  tv *= 0.5;
  const bool poisson_ok = tv <= 0.02;

  const bool pass = gumbel_ok && poisson_ok;
  return report(9, "limit-law-suites", pass,
                fmt("Gumbel Kolmogorov distance at n=500: exact %.6f vs 0.05 (known red; "
                    "10^4-replication estimate %.4f), Poisson count TV %.4f <= 0.02",
                    exact_ks, emp_ks, tv));
}

// --------------------------------------------------------------- criterion 10
int criterion10(const Ctx&) {
  const auto big = mimo::sample_mimo_capacity(128, 32, 1.0, 100000, 77);
  const bool moments_ok = std::abs(big.skewness) < 0.1 && std::abs(big.excess_kurtosis) < 0.2;
  const auto tiny = mimo::sample_mimo_capacity(1, 1, 1.0, 1000000, 11);
  // E[log2(1 + x)] with x ~ Exp(1), from a high-precision numerical integral.
  const double oracle = 0.8603473822708868;
  const double mean_rel = rel(tiny.mean, oracle);
  const bool mean_ok = mean_rel <= 0.01;
  const bool pass = moments_ok && mean_ok;
  return report(10, "mimo-gaussianity", pass,
                fmt("128x32 over 10^5 draws: |skew|=%.4f < 0.1, |ex.kurt|=%.4f < 0.2; "
                    "1x1 mean rel err %.5f <= 0.01",
                    std::abs(big.skewness), std::abs(big.excess_kurtosis), mean_rel));
}

// --------------------------------------------------------------- criterion 11
int criterion11(const Ctx& ctx) {
  namespace fs = std::filesystem;
  fs::create_directories(ctx.work_dir);
  const std::string scn_path = ctx.scenario_dir + "/determinism.scn";
  const auto read_file = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  bool pass = true;
  std::string detail;
  for (const std::string format : {"csv", "json"}) {
    const std::string a = ctx.work_dir + "/det_a." + format;
    const std::string b = ctx.work_dir + "/det_b." + format;
    for (const std::string& out : {a, b}) {
      const std::string cmd = "\"" + ctx.bin + "\" --scenario \"" + scn_path + "\" --format " +
                              format + " --out \"" + out + "\"";
      if (std::system(cmd.c_str()) != 0) {
        pass = false;
        detail = "runner exited nonzero for " + format;
      }
    }
    const std::string ca = read_file(a), cb = read_file(b);
    if (ca.empty() || ca != cb) {
      pass = false;
      detail = format + " reruns differ";
    }
  }
  if (detail.empty()) detail = "csv and json reruns byte-identical";
  return report(11, "pipeline-determinism", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria harness"};
  int criterion = 0;
  Ctx ctx;
  app.add_option("--criterion", criterion, "criterion number 1..11")->required();
  app.add_option("--bin", ctx.bin, "path to the oppsim binary")->required();
  app.add_option("--scenario-dir", ctx.scenario_dir, "directory with .scn files")->required();
  app.add_option("--work-dir", ctx.work_dir, "scratch directory")->required();
  CLI11_PARSE(app, argc, argv);

  switch (criterion) {
    case 1: return criterion01(ctx);
    case 2: return criterion02(ctx);
    case 3: return criterion03(ctx);
    case 4: return criterion04(ctx);
    case 5: return criterion05(ctx);
    case 6: return criterion06(ctx);
    case 7: return criterion07(ctx);
    case 8: return criterion08(ctx);
    case 9: return criterion09(ctx);
    case 10: return criterion10(ctx);
    case 11: return criterion11(ctx);
    default:
      std::fprintf(stderr, "unknown criterion %d\n", criterion);
      return 2;
  }
}
