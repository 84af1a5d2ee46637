#include "oppsim/simulator.hpp"

#include "oppsim/analytic.hpp"
#include "oppsim/evt.hpp"
#include "oppsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace oppsim::sim {

namespace {

constexpr std::uint64_t kChunkSlots = 4096;
constexpr std::uint64_t kLatticeTop = (std::uint64_t{1} << 53) - 1;

// Strict weak order "a outranks b" for reservoir entries: larger key first,
// ties (never observed, but determinism demands a total rule) by earlier
// slot, then lower user index.
struct BetterEntry {
  bool operator()(const ReservoirEntry& a, const ReservoirEntry& b) const {
    if (a.key != b.key) return a.key > b.key;
    if (a.slot != b.slot) return a.slot < b.slot;
    return a.user < b.user;
  }
};

using ReservoirHeap =
    std::priority_queue<ReservoirEntry, std::vector<ReservoirEntry>, BetterEntry>;

SimStats empty_stats(const ScenarioConfig& cfg) {
  SimStats st;
  st.wins.assign(cfg.profiles.size(), 0);
  st.exceeder_hist.assign(65, 0);
  if (cfg.scheme == Scheme::enhanced) st.delay_hist.assign(cfg.l + 1, 0);
  st.reservoir_cap = cfg.reservoir_cap;
  return st;
}

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.K == 0) throw std::invalid_argument("scenario: K must be positive");
  if (cfg.profiles.size() != cfg.K)
    throw std::invalid_argument("scenario: profiles list must have exactly K entries");
  if (cfg.slots == 0) throw std::invalid_argument("scenario: slots must be positive");
  if (cfg.scheme == Scheme::enhanced) {
    if (cfg.l == 0) throw std::invalid_argument("scenario: enhanced scheme requires l >= 1");
  } else if (cfg.l != 0) {
    throw std::invalid_argument("scenario: l requires scheme=enhanced");
  }
  if (cfg.threads < 1) throw std::invalid_argument("scenario: threads must be >= 1");
  if (cfg.threshold_rule == ThresholdRule::explicit_u && std::isnan(cfg.explicit_threshold))
    throw std::invalid_argument("scenario: explicit threshold must not be NaN");
}

struct Resolved {
  const ScenarioConfig* cfg;
  std::vector<double> thresholds;    // per user
  std::vector<std::uint64_t> vfirst; // per user: first exceeding lattice value
  std::vector<double> bins;          // enhanced boundaries, descending, bins[l-1] = 0
  std::size_t nblocks;               // RNG blocks per slot
};

Resolved resolve(const ScenarioConfig& cfg) {
  validate_config(cfg);
  Resolved r;
  r.cfg = &cfg;
  r.thresholds = resolve_thresholds(cfg);
  r.vfirst.resize(cfg.K);
  for (std::size_t i = 0; i < cfg.K; ++i)
    r.vfirst[i] = exceedance_cutoff(cfg.profiles[i], r.thresholds[i]);
  if (cfg.scheme == Scheme::enhanced) r.bins = an::bin_boundaries(cfg.l, cfg.K);
  r.nblocks = (cfg.K + 1) / 2;
  return r;
}

// Fast path: raw lattice values against integer cutoffs; capacities are
// materialized only for exceeders, always through the scalar single-value
// chain so results do not depend on the bulk kernel's ISA.
struct CutoffAdapter {
  const Resolved& r;
  const kern::Kernels& kk;
  std::vector<std::uint64_t> buf;
  explicit CutoffAdapter(const Resolved& res)
      : r(res), kk(kern::kernels()), buf(2 * res.nblocks) {}
  void fill(std::uint64_t slot) {
    kk.fill_lattice(r.cfg->seed, slot, StreamTag::capacity, 0, r.nblocks, buf.data());
  }
  bool exceeds(std::size_t i) const { return buf[i] >= r.vfirst[i]; }
  double capacity(std::size_t i) const {
    const auto& p = r.cfg->profiles[i];
    return p.mu + p.sigma * kern::normal_quantile(kern::uniform_from_lattice(buf[i]));
  }
};

// Oracle path: every capacity materialized, thresholds compared as doubles.
struct ReferenceAdapter {
  const Resolved& r;
  const kern::Kernels& kk;
  std::vector<double> c;
  explicit ReferenceAdapter(const Resolved& res)
      : r(res), kk(kern::kernels()), c(res.cfg->K) {}
  void fill(std::uint64_t slot) {
    const auto& cfg = *r.cfg;
    kk.fill_normals(cfg.seed, slot, StreamTag::capacity, 0, cfg.K, c.data());
    for (std::size_t i = 0; i < cfg.K; ++i) {
      const auto& p = cfg.profiles[i];
      c[i] = p.mu + p.sigma * c[i];
    }
  }
  bool exceeds(std::size_t i) const { return c[i] > r.thresholds[i]; }
  double capacity(std::size_t i) const { return c[i]; }
};

std::uint64_t reservoir_key(std::uint64_t seed, std::uint64_t slot, std::uint32_t user) {
  const LatticePair lp = philox_lattice(seed, slot, user / 2, StreamTag::reservoir);
  return (user % 2) ? lp.v1 : lp.v0;
}

void heap_offer(ReservoirHeap& heap, std::uint64_t cap, const ReservoirEntry& entry) {
  if (heap.size() < cap) {
    heap.push(entry);
  } else if (BetterEntry{}(entry, heap.top())) {
    heap.pop();
    heap.push(entry);
  }
}

// Bin of an excess above the threshold: smallest index whose lower boundary
// it reaches (1-based; boundaries descend to 0, so every positive excess
// lands).  An excess exactly on a boundary joins the stronger bin.
std::uint32_t bin_of(const std::vector<double>& bins, double excess) {
  for (std::size_t j = 0; j < bins.size(); ++j)
    if (excess >= bins[j]) return static_cast<std::uint32_t>(j + 1);
  return static_cast<std::uint32_t>(bins.size());
}

void accumulate(SimStats& st, const SlotOutcome& out) {
  ++st.n_slots;
  st.exceeders_total += out.exceeders;
  ++st.exceeder_hist[std::min<std::uint32_t>(out.exceeders, 64)];
  switch (out.kind) {
    case SlotKind::idle:
      ++st.n_idle;
      break;
    case SlotKind::utilized: {
      ++st.n_utilized;
      const double c = *out.capacity;
      st.capacity_sum += c;
      st.capacity_sumsq += c * c;
      ++st.wins[*out.winner];
      break;
    }
    case SlotKind::collision:
      ++st.n_collision;
      break;
  }
  if (out.delay_minislots) {
    ++st.delay_hist[*out.delay_minislots];
    st.delay_sum += *out.delay_minislots;
    ++st.delay_slots;
  }
}

template <class Adapter>
SimStats simulate_chunk(const Resolved& r, std::uint64_t begin, std::uint64_t end) {
  const ScenarioConfig& cfg = *r.cfg;
  const std::size_t K = cfg.profiles.size();
  SimStats st = empty_stats(cfg);
  Adapter a(r);
  std::vector<std::uint32_t> ex;
  ex.reserve(64);
  ReservoirHeap heap;
  const bool want_list = cfg.reservoir_cap > 0 || cfg.scheme == Scheme::enhanced;

  for (std::uint64_t slot = begin; slot < end; ++slot) {
    a.fill(slot);
    std::uint32_t count = 0, first = 0, second = 0;
    if (want_list) {
      ex.clear();
      for (std::size_t i = 0; i < K; ++i)
        if (a.exceeds(i)) ex.push_back(static_cast<std::uint32_t>(i));
      count = static_cast<std::uint32_t>(ex.size());
      if (count > 0) first = ex[0];
      if (count > 1) second = ex[1];
    } else {
      for (std::size_t i = 0; i < K; ++i) {
        if (a.exceeds(i)) {
          if (count == 0)
            first = static_cast<std::uint32_t>(i);
          else if (count == 1)
            second = static_cast<std::uint32_t>(i);
          ++count;
        }
      }
    }

    SlotOutcome out;
    out.exceeders = count;
    switch (cfg.scheme) {
      case Scheme::baseline:
        if (count == 1) {
          out.kind = SlotKind::utilized;
          out.winner = first;
          out.capacity = a.capacity(first);
        } else {
          out.kind = count == 0 ? SlotKind::idle : SlotKind::collision;
        }
        break;
      case Scheme::capture:
        if (count == 1) {
          out.kind = SlotKind::utilized;
          out.winner = first;
          out.capacity = a.capacity(first);
        } else if (count == 2) {
          const double cf = a.capacity(first);
          const double cs = a.capacity(second);
          out.kind = SlotKind::utilized;
          out.winner = cs > cf ? second : first; // tie -> lower index
          out.capacity = std::max(cf, cs);
        } else {
          out.kind = count == 0 ? SlotKind::idle : SlotKind::collision;
        }
        break;
      case Scheme::enhanced:
        if (count == 0) {
          out.kind = SlotKind::idle;
        } else {
          std::uint32_t minbin = static_cast<std::uint32_t>(cfg.l) + 1;
          std::uint32_t occupants = 0, winner = 0;
          double winner_cap = 0.0;
          for (std::uint32_t idx : ex) {
            const double c = a.capacity(idx);
            const std::uint32_t bin = bin_of(r.bins, c - r.thresholds[idx]);
            if (bin < minbin) {
              minbin = bin;
              occupants = 1;
              winner = idx;
              winner_cap = c;
            } else if (bin == minbin) {
              ++occupants;
            }
          }
          out.delay_minislots = minbin;
          if (occupants == 1) {
            out.kind = SlotKind::utilized;
            out.winner = winner;
            out.capacity = winner_cap;
          } else {
            out.kind = SlotKind::collision;
          }
        }
        break;
    }
    accumulate(st, out);

    if (cfg.reservoir_cap > 0 && count > 0) {
      for (std::uint32_t idx : ex) {
        ReservoirEntry entry;
        entry.key = reservoir_key(cfg.seed, slot, idx);
        entry.slot = slot;
        entry.user = idx;
        entry.excess = a.capacity(idx) - r.thresholds[idx];
        heap_offer(heap, cfg.reservoir_cap, entry);
      }
    }
  }

  st.reservoir.reserve(heap.size());
  while (!heap.empty()) {
    st.reservoir.push_back(heap.top());
    heap.pop();
  }
  std::sort(st.reservoir.begin(), st.reservoir.end(), BetterEntry{});
  return st;
}

template <class Adapter>
SimStats run_with(const Resolved& r) {
  const ScenarioConfig& cfg = *r.cfg;
  const std::uint64_t begin = cfg.first_slot;
  const std::uint64_t n_chunks = (cfg.slots + kChunkSlots - 1) / kChunkSlots;
  const std::uint64_t workers =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.threads), n_chunks);

  std::vector<SimStats> parts(n_chunks);
  const auto run_range = [&](std::uint64_t w) {
    for (std::uint64_t c = w; c < n_chunks; c += workers) {
      const std::uint64_t lo = begin + c * kChunkSlots;
      const std::uint64_t hi = begin + std::min(cfg.slots, (c + 1) * kChunkSlots);
      parts[c] = simulate_chunk<Adapter>(r, lo, hi);
    }
  };
  if (workers <= 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
    for (auto& t : pool) t.join();
  }

  SimStats total = empty_stats(cfg);
  for (const auto& part : parts) total = merge_stats(total, part);
  return total;
}

} // namespace

double SimStats::mean_capacity_halfwidth() const {
  if (n_slots < 2) return 0.0;
  const double n = static_cast<double>(n_slots);
  const double mean = capacity_sum / n;
  const double var = std::max(0.0, capacity_sumsq / n - mean * mean);
  return 1.96 * std::sqrt(var / n);
}

SimStats merge_stats(const SimStats& a, const SimStats& b) {
  if (a.wins.size() != b.wins.size() || a.exceeder_hist.size() != b.exceeder_hist.size() ||
      a.delay_hist.size() != b.delay_hist.size() || a.reservoir_cap != b.reservoir_cap)
    throw std::invalid_argument("merge_stats: incompatible shapes");
  SimStats out = a;
  out.n_slots += b.n_slots;
  out.n_idle += b.n_idle;
  out.n_utilized += b.n_utilized;
  out.n_collision += b.n_collision;
  out.capacity_sum += b.capacity_sum;
  out.capacity_sumsq += b.capacity_sumsq;
  out.exceeders_total += b.exceeders_total;
  for (std::size_t i = 0; i < out.wins.size(); ++i) out.wins[i] += b.wins[i];
  for (std::size_t i = 0; i < out.exceeder_hist.size(); ++i)
    out.exceeder_hist[i] += b.exceeder_hist[i];
  for (std::size_t i = 0; i < out.delay_hist.size(); ++i) out.delay_hist[i] += b.delay_hist[i];
  out.delay_sum += b.delay_sum;
  out.delay_slots += b.delay_slots;
  std::vector<ReservoirEntry> merged(a.reservoir.size() + b.reservoir.size());
  std::merge(a.reservoir.begin(), a.reservoir.end(), b.reservoir.begin(), b.reservoir.end(),
             merged.begin(), BetterEntry{});
  if (merged.size() > out.reservoir_cap) merged.resize(out.reservoir_cap);
  out.reservoir = std::move(merged);
  return out;
}

std::vector<double> resolve_thresholds(const ScenarioConfig& cfg) {
  validate_config(cfg);
  std::vector<double> u(cfg.K);
  for (std::size_t i = 0; i < cfg.K; ++i) {
    const auto& p = cfg.profiles[i];
    switch (cfg.threshold_rule) {
      case ThresholdRule::gaussian_exact:
        u[i] = evt::threshold_gaussian(cfg.K, cfg.k_target, p.mu, p.sigma);
        break;
      case ThresholdRule::gaussian_series:
        u[i] = evt::threshold_gaussian_series(cfg.K, cfg.k_target, p.mu, p.sigma);
        break;
      case ThresholdRule::gumbel:
        u[i] = evt::threshold_gumbel(cfg.K, cfg.k_target, p.mu, p.sigma);
        break;
      case ThresholdRule::explicit_u:
        u[i] = cfg.explicit_threshold;
        break;
      case ThresholdRule::per_user_qos:
        u[i] = pp::qos_threshold(p); // throws if qos_p unset
        break;
    }
  }
  return u;
}

std::uint64_t exceedance_cutoff(const pp::UserProfile& profile, double u) {
  const auto cap = [&](std::uint64_t v) {
    return profile.mu + profile.sigma * kern::normal_quantile(kern::uniform_from_lattice(v));
  };
  if (!(cap(kLatticeTop) > u)) return std::uint64_t{1} << 53; // no lattice point exceeds
  if (cap(0) > u) return 0;                                   // every lattice point exceeds
  // Invariant: cap(lo) <= u < cap(hi); the capacity map is monotone in v.
  std::uint64_t lo = 0, hi = kLatticeTop;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (cap(mid) <= u)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

SimStats run_scenario(const ScenarioConfig& cfg) {
  const Resolved r = resolve(cfg);
  return run_with<CutoffAdapter>(r);
}

SimStats run_reference(const ScenarioConfig& cfg) {
  const Resolved r = resolve(cfg);
  return run_with<ReferenceAdapter>(r);
}

SimStats run_baseline(const ScenarioConfig& cfg) {
  if (cfg.scheme != Scheme::baseline)
    throw std::invalid_argument("run_baseline: config scheme is not baseline");
  return run_scenario(cfg);
}

SimStats run_capture(const ScenarioConfig& cfg) {
  if (cfg.scheme != Scheme::capture)
    throw std::invalid_argument("run_capture: config scheme is not capture");
  return run_scenario(cfg);
}

SimStats run_enhanced(const ScenarioConfig& cfg) {
  if (cfg.scheme != Scheme::enhanced)
    throw std::invalid_argument("run_enhanced: config scheme is not enhanced");
  return run_scenario(cfg);
}

SimStats collect_excess_samples(const ScenarioConfig& cfg, std::uint64_t cap) {
  ScenarioConfig with_reservoir = cfg;
  with_reservoir.reservoir_cap = cap;
  return run_scenario(with_reservoir);
}

std::vector<double> sample_excesses_conditional(const pp::UserProfile& profile, double u,
                                                std::uint64_t n, std::uint64_t seed) {
  if (!(profile.sigma > 0.0))
    throw std::domain_error("sample_excesses_conditional: sigma must be positive");
  const double z = (u - profile.mu) / profile.sigma;
  const double survival = evt::normal_survival(z);
  if (!(survival > 0.0))
    throw std::domain_error("sample_excesses_conditional: threshold survival underflows");
  std::vector<double> out(n);
  if (n == 0) return out;
  const std::size_t nblocks = (n + 1) / 2;
  std::vector<std::uint64_t> buf(2 * nblocks);
  kern::kernels().fill_lattice(seed, 0, StreamTag::capacity, 0, nblocks, buf.data());
  for (std::uint64_t i = 0; i < n; ++i) {
    const double tail = survival * kern::uniform_from_lattice(buf[i]);
    const double c = profile.mu - profile.sigma * kern::normal_quantile(tail);
    out[i] = std::max(0.0, c - u);
  }
  return out;
}

std::vector<pp::UserProfile> generate_profiles(std::uint64_t K, std::uint64_t profile_seed) {
  if (K == 0) throw std::invalid_argument("generate_profiles: K must be positive");
  std::vector<std::uint64_t> buf(2 * K);
  kern::kernels().fill_lattice(profile_seed, 0, StreamTag::profile, 0, K, buf.data());
  std::vector<pp::UserProfile> out(K);
  const double mu_lo = std::sqrt(2.0) - 1.0;
  for (std::uint64_t i = 0; i < K; ++i) {
    const double d1 = kern::uniform_from_lattice(buf[2 * i]);
    const double d2 = kern::uniform_from_lattice(buf[2 * i + 1]);
    out[i].sigma = 0.03 + 2.97 * d1;
    out[i].mu = mu_lo + 2.0 * d2;
  }
  return out;
}

} // namespace oppsim::sim
