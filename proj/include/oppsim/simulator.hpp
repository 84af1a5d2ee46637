#pragma once
// Slot-level Monte Carlo of the distributed threshold-scheduling system.
//
// Determinism contract: every random quantity is a pure function of
// (seed, slot, stream tag, draw index) through the counter RNG, so a run is
// reproducible bit for bit across reruns, thread counts, and SIMD backends.
// Slots are processed in fixed 4096-slot chunks whose partial statistics are
// merged in chunk order.
//
// The hot path never materializes capacities for silent users: each user's
// exceedance test `C_i > u_i` is precomputed as an integer cutoff on the raw
// 53-bit lattice value (the capacity map is monotone in the lattice), so a
// slot costs one counter-RNG fill plus K integer compares.  Capacities are
// evaluated only for exceeders.  run_reference() materializes every
// capacity and must produce bit-identical statistics; tests enforce this.

#include "oppsim/point_process.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace oppsim::sim {

enum class Scheme { baseline, capture, enhanced };

enum class ThresholdRule { gaussian_exact, gaussian_series, gumbel, explicit_u, per_user_qos };

struct ScenarioConfig {
  std::uint64_t K = 0;
  std::vector<pp::UserProfile> profiles; // size K
  Scheme scheme = Scheme::baseline;
  ThresholdRule threshold_rule = ThresholdRule::gaussian_exact;
  double k_target = 1.0;        // gaussian_* and gumbel rules
  double explicit_threshold = 0; // explicit_u rule
  std::uint64_t l = 0;          // mini-slot bins; enhanced only
  std::uint64_t slots = 100000;
  std::uint64_t seed = 0;
  std::uint64_t first_slot = 0; // advanced: offset of the slot-index stream,
                                // lets replications split one run exactly
  int threads = 1;
  std::uint64_t reservoir_cap = 0; // excess-sample reservoir size (0 = off)
};

enum class SlotKind { idle, utilized, collision };

// Outcome of one slot.  utilized <=> winner and capacity are present, and
// the capacity strictly exceeds the winner's threshold.  delay_minislots is
// the carrier-sense scan depth (index of the first occupied bin, <= l); it
// is present for every non-idle slot under the enhanced scheme.
struct SlotOutcome {
  SlotKind kind = SlotKind::idle;
  std::optional<std::uint32_t> winner;
  std::optional<double> capacity;
  std::optional<std::uint32_t> delay_minislots;
  std::uint32_t exceeders = 0;
};

// Weighted-reservoir entry: every exceedance event draws a 64-bit priority
// key from its own RNG substream; the reservoir keeps the cap largest keys.
// Top-k-by-key makes the merge associative and order-free, so chunked and
// threaded runs build identical reservoirs.
struct ReservoirEntry {
  std::uint64_t key = 0;
  std::uint64_t slot = 0;
  std::uint32_t user = 0;
  double excess = 0.0; // C_i - u_i > 0
};

struct SimStats {
  std::uint64_t n_slots = 0;
  std::uint64_t n_idle = 0;
  std::uint64_t n_utilized = 0;
  std::uint64_t n_collision = 0;
  double capacity_sum = 0.0;   // over utilized slots
  double capacity_sumsq = 0.0; // per-slot capacity squared (0 when not utilized)
  std::uint64_t exceeders_total = 0;
  std::vector<std::uint64_t> wins;          // per-user utilized-slot wins, size K
  std::vector<std::uint64_t> exceeder_hist; // size 65; index min(count, 64)
  std::vector<std::uint64_t> delay_hist;    // enhanced: size l+1, index = scan depth
  std::uint64_t delay_sum = 0;              // scan depth summed over non-idle slots
  std::uint64_t delay_slots = 0;            // non-idle slots (enhanced)
  std::uint64_t reservoir_cap = 0;
  std::vector<ReservoirEntry> reservoir; // sorted by descending (key, -slot, -user)

  double p_idle() const { return ratio(n_idle); }
  double p_utilized() const { return ratio(n_utilized); }
  double p_collision() const { return ratio(n_collision); }
  // Capacity averaged over all slots (idle/collision slots contribute zero).
  double mean_capacity() const { return n_slots ? capacity_sum / double(n_slots) : 0.0; }
  // 95% half-width of mean_capacity under the normal approximation.
  double mean_capacity_halfwidth() const;
  // Capacity averaged over utilized slots only.
  double utilized_capacity_mean() const {
    return n_utilized ? capacity_sum / double(n_utilized) : 0.0;
  }
  double mean_exceeders() const { return n_slots ? exceeders_total / double(n_slots) : 0.0; }
  // Mean carrier-sense scan depth over non-idle slots (enhanced scheme).
  double mean_delay_minislots() const {
    return delay_slots ? delay_sum / double(delay_slots) : 0.0;
  }

 private:
  double ratio(std::uint64_t c) const { return n_slots ? c / double(n_slots) : 0.0; }
};

// Exact merge of two partial runs (disjoint slot ranges): counts add,
// reservoirs keep the cap largest keys.  Shapes (K, l, cap) must agree.
SimStats merge_stats(const SimStats& a, const SimStats& b);

// Per-user thresholds resolved from the configured rule (size K).
std::vector<double> resolve_thresholds(const ScenarioConfig& config);

// Smallest 53-bit lattice value whose capacity for this profile strictly
// exceeds u; 2^53 if no lattice point exceeds.  exceed(v) <=> v >= cutoff.
std::uint64_t exceedance_cutoff(const pp::UserProfile& profile, double u);

SimStats run_baseline(const ScenarioConfig& config);
SimStats run_capture(const ScenarioConfig& config);
SimStats run_enhanced(const ScenarioConfig& config);
SimStats run_scenario(const ScenarioConfig& config); // dispatch on config.scheme

// Oracle path: materializes every user's capacity each slot and compares
// against the threshold directly, bypassing the integer-cutoff fast path.
// Must equal run_scenario() field for field.
SimStats run_reference(const ScenarioConfig& config);

// Convenience: run with an excess reservoir of the given capacity.
SimStats collect_excess_samples(const ScenarioConfig& config, std::uint64_t cap);

// n i.i.d. draws of C - u given C > u for one profile, via the conditional
// inverse-survival transform.  This is the exceedance-event excess law for
// populations too large to step slot by slot.
std::vector<double> sample_excesses_conditional(const pp::UserProfile& profile, double u,
                                                std::uint64_t n, std::uint64_t seed);

// Reproducible heterogeneous population: sigma_i ~ U[0.03, 3] and
// mu_i ~ U[sqrt(2)-1, sqrt(2)+1], drawn from the profile RNG stream.
std::vector<pp::UserProfile> generate_profiles(std::uint64_t K, std::uint64_t profile_seed);

} // namespace oppsim::sim
