#pragma once

// Scenario files: flat key-value text describing one simulation setup.
//
//   # comment
//   id = hom-k1
//   K = 1000
//   scheme = baseline            # baseline | capture | enhanced
//   threshold_rule = gaussian_exact
//   k = 1.0                      # target mean exceeders per slot (gaussian rules)
//   u = 9.5                      # fixed threshold (threshold_rule = explicit only)
//   rate_target = 1.0            # tune a common threshold so the mean exceedance
//                                # rate per slot equals this (implies explicit rule)
//   l = 49                       # mini-slot bins (scheme = enhanced only)
//   slots = 100000
//   seed = 0
//
//   [profiles]
//   mode = homogeneous           # homogeneous | generator | list
//   mu = 0.0                     # homogeneous only
//   sigma = 1.0                  # homogeneous only
//   profile_seed = 7             # generator only: sigma ~ U[0.03,3], mu ~ U[sqrt(2)-1, sqrt(2)+1]
//   user = <mu> <sigma> [qos_p]  # list only, one line per user
//   qos = equal_share            # equal_share | proportional_index (per_user_qos rule)
//
// Unknown keys, duplicate keys, and cross-field conflicts are rejected with
// messages naming the offending key. Defaults: slots=100000, seed=0,
// threshold_rule=gaussian_exact, k=1, id=<file stem>.

#include "oppsim/point_process.hpp"
#include "oppsim/simulator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oppsim::scn {

enum class ProfileMode { homogeneous, generator, list };
enum class QosAssign { none, equal_share, proportional_index };

struct Scenario {
  std::string id = "scenario";
  std::uint64_t K = 0;
  sim::Scheme scheme = sim::Scheme::baseline;
  sim::ThresholdRule rule = sim::ThresholdRule::gaussian_exact;
  double k_target = 1.0;
  std::optional<double> explicit_u;   // threshold_rule = explicit
  std::optional<double> rate_target;  // tunes a common explicit threshold
  std::uint64_t l = 0;                // enhanced only
  std::uint64_t slots = 100000;
  std::uint64_t seed = 0;

  ProfileMode mode = ProfileMode::homogeneous;
  double mu = 0.0;
  double sigma = 1.0;
  std::uint64_t profile_seed = 0;
  std::vector<pp::UserProfile> users;  // mode = list
  QosAssign qos = QosAssign::none;
};

// Name <-> enum helpers used by files, sweeps and reports.
std::string scheme_name(sim::Scheme s);
sim::Scheme scheme_from_name(const std::string& name);
std::string rule_name(sim::ThresholdRule r);
sim::ThresholdRule rule_from_name(const std::string& name);

// Parse scenario text. `origin` labels error messages (file path or "<string>")
// and its stem seeds the default id. Throws std::invalid_argument on any
// unknown/duplicate/missing key, malformed value, or cross-field conflict.
Scenario parse_scenario(const std::string& text, const std::string& origin);

// Read and parse a scenario file. Throws std::invalid_argument if the file
// cannot be opened or fails to parse.
Scenario load_scenario(const std::string& path);

// Canonical text form; parse_scenario(serialize(s)) reproduces s exactly and
// serialization is idempotent.
std::string serialize(const Scenario& s);

// Materialize the K user profiles (including any qos share assignment).
std::vector<pp::UserProfile> build_profiles(const Scenario& s);

// Validate and resolve to a runnable config. rate_target is tuned here (the
// resulting common threshold becomes an explicit rule). Throws
// std::invalid_argument / std::domain_error before any simulation work.
sim::ScenarioConfig resolve(const Scenario& s);

}  // namespace oppsim::scn
