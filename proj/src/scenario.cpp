#include "oppsim/scenario.hpp"

#include "oppsim/analytic.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace oppsim::scn {
namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << origin;
  if (line > 0) os << ":" << line;
  os << ": " << what;
  throw std::invalid_argument(os.str());
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& origin, std::size_t line, const std::string& key,
                    const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(out))
    fail(origin, line, "key " + key + ": expected a finite number, got \"" + value + "\"");
  return out;
}

std::uint64_t parse_u64(const std::string& origin, std::size_t line, const std::string& key,
                        const std::string& value) {
  std::uint64_t out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last)
    fail(origin, line, "key " + key + ": expected a nonnegative integer, got \"" + value + "\"");
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string sanitize_id(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    out.push_back(ok ? c : '-');
  }
  return out.empty() ? std::string("scenario") : out;
}

std::string stem_of(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return sanitize_id(base);
}

}  // namespace

std::string scheme_name(sim::Scheme s) {
  switch (s) {
    case sim::Scheme::baseline: return "baseline";
    case sim::Scheme::capture: return "capture";
    case sim::Scheme::enhanced: return "enhanced";
  }
  throw std::logic_error("unreachable scheme");
}

sim::Scheme scheme_from_name(const std::string& name) {
  if (name == "baseline") return sim::Scheme::baseline;
  if (name == "capture") return sim::Scheme::capture;
  if (name == "enhanced") return sim::Scheme::enhanced;
  throw std::invalid_argument("unknown scheme \"" + name +
                              "\" (expected baseline | capture | enhanced)");
}

std::string rule_name(sim::ThresholdRule r) {
  switch (r) {
    case sim::ThresholdRule::gaussian_exact: return "gaussian_exact";
    case sim::ThresholdRule::gaussian_series: return "gaussian_series";
    case sim::ThresholdRule::gumbel: return "gumbel";
    case sim::ThresholdRule::explicit_u: return "explicit";
    case sim::ThresholdRule::per_user_qos: return "per_user_qos";
  }
  throw std::logic_error("unreachable threshold rule");
}

sim::ThresholdRule rule_from_name(const std::string& name) {
  if (name == "gaussian_exact") return sim::ThresholdRule::gaussian_exact;
  if (name == "gaussian_series") return sim::ThresholdRule::gaussian_series;
  if (name == "gumbel") return sim::ThresholdRule::gumbel;
  if (name == "explicit") return sim::ThresholdRule::explicit_u;
  if (name == "per_user_qos") return sim::ThresholdRule::per_user_qos;
  throw std::invalid_argument(
      "unknown threshold_rule \"" + name +
      "\" (expected gaussian_exact | gaussian_series | gumbel | explicit | per_user_qos)");
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Scenario s;
  s.id = stem_of(origin);

  std::set<std::string> seen;  // qualified key names; "user" may repeat
  bool k_set = false, rule_set = false, mu_set = false, sigma_set = false;
  bool mode_set = false, pseed_set = false, l_set = false;

  std::string section;  // "" = top level
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, lineno, "malformed section header \"" + line + "\"");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "profiles") fail(origin, lineno, "unknown section [" + section + "]");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value, got \"" + line + "\"");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(origin, lineno, "empty key or value");

    const std::string qualified = section.empty() ? key : section + "." + key;
    if (key != "user" && !seen.insert(qualified).second)
      fail(origin, lineno, "duplicate key: " + qualified);

    if (section.empty()) {
      if (key == "id") {
        if (value != sanitize_id(value))
          fail(origin, lineno, "id may contain only letters, digits, '_' and '-'");
        s.id = value;
      } else if (key == "K") {
        s.K = parse_u64(origin, lineno, key, value);
      } else if (key == "scheme") {
        try {
          s.scheme = scheme_from_name(value);
        } catch (const std::invalid_argument& e) {
          fail(origin, lineno, e.what());
        }
      } else if (key == "threshold_rule") {
        try {
          s.rule = rule_from_name(value);
        } catch (const std::invalid_argument& e) {
          fail(origin, lineno, e.what());
        }
        rule_set = true;
      } else if (key == "k") {
        s.k_target = parse_double(origin, lineno, key, value);
        k_set = true;
      } else if (key == "u") {
        s.explicit_u = parse_double(origin, lineno, key, value);
      } else if (key == "rate_target") {
        s.rate_target = parse_double(origin, lineno, key, value);
      } else if (key == "l") {
        s.l = parse_u64(origin, lineno, key, value);
        l_set = true;
      } else if (key == "slots") {
        s.slots = parse_u64(origin, lineno, key, value);
      } else if (key == "seed") {
        s.seed = parse_u64(origin, lineno, key, value);
      } else {
        fail(origin, lineno, "unknown key: " + key);
      }
      continue;
    }

    // [profiles]
    if (key == "mode") {
      if (value == "homogeneous") s.mode = ProfileMode::homogeneous;
      else if (value == "generator") s.mode = ProfileMode::generator;
      else if (value == "list") s.mode = ProfileMode::list;
      else fail(origin, lineno, "unknown profiles.mode \"" + value + "\"");
      mode_set = true;
    } else if (key == "mu") {
      s.mu = parse_double(origin, lineno, key, value);
      mu_set = true;
    } else if (key == "sigma") {
      s.sigma = parse_double(origin, lineno, key, value);
      sigma_set = true;
    } else if (key == "profile_seed") {
      s.profile_seed = parse_u64(origin, lineno, key, value);
      pseed_set = true;
    } else if (key == "user") {
      std::istringstream fields(value);
      double mu = 0, sigma = 0;
      if (!(fields >> mu >> sigma))
        fail(origin, lineno, "key user: expected \"<mu> <sigma> [qos_p]\"");
      pp::UserProfile prof{mu, sigma, {}};
      double qp = 0;
      if (fields >> qp) prof.qos_p = qp;
      std::string rest;
      if (fields >> rest) fail(origin, lineno, "key user: trailing tokens after qos_p");
      if (!std::isfinite(mu) || !std::isfinite(sigma))
        fail(origin, lineno, "key user: values must be finite");
      s.users.push_back(prof);
    } else if (key == "qos") {
      if (value == "equal_share") s.qos = QosAssign::equal_share;
      else if (value == "proportional_index") s.qos = QosAssign::proportional_index;
      else fail(origin, lineno, "unknown profiles.qos \"" + value + "\"");
    } else {
      fail(origin, lineno, "unknown key: profiles." + key);
    }
  }

  // Required keys and cross-field conflicts.
  if (!seen.count("K")) fail(origin, 0, "missing required key: K");
  if (!seen.count("scheme")) fail(origin, 0, "missing required key: scheme");
  if (!mode_set) fail(origin, 0, "missing required key: profiles.mode");

  if (s.mode != ProfileMode::homogeneous && (mu_set || sigma_set))
    fail(origin, 0, "profiles.mu / profiles.sigma require mode=homogeneous");
  if (s.mode != ProfileMode::generator && pseed_set)
    fail(origin, 0, "profiles.profile_seed requires mode=generator");
  if (s.mode != ProfileMode::list && !s.users.empty())
    fail(origin, 0, "profiles.user entries require mode=list");
  if (s.mode == ProfileMode::list && s.users.empty())
    fail(origin, 0, "mode=list requires at least one profiles.user entry");

  if (s.rate_target) {
    if (rule_set) fail(origin, 0, "threshold_rule conflicts with rate_target");
    if (k_set) fail(origin, 0, "k conflicts with rate_target");
    if (s.explicit_u) fail(origin, 0, "u conflicts with rate_target");
  }
  if (s.explicit_u && s.rule != sim::ThresholdRule::explicit_u)
    fail(origin, 0, "u requires threshold_rule=explicit");
  if (!s.explicit_u && s.rule == sim::ThresholdRule::explicit_u && !s.rate_target)
    fail(origin, 0, "missing required key: u (threshold_rule=explicit)");
  if (s.rule == sim::ThresholdRule::per_user_qos && k_set)
    fail(origin, 0, "k conflicts with threshold_rule=per_user_qos");
  if (s.qos != QosAssign::none && s.rule != sim::ThresholdRule::per_user_qos)
    fail(origin, 0, "profiles.qos requires threshold_rule=per_user_qos");

  if (l_set && s.l > 0 && s.scheme != sim::Scheme::enhanced)
    fail(origin, 0, "l requires scheme=enhanced");
  if (s.scheme == sim::Scheme::enhanced && s.l == 0)
    fail(origin, 0, "missing required key: l (scheme=enhanced)");

  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

std::string serialize(const Scenario& s) {
  std::ostringstream os;
  os << "id = " << s.id << "\n";
  os << "K = " << s.K << "\n";
  os << "scheme = " << scheme_name(s.scheme) << "\n";
  if (s.rate_target) {
    os << "rate_target = " << format_double(*s.rate_target) << "\n";
  } else {
    os << "threshold_rule = " << rule_name(s.rule) << "\n";
    if (s.rule == sim::ThresholdRule::explicit_u)
      os << "u = " << format_double(*s.explicit_u) << "\n";
    else if (s.rule != sim::ThresholdRule::per_user_qos)
      os << "k = " << format_double(s.k_target) << "\n";
  }
  if (s.scheme == sim::Scheme::enhanced) os << "l = " << s.l << "\n";
  os << "slots = " << s.slots << "\n";
  os << "seed = " << s.seed << "\n";
  os << "\n[profiles]\n";
  switch (s.mode) {
    case ProfileMode::homogeneous:
      os << "mode = homogeneous\n";
      os << "mu = " << format_double(s.mu) << "\n";
      os << "sigma = " << format_double(s.sigma) << "\n";
      break;
    case ProfileMode::generator:
      os << "mode = generator\n";
      os << "profile_seed = " << s.profile_seed << "\n";
      break;
    case ProfileMode::list:
      os << "mode = list\n";
      for (const auto& p : s.users) {
        os << "user = " << format_double(p.mu) << " " << format_double(p.sigma);
        if (p.qos_p) os << " " << format_double(*p.qos_p);
        os << "\n";
      }
      break;
  }
  if (s.qos == QosAssign::equal_share) os << "qos = equal_share\n";
  if (s.qos == QosAssign::proportional_index) os << "qos = proportional_index\n";
  return os.str();
}

std::vector<pp::UserProfile> build_profiles(const Scenario& s) {
  if (s.K == 0) throw std::invalid_argument("K must be positive");
  std::vector<pp::UserProfile> out;
  switch (s.mode) {
    case ProfileMode::homogeneous:
      if (!(s.sigma > 0)) throw std::invalid_argument("profiles.sigma must be positive");
      out.assign(s.K, pp::UserProfile{s.mu, s.sigma, {}});
      break;
    case ProfileMode::generator:
      out = sim::generate_profiles(s.K, s.profile_seed);
      break;
    case ProfileMode::list:
      if (s.users.size() != s.K)
        throw std::invalid_argument("mode=list provides " + std::to_string(s.users.size()) +
                                    " users but K = " + std::to_string(s.K));
      out = s.users;
      for (const auto& p : out) {
        if (!(p.sigma > 0)) throw std::invalid_argument("every user sigma must be positive");
        if (p.qos_p && !(*p.qos_p > 0 && *p.qos_p < 1))
          throw std::invalid_argument("user qos_p must lie in (0,1)");
      }
      break;
  }
  if (s.qos == QosAssign::equal_share) {
    for (auto& p : out) p.qos_p = 1.0 / static_cast<double>(s.K);
  } else if (s.qos == QosAssign::proportional_index) {
    // Share of user i proportional to i+1, normalized to a unit total.
    const double denom = 0.5 * static_cast<double>(s.K) * static_cast<double>(s.K + 1);
    for (std::uint64_t i = 0; i < s.K; ++i)
      out[i].qos_p = static_cast<double>(i + 1) / denom;
  }
  return out;
}

sim::ScenarioConfig resolve(const Scenario& s) {
  sim::ScenarioConfig cfg;
  cfg.K = s.K;
  cfg.profiles = build_profiles(s);
  cfg.scheme = s.scheme;
  cfg.threshold_rule = s.rule;
  cfg.k_target = s.k_target;
  cfg.l = s.l;
  cfg.slots = s.slots;
  cfg.seed = s.seed;

  if (s.rate_target) {
    if (!(*s.rate_target > 0))
      throw std::invalid_argument("rate_target must be positive");
    cfg.threshold_rule = sim::ThresholdRule::explicit_u;
    cfg.explicit_threshold = an::tune_threshold_for_rate(cfg.profiles, *s.rate_target);
  } else if (s.rule == sim::ThresholdRule::explicit_u) {
    cfg.explicit_threshold = *s.explicit_u;
  }

  if (cfg.threshold_rule != sim::ThresholdRule::explicit_u &&
      cfg.threshold_rule != sim::ThresholdRule::per_user_qos && !(cfg.k_target > 0))
    throw std::invalid_argument("k must be positive");
  if (cfg.l > 0 && cfg.scheme != sim::Scheme::enhanced)
    throw std::invalid_argument("l requires scheme=enhanced");
  if (cfg.scheme == sim::Scheme::enhanced && cfg.l == 0)
    throw std::invalid_argument("scheme=enhanced requires l >= 1");
  if (cfg.slots == 0) throw std::invalid_argument("slots must be positive");

  // Resolving thresholds up front surfaces the remaining rule errors (e.g.
  // per_user_qos without shares) before any simulation starts.
  (void)sim::resolve_thresholds(cfg);
  return cfg;
}

}  // namespace oppsim::scn
