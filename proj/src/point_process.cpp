#include "oppsim/point_process.hpp"

#include "oppsim/evt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oppsim::pp {

namespace {

void check_profile(const UserProfile& p) {
  if (!(p.sigma > 0.0)) {
    throw std::domain_error("UserProfile: sigma must be > 0");
  }
}

double rate_from_constants(double u, const UserProfile& p, const evt::detail::AB& ab) {
  return std::exp(-(u - (p.sigma * ab.b + p.mu)) / (p.sigma * ab.a));
}

evt::detail::AB constants_for(std::uint64_t K) {
  if (K < 2) {
    throw std::domain_error("rates need K >= 2 for the normalizing constants");
  }
  return evt::detail::norm_constants_real(static_cast<double>(K));
}

template <class PerUser>
RateVector assemble(const std::vector<UserProfile>& profiles, std::vector<double> thresholds,
                    PerUser&& rate_of) {
  if (profiles.empty()) {
    throw std::domain_error("total_rate: profiles must be nonempty");
  }
  RateVector rv;
  rv.K = profiles.size();
  rv.per_user.resize(profiles.size());
  rv.threshold = std::move(thresholds);
  double sum = 0.0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    check_profile(profiles[i]);
    const double u = rv.threshold.size() == 1 ? rv.threshold[0] : rv.threshold[i];
    rv.per_user[i] = rate_of(u, profiles[i]);
    sum += rv.per_user[i];
  }
  rv.total = sum;
  return rv;
}

} // namespace

double intensity_above(double v, double xi) {
  if (xi == 0.0) return std::exp(-v);
  const double t = 1.0 + xi * v;
  if (t <= 0.0) {
    // Positive-part clamp: below the lower support edge every point exceeds
    // (rate diverges); past the upper endpoint nothing does.
    return xi > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return std::exp(-std::log1p(xi * v) / xi);
}

double user_rate(double u, const UserProfile& profile, std::uint64_t K) {
  check_profile(profile);
  return rate_from_constants(u, profile, constants_for(K));
}

double user_rate_exact(double u, const UserProfile& profile, std::uint64_t K) {
  check_profile(profile);
  if (K < 2) {
    throw std::domain_error("rates need K >= 2");
  }
  return static_cast<double>(K) * evt::normal_survival((u - profile.mu) / profile.sigma);
}

RateVector total_rate(double u, const std::vector<UserProfile>& profiles) {
  const evt::detail::AB ab = constants_for(profiles.size());
  return assemble(profiles, {u},
                  [&](double uu, const UserProfile& p) { return rate_from_constants(uu, p, ab); });
}

RateVector total_rate_exact(double u, const std::vector<UserProfile>& profiles) {
  const double K = static_cast<double>(profiles.size());
  if (profiles.size() < 2) {
    throw std::domain_error("total_rate_exact: need K >= 2");
  }
  return assemble(profiles, {u}, [&](double uu, const UserProfile& p) {
    return K * evt::normal_survival((uu - p.mu) / p.sigma);
  });
}

RateVector total_rate(const std::vector<double>& u, const std::vector<UserProfile>& profiles) {
  if (u.size() != profiles.size()) {
    throw std::domain_error("total_rate: thresholds and profiles must have equal length");
  }
  const evt::detail::AB ab = constants_for(profiles.size());
  return assemble(profiles, u,
                  [&](double uu, const UserProfile& p) { return rate_from_constants(uu, p, ab); });
}

RateVector total_rate_exact(const std::vector<double>& u,
                            const std::vector<UserProfile>& profiles) {
  if (u.size() != profiles.size()) {
    throw std::domain_error("total_rate_exact: thresholds and profiles must have equal length");
  }
  if (profiles.size() < 2) {
    throw std::domain_error("total_rate_exact: need K >= 2");
  }
  const double K = static_cast<double>(profiles.size());
  return assemble(profiles, u, [&](double uu, const UserProfile& p) {
    return K * evt::normal_survival((uu - p.mu) / p.sigma);
  });
}

double qos_threshold(const UserProfile& profile) {
  check_profile(profile);
  if (!profile.qos_p || !(*profile.qos_p > 0.0) || !(*profile.qos_p < 1.0)) {
    throw std::domain_error("qos_threshold: qos_p must be set and in (0,1)");
  }
  const double p = *profile.qos_p;
  const evt::detail::AB ab = evt::detail::norm_constants_real(1.0 / p);
  const double u_std = ab.b - ab.a * std::log(-std::log1p(-p));
  return profile.mu + profile.sigma * u_std;
}

double qos_rate(const UserProfile& profile, std::uint64_t K) {
  return user_rate(qos_threshold(profile), profile, K);
}

double qos_rate_closed_form(const UserProfile& profile, std::uint64_t K) {
  check_profile(profile);
  if (!profile.qos_p || !(*profile.qos_p > 0.0) || !(*profile.qos_p < 1.0)) {
    throw std::domain_error("qos_rate_closed_form: qos_p must be set and in (0,1)");
  }
  const double p = *profile.qos_p;
  const evt::detail::AB aK = constants_for(K);
  const evt::detail::AB ap = evt::detail::norm_constants_real(1.0 / p);
  return std::exp(-(aK.b + ap.b) / aK.a) * std::pow(-std::log1p(-p), ap.a);
}

double count_pmf(double rate_total, std::uint64_t K, std::uint64_t count) {
  if (!(rate_total >= 0.0)) {
    throw std::domain_error("count_pmf: rate_total must be >= 0");
  }
  if (K == 0) {
    throw std::domain_error("count_pmf: K must be positive");
  }
  const double lambda = rate_total / static_cast<double>(K);
  if (lambda == 0.0) return count == 0 ? 1.0 : 0.0;
  const double c = static_cast<double>(count);
  return std::exp(c * std::log(lambda) - lambda - std::lgamma(c + 1.0));
}

} // namespace oppsim::pp
