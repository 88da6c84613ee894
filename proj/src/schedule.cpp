#include "mcddpm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mcddpm/error.hpp"

namespace mcddpm {

SigmaRule parse_sigma_rule(std::string_view s) {
  if (s == "posterior") return SigmaRule::Posterior;
  if (s == "beta") return SigmaRule::Beta;
  fail(ErrorKind::InvalidArgument, "unknown sigma rule '" + std::string(s) + "' (posterior|beta)");
}

const char* to_string(SigmaRule rule) { return rule == SigmaRule::Posterior ? "posterior" : "beta"; }

DerivedCoefficients derive_coefficients(std::span<const double> alpha, std::span<const double> beta,
                                        SigmaRule rule) {
  require(alpha.size() == beta.size() && !alpha.empty(), ErrorKind::InvalidArgument,
          "derive_coefficients: alpha and beta must be non-empty and of equal length");
  for (std::size_t i = 0; i < alpha.size(); ++i)
    require(alpha[i] > 0.0 && beta[i] > 0.0 && std::isfinite(alpha[i]) && std::isfinite(beta[i]),
            ErrorKind::InvalidArgument, "derive_coefficients: entries must be positive and finite");

  const std::size_t n = alpha.size();
  DerivedCoefficients d;
  d.bar_alpha.assign(n + 1, 1.0);
  d.bar_beta.assign(n + 1, 0.0);
  d.tilde_beta.assign(n + 1, 0.0);
  d.sigma.assign(n + 1, 0.0);
  for (std::size_t t = 1; t <= n; ++t) d.bar_alpha[t] = d.bar_alpha[t - 1] * alpha[t - 1];

  // Defining sum; the ratio bar_alpha_t / bar_alpha_i is accumulated as a product of the
  // alphas in (i, t] so it never divides two vanishing numbers.
  for (std::size_t t = 1; t <= n; ++t) {
    double ratio = 1.0;
    double acc = 0.0;
    for (std::size_t i = t; i >= 1; --i) {
      acc += ratio * ratio * beta[i - 1] * beta[i - 1];
      ratio *= alpha[i - 1];
    }
    d.bar_beta[t] = std::sqrt(acc);
  }
  for (std::size_t t = 1; t <= n; ++t) {
    d.tilde_beta[t] = beta[t - 1] * d.bar_beta[t - 1] / d.bar_beta[t];
    d.sigma[t] = rule == SigmaRule::Posterior ? d.tilde_beta[t] : beta[t - 1];
  }
  return d;
}

DiffusionSchedule::DiffusionSchedule(std::vector<double> alpha, std::vector<double> beta, SigmaRule rule,
                                     std::vector<int> model_timesteps)
    : rule_(rule) {
  derived_ = derive_coefficients(alpha, beta, rule);
  const std::size_t n = alpha.size();
  alpha_.reserve(n + 1);
  beta_.reserve(n + 1);
  alpha_.push_back(1.0);
  beta_.push_back(0.0);
  alpha_.insert(alpha_.end(), alpha.begin(), alpha.end());
  beta_.insert(beta_.end(), beta.begin(), beta.end());
  if (model_timesteps.empty()) {
    timesteps_.resize(n + 1);
    for (std::size_t t = 0; t <= n; ++t) timesteps_[t] = int(t);
  } else {
    require(model_timesteps.size() == n + 1, ErrorKind::InvalidArgument,
            "DiffusionSchedule: timestep map must have T + 1 entries");
    timesteps_ = std::move(model_timesteps);
  }
}

DiffusionSchedule DiffusionSchedule::with_sigma_rule(SigmaRule rule) const {
  return DiffusionSchedule({alpha_.begin() + 1, alpha_.end()}, {beta_.begin() + 1, beta_.end()}, rule,
                           timesteps_);
}

bool DiffusionSchedule::operator==(const DiffusionSchedule& o) const {
  return rule_ == o.rule_ && alpha_ == o.alpha_ && beta_ == o.beta_ && timesteps_ == o.timesteps_;
}

DiffusionSchedule build_cosine_halved(int steps, SigmaRule rule) {
  require(steps >= 1, ErrorKind::InvalidArgument, "build_cosine_halved: T must be at least 1");
  constexpr double offset = 0.008;
  constexpr double max_var = 0.999;
  auto profile = [&](double u) {
    const double c = std::cos((u + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
    return c * c;
  };
  std::vector<double> alpha(steps), beta(steps);
  for (int i = 0; i < steps; ++i) {
    const double b = std::min(1.0 - profile(double(i + 1) / steps) / profile(double(i) / steps), max_var);
    alpha[i] = std::sqrt(1.0 - b);
    beta[i] = 0.5 * std::sqrt(b);
  }
  DiffusionSchedule s(std::move(alpha), std::move(beta), rule);
  if (steps >= 250) {
    if (!(s.bar_alpha(steps) <= 1e-3 && std::abs(s.bar_beta(steps) - 0.5) <= 0.05))
      fail(ErrorKind::InvariantViolation, "build_cosine_halved: terminal (bar_alpha, bar_beta) out of range");
  }
  return s;
}

double vlb_weight(int t, const DiffusionSchedule& s) {
  require(t >= 1 && t <= s.steps(), ErrorKind::InvalidArgument, "vlb_weight: t out of range");
  const double sigma = s.sigma(t);
  if (!(sigma > 0.0)) fail(ErrorKind::Domain, "vlb_weight: sigma_t is zero (t = 1 under the posterior rule)");
  const double b2 = s.beta(t) * s.beta(t);
  return b2 * b2 / (2.0 * s.alpha(t) * s.alpha(t) * s.bar_beta(t) * s.bar_beta(t) * sigma * sigma);
}

DiffusionSchedule respace(const DiffusionSchedule& s, int k) {
  const int steps = s.steps();
  require(k >= 1 && k <= steps, ErrorKind::InvalidArgument, "respace: need 1 <= K <= T");
  std::vector<int> kept(k + 1);
  for (int i = 0; i <= k; ++i) kept[i] = int(std::lround(double(i) * steps / k));

  std::vector<double> alpha(k), beta(k);
  std::vector<int> timesteps(k + 1);
  for (int i = 1; i <= k; ++i) {
    const int lo = kept[i - 1], hi = kept[i];
    timesteps[i] = s.model_timestep(hi);
    if (hi - lo == 1) {
      // Single-step interval: the original coefficients already satisfy the construction.
      alpha[i - 1] = s.alpha(hi);
      beta[i - 1] = s.beta(hi);
      continue;
    }
    double a = 1.0;
    for (int t = lo + 1; t <= hi; ++t) a *= s.alpha(t);
    const double b2 = s.bar_beta(hi) * s.bar_beta(hi) - a * a * s.bar_beta(lo) * s.bar_beta(lo);
    if (!(b2 > 0.0)) fail(ErrorKind::Domain, "respace: non-positive interval variance");
    alpha[i - 1] = a;
    beta[i - 1] = std::sqrt(b2);
  }
  timesteps[0] = s.model_timestep(0);
  return DiffusionSchedule(std::move(alpha), std::move(beta), s.sigma_rule(), std::move(timesteps));
}

}  // namespace mcddpm
