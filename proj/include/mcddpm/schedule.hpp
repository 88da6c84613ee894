#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mcddpm {

/// How the reverse-step standard deviation sigma_t is chosen.
enum class SigmaRule : std::uint8_t {
  Posterior,  // sigma_t = tilde_beta_t (default; sigma_1 = 0)
  Beta,       // sigma_t = beta_t
};

SigmaRule parse_sigma_rule(std::string_view s);
const char* to_string(SigmaRule rule);

/// Arrays indexed by step, t = 0..T. Entry 0 of alpha, beta, tilde_beta and sigma is unused.
struct DerivedCoefficients {
  std::vector<double> bar_alpha;   // prod_{i<=t} alpha_i, bar_alpha[0] = 1
  std::vector<double> bar_beta;    // sqrt(sum_{i<=t} (bar_alpha_t / bar_alpha_i)^2 beta_i^2)
  std::vector<double> tilde_beta;  // beta_t bar_beta_{t-1} / bar_beta_t
  std::vector<double> sigma;
};

/// alpha and beta are the per-step coefficients for t = 1..T (index 0 of the span is t = 1).
DerivedCoefficients derive_coefficients(std::span<const double> alpha, std::span<const double> beta,
                                        SigmaRule rule);

/// Variance schedule {alpha_t, beta_t}, t = 1..T, with alpha_t^2 + beta_t^2 free.
///
/// A respaced schedule keeps a map from its own step k to the timestep of the schedule
/// it was cut from; `model_timestep(k)` is what the noise predictor is conditioned on.
class DiffusionSchedule {
 public:
  DiffusionSchedule(std::vector<double> alpha, std::vector<double> beta, SigmaRule rule,
                    std::vector<int> model_timesteps = {});

  int steps() const { return int(alpha_.size()) - 1; }
  SigmaRule sigma_rule() const { return rule_; }

  double alpha(int t) const { return alpha_[t]; }
  double beta(int t) const { return beta_[t]; }
  double bar_alpha(int t) const { return derived_.bar_alpha[t]; }
  double bar_beta(int t) const { return derived_.bar_beta[t]; }
  double tilde_beta(int t) const { return derived_.tilde_beta[t]; }
  double sigma(int t) const { return derived_.sigma[t]; }
  int model_timestep(int t) const { return timesteps_[t]; }

  std::span<const double> alphas() const { return std::span(alpha_).subspan(1); }
  std::span<const double> betas() const { return std::span(beta_).subspan(1); }

  DiffusionSchedule with_sigma_rule(SigmaRule rule) const;

  bool operator==(const DiffusionSchedule&) const;

 private:
  std::vector<double> alpha_;  // [0] = 1
  std::vector<double> beta_;   // [0] = 0
  std::vector<int> timesteps_;
  SigmaRule rule_;
  DerivedCoefficients derived_;
};

/// Cosine schedule (offset 0.008, per-step variance clipped at 0.999) with alpha_t =
/// sqrt(1 - b_t) and beta_t = 0.5 sqrt(b_t), which drives bar_beta_T towards 0.5.
DiffusionSchedule build_cosine_halved(int steps, SigmaRule rule = SigmaRule::Posterior);

/// Weight turning the simple loss at step t into the variational-bound term:
/// beta_t^4 / (2 alpha_t^2 bar_beta_t^2 sigma_t^2).
double vlb_weight(int t, const DiffusionSchedule& schedule);

/// Keep `k` evenly spaced timesteps 0 = s_0 < ... < s_k = T and rebuild per-interval
/// coefficients so that (bar_alpha, bar_beta) at every kept index is unchanged.
DiffusionSchedule respace(const DiffusionSchedule& schedule, int k);

}  // namespace mcddpm
