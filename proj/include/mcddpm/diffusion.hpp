#pragma once

#include <cstdint>
#include <vector>

#include "mcddpm/measurement.hpp"
#include "mcddpm/rng.hpp"
#include "mcddpm/schedule.hpp"

namespace mcddpm {

/// y_{M^c,t}: the noised non-sampled measurements at step t.
struct DiffusionState {
  PartialKSpace y;
  int t = 0;
};

/// Anything that predicts the injected noise from (y_t, y_M, t). `model_t` is the
/// timestep the predictor was trained on, which differs from the sampling step after
/// respacing.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual PartialKSpace predict(const DiffusionState& state, const PartialKSpace& y_m, int model_t) const = 0;
  /// Whether this predictor can run on a height x width grid.
  virtual bool accepts(int height, int width) const = 0;
};

/// Closed-form marginal draw: bar_alpha_t y0 + bar_beta_t noise. t = 0 returns y0.
DiffusionState q_sample(const PartialKSpace& y0_c, int t, const DiffusionSchedule& schedule,
                        const PartialKSpace& noise);

/// One forward transition: alpha_t y_{t-1} + beta_t noise, t = prev.t + 1.
DiffusionState chain_step(const DiffusionState& prev, const DiffusionSchedule& schedule,
                          const PartialKSpace& noise);

struct Posterior {
  PartialKSpace mu_tilde;
  double beta_tilde = 0.0;
};

/// q(y_{t-1} | y_t, y_0): mean and standard deviation.
Posterior posterior(const DiffusionState& y_t, const PartialKSpace& y0_c, const DiffusionSchedule& schedule);

/// (1 / alpha_t) (y_t - beta_t^2 / bar_beta_t * eps_hat).
PartialKSpace mu_from_eps(const DiffusionState& y_t, const PartialKSpace& eps_hat,
                          const DiffusionSchedule& schedule);

/// Squared error summed over both real channels of every entry.
double simple_loss(const PartialKSpace& eps, const PartialKSpace& eps_hat);
/// vlb_weight(t) * simple_loss.
double vlb_loss(const PartialKSpace& eps, const PartialKSpace& eps_hat, int t, const DiffusionSchedule& schedule);

/// y_{t-1} = mu_from_eps(y_t, eps_hat) + sigma_t z. At t = 1 z must be all zero.
DiffusionState reverse_step(const DiffusionState& y_t, const PartialKSpace& eps_hat,
                            const DiffusionSchedule& schedule, const PartialKSpace& z);

struct SampleOptions {
  int n_samples = 1;
  std::uint64_t seed = 0;
  /// Chain i uses stream first_stream + i.
  std::uint64_t first_stream = 1;
};

/// Posterior reconstructions x = idft2(y_M + y_{M^c,0}), one per independent chain.
/// Chains run in parallel; results are ordered by chain index.
std::vector<ComplexGrid> sample(const NoisePredictor& model, const PartialKSpace& y_m,
                                const DiffusionSchedule& schedule, const SampleOptions& options);

/// A single chain with an explicit stream.
ComplexGrid sample_chain(const NoisePredictor& model, const PartialKSpace& y_m,
                         const DiffusionSchedule& schedule, RngStream rng);

}  // namespace mcddpm
