#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcddpm/diffusion.hpp"
#include "mcddpm/rng.hpp"
#include "mcddpm/schedule.hpp"
#include "mcddpm/tensor.hpp"

namespace mcddpm {

/// Where the network's two output channels live before the M^c projection.
enum class OutputDomain : std::uint8_t {
  Image,        // dft2 is applied to the output, then masked
  Measurement,  // the output is masked directly
};

OutputDomain parse_output_domain(std::string_view s);
const char* to_string(OutputDomain d);

/// Residual convolutional noise predictor.
///
/// Layer 0 maps the 4 input channels (real/imag of idft2(y_t + y_M) and of idft2(y_M))
/// to `hidden` channels; layers 1..depth-2 are residual hidden blocks; the last layer
/// maps to 2 channels. Every hidden layer receives a learned projection of the
/// sinusoidal time embedding as a per-channel offset before its SiLU.
///
/// The conv stack is wrapped in the Gaussian denoiser for data of scale `data_scale`:
///   f = c_out(t) * net + gain * c_skip(t) * idft2(y_t)
/// with c_skip = bar_beta / (bar_alpha^2 s^2 + bar_beta^2) and
/// c_out = bar_alpha s / sqrt(bar_alpha^2 s^2 + bar_beta^2), taken from the cosine-halved
/// schedule with `steps` steps. `gain` is a learned scalar.
struct ArchConfig {
  int height = 32;
  int width = 32;
  int depth = 3;
  int hidden = 32;
  int kernel = 3;
  int time_dim = 32;
  OutputDomain output_domain = OutputDomain::Image;
  int steps = 128;
  double data_scale = 0.25;

  static constexpr int kInChannels = 4;
  static constexpr int kOutChannels = 2;

  /// "linear" (single conv), "toy" (3 layers, width 32) or "small" (5 layers, width 48).
  static ArchConfig preset(std::string_view name, int height, int width);
  static const std::vector<std::string>& preset_names();

  void validate() const;
  bool operator==(const ArchConfig&) const = default;
};

struct DenoiserParams {
  ArchConfig arch;
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  std::size_t parameter_count() const;
  bool all_finite() const;
  bool operator==(const DenoiserParams&) const = default;
};

/// Fan-in scaled normal weights, zero biases, unit skip gain.
DenoiserParams init_network(const ArchConfig& arch, RngStream& rng);
/// Same shapes as init_network, every entry zero.
DenoiserParams zero_network(const ArchConfig& arch);

/// [sin(t w_0..w_{d/2-1}), cos(t w_0..w_{d/2-1})], w_k geometric from 1 down to 1e-4.
std::vector<double> time_embedding(double t, int dim);

struct Preconditioning {
  double c_skip = 0.0;
  double c_out = 0.0;
};
Preconditioning preconditioning(const ArchConfig& arch, int t);

/// eps_theta = M^c f(concat(idft2(y_t + y_M), idft2(y_M)), t), t in 1..arch.steps.
PartialKSpace eps_theta(const DenoiserParams& params, const DiffusionState& y_t, const PartialKSpace& y_m, int t);

class NetworkPredictor : public NoisePredictor {
 public:
  explicit NetworkPredictor(const DenoiserParams& params) : params_(params) {}
  PartialKSpace predict(const DiffusionState& state, const PartialKSpace& y_m, int model_t) const override {
    return eps_theta(params_, state, y_m, model_t);
  }
  bool accepts(int height, int width) const override {
    return height == params_.arch.height && width == params_.arch.width;
  }

 private:
  const DenoiserParams& params_;
};

/// One training example: clean non-sampled data, the acquired data, step and noise.
struct TrainItem {
  PartialKSpace y0_c;
  PartialKSpace y_m;
  int t = 1;
  PartialKSpace noise;
};

/// Vlb multiplies each item by vlb_weight(t); where sigma_t = 0 it uses sigma_t = beta_t.
enum class LossWeighting : std::uint8_t { Simple, Vlb };

struct LossAndGrad {
  double loss = 0.0;
  std::vector<Tensor> grads;  // aligned with DenoiserParams::tensors
};

/// Batch-mean loss and its gradient. Items are evaluated in parallel and reduced in
/// item order, so the result does not depend on the thread count.
LossAndGrad loss_and_grad(const DenoiserParams& params, std::span<const TrainItem> batch,
                          const DiffusionSchedule& schedule, LossWeighting weighting = LossWeighting::Simple);

/// Forward-only batch-mean loss.
double batch_loss(const DenoiserParams& params, std::span<const TrainItem> batch, const DiffusionSchedule& schedule,
                  LossWeighting weighting = LossWeighting::Simple);

/// Max relative error between analytic and central-difference gradients over
/// `n_probes` randomly chosen parameters. Denominators are floored at 1e-8.
double finite_diff_check(const DenoiserParams& params, std::span<const TrainItem> batch,
                         const DiffusionSchedule& schedule, int n_probes, double h, RngStream& rng);

}  // namespace mcddpm
