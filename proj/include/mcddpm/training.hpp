#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mcddpm/checkpoint.hpp"
#include "mcddpm/denoiser.hpp"
#include "mcddpm/measurement.hpp"
#include "mcddpm/optim.hpp"

namespace mcddpm {

enum class MaskPolicy : std::uint8_t {
  Fixed,    // one mask for the whole run
  PerItem,  // a fresh random mask for every batch item
};

MaskPolicy parse_mask_policy(std::string_view s);
const char* to_string(MaskPolicy p);

struct TrainConfig {
  ArchConfig arch;
  int steps_T = 128;
  SigmaRule sigma_rule = SigmaRule::Posterior;
  AdamWConfig adam;
  int batch_size = 8;
  int train_steps = 3000;
  MaskPolicy mask_policy = MaskPolicy::Fixed;
  double acceleration = 4.0;
  double center_fraction = kDefaultCenterFraction4x;
  LossWeighting weighting = LossWeighting::Simple;
  std::uint64_t seed = 0;
  /// Draw one batch from a stream of its own and reuse it at every step.
  bool overfit = false;
};

/// Fresh training state: initialised network, zero moments, step 0.
Checkpoint init_training(const TrainConfig& config);

using StepCallback = std::function<void(std::uint64_t step, double loss, const Checkpoint& state)>;

/// Runs the training loop from `state.step` up to `config.train_steps`.
///
/// Each step draws, for every batch item in order: a dataset index, a mask (PerItem
/// only), t uniform on {1..T}, then unit noise on M^c. All draws come from the stream
/// saved in `state.rng`, so stopping, checkpointing and resuming reproduces the
/// uninterrupted run exactly. In overfit mode the single batch comes from a stream
/// derived from `config.seed` instead. `on_step` sees the state after each update.
void train(Checkpoint& state, const std::vector<ComplexGrid>& dataset, const std::optional<Mask>& fixed_mask,
           const TrainConfig& config, const StepCallback& on_step = {});

}  // namespace mcddpm
