#include "mcddpm/training.hpp"

#include <cmath>
#include <string>

#include "mcddpm/error.hpp"

namespace mcddpm {

MaskPolicy parse_mask_policy(std::string_view s) {
  if (s == "fixed") return MaskPolicy::Fixed;
  if (s == "per_item") return MaskPolicy::PerItem;
  fail(ErrorKind::InvalidArgument, "unknown mask policy '" + std::string(s) + "' (fixed|per_item)");
}

const char* to_string(MaskPolicy p) { return p == MaskPolicy::Fixed ? "fixed" : "per_item"; }

Checkpoint init_training(const TrainConfig& config) {
  require(config.steps_T >= 1, ErrorKind::InvalidArgument, "train: T must be at least 1");
  require(config.arch.steps == config.steps_T, ErrorKind::InvalidArgument,
          "train: the architecture's step count must equal T");
  RngStream init_rng = RngStream(config.seed, 0).split(0x1417);
  Checkpoint c;
  c.params = init_network(config.arch, init_rng);
  c.opt = OptimizerState::for_params(c.params.tensors, config.adam);
  c.schedule_steps = config.steps_T;
  c.sigma_rule = config.sigma_rule;
  c.step = 0;
  c.rng = RngStream(config.seed, 0).split(0x7261).state();
  return c;
}

void train(Checkpoint& state, const std::vector<ComplexGrid>& dataset, const std::optional<Mask>& fixed_mask,
           const TrainConfig& config, const StepCallback& on_step) {
  require(!dataset.empty(), ErrorKind::InvalidArgument, "train: empty dataset");
  require(config.batch_size >= 1, ErrorKind::InvalidArgument, "train: batch_size must be at least 1");
  require(config.train_steps >= 0, ErrorKind::InvalidArgument, "train: train_steps must be non-negative");
  require(state.params.arch == config.arch, ErrorKind::ArchitectureMismatch,
          "train: state architecture differs from the config");
  require(state.schedule_steps == config.steps_T, ErrorKind::InvalidArgument,
          "train: state was trained with a different T");
  const int h = config.arch.height, w = config.arch.width;
  for (const auto& x : dataset)
    require(x.height() == h && x.width() == w, ErrorKind::ShapeMismatch,
            "train: dataset item size does not match the architecture");
  if (config.mask_policy == MaskPolicy::Fixed) {
    require(fixed_mask.has_value(), ErrorKind::InvalidArgument, "train: fixed mask policy needs a mask");
    require(fixed_mask->width() == w, ErrorKind::ShapeMismatch, "train: mask width does not match the images");
    require(!fixed_mask->fully_sampled(), ErrorKind::InvalidArgument,
            "train: a fully sampled mask leaves nothing to learn");
  }

  const DiffusionSchedule schedule = build_cosine_halved(config.steps_T, config.sigma_rule);
  state.opt.hp = config.adam;

  // Dataset k-space is fixed, so transform each item once.
  std::vector<ComplexGrid> spectra;
  spectra.reserve(dataset.size());
  for (const auto& x : dataset) spectra.push_back(dft2(x));

  auto draw_batch = [&](RngStream& rng) {
    std::vector<TrainItem> batch;
    for (int b = 0; b < config.batch_size; ++b) {
      const auto& k = spectra[rng.below(spectra.size())];
      const Mask mask = config.mask_policy == MaskPolicy::Fixed
                            ? *fixed_mask
                            : make_random_mask(w, config.acceleration, config.center_fraction, rng);
      const int t = 1 + int(rng.below(std::uint64_t(config.steps_T)));
      PartialKSpace noise = masked_noise(mask, h, rng);
      batch.push_back(TrainItem{PartialKSpace(k, mask, Side::NonSampled), PartialKSpace(k, mask, Side::Sampled), t,
                                std::move(noise)});
    }
    return batch;
  };

  std::vector<TrainItem> fixed;
  if (config.overfit) {
    RngStream own = RngStream(config.seed, 0).split(0x6f76);
    fixed = draw_batch(own);
  }
  RngStream rng(state.rng);
  std::vector<TrainItem> fresh;
  while (state.step < std::uint64_t(config.train_steps)) {
    if (!config.overfit) fresh = draw_batch(rng);
    const std::vector<TrainItem>& batch = config.overfit ? fixed : fresh;
    LossAndGrad lg = loss_and_grad(state.params, batch, schedule, config.weighting);
    if (!std::isfinite(lg.loss))
      fail(ErrorKind::NumericalFailure, "train: non-finite loss at step " + std::to_string(state.step + 1));
    adamw_step(state.params.tensors, lg.grads, state.opt);
    state.step += 1;
    state.rng = rng.state();
    if (on_step) on_step(state.step, lg.loss, state);
  }
  state.rng = rng.state();
}

}  // namespace mcddpm
