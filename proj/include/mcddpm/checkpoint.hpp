#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "mcddpm/denoiser.hpp"
#include "mcddpm/optim.hpp"
#include "mcddpm/rng.hpp"
#include "mcddpm/schedule.hpp"

namespace mcddpm {

/// Everything needed to resume training or to sample from a trained model.
///
/// File layout: "MCDK" | u16 version | header | u32 section count | sections.
/// The header holds the architecture record (including T and the data scale), the sigma
/// rule of the training schedule, the step counter, the rng state and the AdamW hyperparameters. Each section is a
/// named f64 tensor: parameters under their own names, moments under "adam.m/<name>"
/// and "adam.v/<name>".
struct Checkpoint {
  DenoiserParams params;
  OptimizerState opt;
  int schedule_steps = 0;
  SigmaRule sigma_rule = SigmaRule::Posterior;
  std::uint64_t step = 0;
  RngStream::State rng;

  bool operator==(const Checkpoint&) const = default;
};

constexpr std::uint16_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// With `expected`, a differing architecture record is rejected.
Checkpoint read_checkpoint(const std::filesystem::path& path, const std::optional<ArchConfig>& expected = std::nullopt);

}  // namespace mcddpm
