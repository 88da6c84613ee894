#pragma once

#include <cstdint>
#include <vector>

#include "mcddpm/tensor.hpp"

namespace mcddpm {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  bool operator==(const AdamWConfig&) const = default;
};

struct OptimizerState {
  AdamWConfig hp;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  /// Zero moments shaped like `params`.
  static OptimizerState for_params(const std::vector<Tensor>& params, AdamWConfig hp = {});
  bool operator==(const OptimizerState&) const = default;
};

/// Decoupled weight decay, then the bias-corrected Adam update. Updates in place.
void adamw_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, OptimizerState& state);

}  // namespace mcddpm
