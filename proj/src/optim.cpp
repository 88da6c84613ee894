#include "mcddpm/optim.hpp"

#include <cmath>

#include "mcddpm/error.hpp"

namespace mcddpm {

OptimizerState OptimizerState::for_params(const std::vector<Tensor>& params, AdamWConfig hp) {
  OptimizerState s;
  s.hp = hp;
  for (const auto& p : params) {
    s.m.push_back(Tensor::zeros_like(p));
    s.v.push_back(Tensor::zeros_like(p));
  }
  return s;
}

void adamw_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, OptimizerState& state) {
  require(grads.size() == params.size() && state.m.size() == params.size() && state.v.size() == params.size(),
          ErrorKind::ShapeMismatch, "adamw_step: tensor count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k)
    require(grads[k].same_shape(params[k]) && state.m[k].same_shape(params[k]) && state.v[k].same_shape(params[k]),
            ErrorKind::ShapeMismatch, "adamw_step: tensor shape mismatch");

  const AdamWConfig& hp = state.hp;
  state.step += 1;
  const double t = double(state.step);
  const double c1 = 1.0 - std::pow(hp.beta1, t);
  const double c2 = 1.0 - std::pow(hp.beta2, t);
  const double decay = 1.0 - hp.learning_rate * hp.weight_decay;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].data;
    auto& m = state.m[k].data;
    auto& v = state.v[k].data;
    const auto& g = grads[k].data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] *= decay;
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= hp.learning_rate * m_hat / (std::sqrt(v_hat) + hp.eps);
    }
  }
}

}  // namespace mcddpm
