#include "mcddpm/diffusion.hpp"

#include <string>

#include "mcddpm/error.hpp"

namespace mcddpm {

namespace {

void check_step(int t, const DiffusionSchedule& s, int lo, const char* what) {
  if (t < lo || t > s.steps()) fail(ErrorKind::InvalidArgument, std::string(what) + ": step out of range");
}

void check_non_sampled(const PartialKSpace& p, const char* what) {
  require(p.side() == Side::NonSampled, ErrorKind::MaskMismatch,
          (std::string(what) + ": expected a non-sampled (M^c) partial").c_str());
}

}  // namespace

DiffusionState q_sample(const PartialKSpace& y0_c, int t, const DiffusionSchedule& s, const PartialKSpace& noise) {
  check_step(t, s, 0, "q_sample");
  check_non_sampled(y0_c, "q_sample");
  return {axpby(s.bar_alpha(t), y0_c, s.bar_beta(t), noise), t};
}

DiffusionState chain_step(const DiffusionState& prev, const DiffusionSchedule& s, const PartialKSpace& noise) {
  const int t = prev.t + 1;
  check_step(t, s, 1, "chain_step");
  check_non_sampled(prev.y, "chain_step");
  return {axpby(s.alpha(t), prev.y, s.beta(t), noise), t};
}

Posterior posterior(const DiffusionState& y_t, const PartialKSpace& y0_c, const DiffusionSchedule& s) {
  const int t = y_t.t;
  check_step(t, s, 1, "posterior");
  check_non_sampled(y0_c, "posterior");
  const double bb_t = s.bar_beta(t) * s.bar_beta(t);
  const double bb_prev = s.bar_beta(t - 1) * s.bar_beta(t - 1);
  const double c_t = s.alpha(t) * bb_prev / bb_t;
  const double c_0 = s.bar_alpha(t - 1) * s.beta(t) * s.beta(t) / bb_t;
  return {axpby(c_t, y_t.y, c_0, y0_c), s.tilde_beta(t)};
}

PartialKSpace mu_from_eps(const DiffusionState& y_t, const PartialKSpace& eps_hat, const DiffusionSchedule& s) {
  const int t = y_t.t;
  check_step(t, s, 1, "mu_from_eps");
  const double inv_alpha = 1.0 / s.alpha(t);
  const double eps_coef = s.beta(t) * s.beta(t) / s.bar_beta(t);
  return axpby(inv_alpha, y_t.y, -inv_alpha * eps_coef, eps_hat);
}

double simple_loss(const PartialKSpace& eps, const PartialKSpace& eps_hat) {
  require(eps.compatible(eps_hat), ErrorKind::MaskMismatch, "simple_loss: mask, side or shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < eps.grid().size(); ++i) acc += std::norm(eps.grid()[i] - eps_hat.grid()[i]);
  return acc;
}

double vlb_loss(const PartialKSpace& eps, const PartialKSpace& eps_hat, int t, const DiffusionSchedule& s) {
  return vlb_weight(t, s) * simple_loss(eps, eps_hat);
}

DiffusionState reverse_step(const DiffusionState& y_t, const PartialKSpace& eps_hat, const DiffusionSchedule& s,
                            const PartialKSpace& z) {
  const int t = y_t.t;
  check_step(t, s, 1, "reverse_step");
  if (t == 1) {
    for (const auto& v : z.grid().data())
      if (v != cplx{}) fail(ErrorKind::InvalidArgument, "reverse_step: z must be zero at t = 1");
  }
  PartialKSpace mu = mu_from_eps(y_t, eps_hat, s);
  return {axpby(1.0, mu, s.sigma(t), z), t - 1};
}

ComplexGrid sample_chain(const NoisePredictor& model, const PartialKSpace& y_m, const DiffusionSchedule& s,
                         RngStream rng) {
  require(y_m.side() == Side::Sampled, ErrorKind::MaskMismatch, "sample: y_M must be a sampled partial");
  const Mask& mask = y_m.mask();
  const int h = y_m.height();
  if (mask.fully_sampled()) return idft2(y_m.grid());

  const int steps = s.steps();
  DiffusionState state{scaled(s.bar_beta(steps), masked_noise(mask, h, rng)), steps};
  const PartialKSpace zero = PartialKSpace::zeros(h, mask, Side::NonSampled);
  for (int t = steps; t >= 1; --t) {
    PartialKSpace z = t > 1 ? masked_noise(mask, h, rng) : zero;
    PartialKSpace eps_hat = model.predict(state, y_m, s.model_timestep(t));
    state = reverse_step(state, eps_hat, s, z);
  }
  return merge_and_invert(y_m, state.y);
}

std::vector<ComplexGrid> sample(const NoisePredictor& model, const PartialKSpace& y_m, const DiffusionSchedule& s,
                                const SampleOptions& options) {
  require(options.n_samples >= 1, ErrorKind::InvalidArgument, "sample: n_samples must be at least 1");
  require(model.accepts(y_m.height(), y_m.width()), ErrorKind::ShapeMismatch,
          "sample: predictor does not accept this grid size");
  std::vector<ComplexGrid> out(options.n_samples);
  const RngStream base(options.seed, 0);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < options.n_samples; ++i) {
    try {
      out[i] = sample_chain(model, y_m, s, base.split(options.first_stream + std::uint64_t(i)));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace mcddpm
