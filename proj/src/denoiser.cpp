#include "mcddpm/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "mcddpm/autodiff.hpp"
#include "mcddpm/error.hpp"

namespace mcddpm {

OutputDomain parse_output_domain(std::string_view s) {
  if (s == "image") return OutputDomain::Image;
  if (s == "measurement") return OutputDomain::Measurement;
  fail(ErrorKind::InvalidArgument, "unknown output domain '" + std::string(s) + "' (image|measurement)");
}

const char* to_string(OutputDomain d) { return d == OutputDomain::Image ? "image" : "measurement"; }

ArchConfig ArchConfig::preset(std::string_view name, int height, int width) {
  ArchConfig a;
  a.height = height;
  a.width = width;
  if (name == "linear") {
    a.depth = 1;
  } else if (name == "toy") {
    a.depth = 3;
    a.hidden = 32;
  } else if (name == "small") {
    a.depth = 5;
    a.hidden = 48;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown architecture preset '" + std::string(name) + "'");
  }
  a.validate();
  return a;
}

const std::vector<std::string>& ArchConfig::preset_names() {
  static const std::vector<std::string> names = {"linear", "toy", "small"};
  return names;
}

void ArchConfig::validate() const {
  require(height >= 1 && width >= 1, ErrorKind::InvalidArgument, "ArchConfig: grid size must be positive");
  require(depth >= 1, ErrorKind::InvalidArgument, "ArchConfig: depth must be at least 1");
  require(hidden >= 1, ErrorKind::InvalidArgument, "ArchConfig: hidden width must be at least 1");
  require(kernel >= 1 && kernel % 2 == 1, ErrorKind::InvalidArgument, "ArchConfig: kernel must be odd");
  require(time_dim >= 2 && time_dim % 2 == 0, ErrorKind::InvalidArgument, "ArchConfig: time_dim must be even");
  require(steps >= 1, ErrorKind::InvalidArgument, "ArchConfig: steps must be at least 1");
  require(data_scale > 0.0 && std::isfinite(data_scale), ErrorKind::InvalidArgument,
          "ArchConfig: data_scale must be positive");
}

std::size_t DenoiserParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

bool DenoiserParams::all_finite() const {
  return std::all_of(tensors.begin(), tensors.end(), [](const Tensor& t) { return t.all_finite(); });
}

namespace {

int layer_in(const ArchConfig& a, int l) { return l == 0 ? ArchConfig::kInChannels : a.hidden; }
int layer_out(const ArchConfig& a, int l) { return l == a.depth - 1 ? ArchConfig::kOutChannels : a.hidden; }

DenoiserParams shaped(const ArchConfig& arch) {
  arch.validate();
  DenoiserParams p;
  p.arch = arch;
  const int k = arch.kernel;
  for (int l = 0; l < arch.depth; ++l) {
    const std::string conv = "conv" + std::to_string(l);
    p.names.push_back(conv + ".weight");
    p.tensors.emplace_back(std::vector<int>{layer_out(arch, l), layer_in(arch, l), k, k});
    p.names.push_back(conv + ".bias");
    p.tensors.emplace_back(std::vector<int>{layer_out(arch, l)});
    if (l < arch.depth - 1) {
      const std::string temb = "temb" + std::to_string(l);
      p.names.push_back(temb + ".weight");
      p.tensors.emplace_back(std::vector<int>{arch.hidden, arch.time_dim});
      p.names.push_back(temb + ".bias");
      p.tensors.emplace_back(std::vector<int>{arch.hidden});
    }
  }
  p.names.push_back("skip.gain");
  p.tensors.emplace_back(std::vector<int>{1});
  return p;
}

}  // namespace

DenoiserParams zero_network(const ArchConfig& arch) { return shaped(arch); }

DenoiserParams init_network(const ArchConfig& arch, RngStream& rng) {
  DenoiserParams p = shaped(arch);
  p.tensors.back()[0] = 1.0;
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    Tensor& t = p.tensors[i];
    if (t.rank() == 1) continue;  // biases and the gain
    const int fan_in = int(t.size() / std::size_t(t.dim(0)));
    const double std_dev = 1.0 / std::sqrt(double(fan_in));
    for (auto& v : t.data) v = std_dev * rng.normal();
  }
  return p;
}

std::vector<double> time_embedding(double t, int dim) {
  require(dim >= 2 && dim % 2 == 0, ErrorKind::InvalidArgument, "time_embedding: dim must be even");
  require(t >= 0.0, ErrorKind::InvalidArgument, "time_embedding: t must be non-negative");
  const int half = dim / 2;
  std::vector<double> e(dim);
  for (int k = 0; k < half; ++k) {
    const double freq = half == 1 ? 1.0 : std::pow(1e-4, double(k) / double(half - 1));
    e[k] = std::sin(t * freq);
    e[half + k] = std::cos(t * freq);
  }
  return e;
}

namespace {

const DiffusionSchedule& cached_schedule(int steps) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<DiffusionSchedule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[steps];
  if (!slot) slot = std::make_unique<DiffusionSchedule>(build_cosine_halved(steps));
  return *slot;
}

}  // namespace

Preconditioning preconditioning(const ArchConfig& arch, int t) {
  require(t >= 1 && t <= arch.steps, ErrorKind::InvalidArgument, "eps_theta: timestep outside 1..steps");
  const DiffusionSchedule& s = cached_schedule(arch.steps);
  const double a = s.bar_alpha(t) * arch.data_scale, b = s.bar_beta(t);
  const double var = a * a + b * b;
  return {b / var, a / std::sqrt(var)};
}

namespace {

void check_inputs(const ArchConfig& arch, const PartialKSpace& y_t, const PartialKSpace& y_m) {
  require(y_t.side() == Side::NonSampled && y_m.side() == Side::Sampled, ErrorKind::MaskMismatch,
          "eps_theta: expects y_t on M^c and y_M on M");
  require(y_t.mask() == y_m.mask(), ErrorKind::MaskMismatch, "eps_theta: y_t and y_M use different masks");
  require(y_t.height() == arch.height && y_t.width() == arch.width && y_m.grid().same_shape(y_t.grid()),
          ErrorKind::ShapeMismatch, "eps_theta: grid size does not match the architecture");
}

// Network input: real/imag planes of idft2(y_t + y_M) and idft2(y_M).
Tensor network_input(const PartialKSpace& y_t, const PartialKSpace& y_m) {
  const ComplexGrid full = idft2(y_t.grid() + y_m.grid());
  const ComplexGrid zf = idft2(y_m.grid());
  const std::size_t plane = full.size();
  Tensor in({ArchConfig::kInChannels, full.height(), full.width()});
  for (std::size_t i = 0; i < plane; ++i) {
    in[i] = full[i].real();
    in[plane + i] = full[i].imag();
    in[2 * plane + i] = zf[i].real();
    in[3 * plane + i] = zf[i].imag();
  }
  return in;
}

Tensor planes_of(const ComplexGrid& g);

std::vector<std::uint8_t> non_sampled_raw_columns(const Mask& mask) {
  std::vector<std::uint8_t> keep(mask.width());
  for (int c = 0; c < mask.width(); ++c) keep[c] = mask.sampled_raw(c) ? 0 : 1;
  return keep;
}

// Builds the full eps_theta graph and returns the masked [2,H,W] output.
ad::Var forward(ad::Tape& tape, const DenoiserParams& p, std::span<const ad::Var> vars, Tensor input,
                const PartialKSpace& y_t, int t) {
  const ArchConfig& a = p.arch;
  const Preconditioning pc = preconditioning(a, t);
  const ad::Var emb = tape.constant(Tensor({a.time_dim}, time_embedding(double(t), a.time_dim)));
  ad::Var h = tape.constant(std::move(input));
  std::size_t slot = 0;
  for (int l = 0; l < a.depth; ++l) {
    const ad::Var w = vars[slot++];
    const ad::Var b = vars[slot++];
    ad::Var z = ad::conv2d(tape, h, w, b);
    if (l == a.depth - 1) {
      h = z;
      break;
    }
    const ad::Var tw = vars[slot++];
    const ad::Var tb = vars[slot++];
    z = ad::add_channel_bias(tape, z, ad::linear(tape, tw, tb, emb));
    const ad::Var act = ad::silu(tape, z);
    h = l == 0 ? act : ad::add(tape, h, act);
  }
  h = ad::scale(tape, h, pc.c_out);
  if (a.output_domain == OutputDomain::Image) h = ad::unitary_dft2(tape, h, -1);
  // idft2 then dft2 of the skip path is the identity, so it enters in k-space directly.
  Tensor skip = planes_of(y_t.grid());
  for (auto& v : skip.data) v *= pc.c_skip;
  h = ad::add(tape, h, ad::gain(tape, vars[slot], tape.constant(std::move(skip))));
  return ad::column_mask(tape, h, non_sampled_raw_columns(y_t.mask()));
}

std::vector<ad::Var> bind(ad::Tape& tape, const DenoiserParams& p, bool trainable) {
  std::vector<ad::Var> vars;
  vars.reserve(p.tensors.size());
  for (const auto& t : p.tensors) vars.push_back(trainable ? tape.variable(t) : tape.constant(t));
  return vars;
}

Tensor planes_of(const ComplexGrid& g) {
  const std::size_t plane = g.size();
  Tensor out({2, g.height(), g.width()});
  for (std::size_t i = 0; i < plane; ++i) {
    out[i] = g[i].real();
    out[plane + i] = g[i].imag();
  }
  return out;
}

ComplexGrid grid_of(const Tensor& planes) {
  const int h = planes.dim(1), w = planes.dim(2);
  const std::size_t plane = std::size_t(h) * w;
  ComplexGrid g(h, w);
  for (std::size_t i = 0; i < plane; ++i) g[i] = {planes[i], planes[plane + i]};
  return g;
}

struct ItemResult {
  double loss = 0.0;
  std::vector<Tensor> grads;
};

// At t = 1 the posterior rule has sigma_1 = 0; the decoder term is weighted with sigma_1 = beta_1.
double loss_weight(int t, const DiffusionSchedule& s) {
  if (s.sigma(t) > 0.0) return vlb_weight(t, s);
  const double a = s.alpha(t) * s.bar_beta(t);
  return s.beta(t) * s.beta(t) / (2.0 * a * a);
}

ItemResult evaluate_item(const DenoiserParams& p, const TrainItem& item, const DiffusionSchedule& s,
                         LossWeighting weighting, bool with_grad) {
  require(item.noise.compatible(item.y0_c), ErrorKind::MaskMismatch, "loss: noise and y0_c differ in mask or shape");
  const DiffusionState y_t = q_sample(item.y0_c, item.t, s, item.noise);
  check_inputs(p.arch, y_t.y, item.y_m);
  ad::Tape tape;
  const auto vars = bind(tape, p, with_grad);
  const ad::Var out = forward(tape, p, vars, network_input(y_t.y, item.y_m), y_t.y, s.model_timestep(item.t));
  ad::Var loss = ad::squared_error(tape, out, planes_of(item.noise.grid()));
  if (weighting == LossWeighting::Vlb) loss = ad::scale(tape, loss, loss_weight(item.t, s));
  ItemResult r;
  r.loss = tape.value(loss)[0];
  if (with_grad) {
    tape.backward(loss);
    r.grads.reserve(vars.size());
    for (const auto& v : vars) r.grads.push_back(tape.grad(v));
  }
  return r;
}

std::vector<ItemResult> evaluate_batch(const DenoiserParams& p, std::span<const TrainItem> batch,
                                       const DiffusionSchedule& s, LossWeighting weighting, bool with_grad) {
  require(!batch.empty(), ErrorKind::InvalidArgument, "loss: empty batch");
  require(s.model_timestep(s.steps()) == p.arch.steps, ErrorKind::InvalidArgument,
          "loss: schedule length differs from the network's");
  std::vector<ItemResult> results(batch.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < batch.size(); ++i) {
    try {
      results[i] = evaluate_item(p, batch[i], s, weighting, with_grad);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace

PartialKSpace eps_theta(const DenoiserParams& params, const DiffusionState& y_t, const PartialKSpace& y_m, int t) {
  check_inputs(params.arch, y_t.y, y_m);
  ad::Tape tape;
  const auto vars = bind(tape, params, false);
  const ad::Var out = forward(tape, params, vars, network_input(y_t.y, y_m), y_t.y, t);
  return PartialKSpace(grid_of(tape.value(out)), y_m.mask(), Side::NonSampled);
}

LossAndGrad loss_and_grad(const DenoiserParams& params, std::span<const TrainItem> batch,
                          const DiffusionSchedule& schedule, LossWeighting weighting) {
  auto results = evaluate_batch(params, batch, schedule, weighting, true);
  const double inv = 1.0 / double(batch.size());
  LossAndGrad out;
  out.grads.reserve(params.tensors.size());
  for (const auto& t : params.tensors) out.grads.push_back(Tensor::zeros_like(t));
  for (const auto& r : results) {
    out.loss += r.loss;
    for (std::size_t k = 0; k < r.grads.size(); ++k)
      for (std::size_t i = 0; i < r.grads[k].size(); ++i) out.grads[k][i] += r.grads[k][i];
  }
  out.loss *= inv;
  for (auto& g : out.grads)
    for (auto& v : g.data) v *= inv;
  return out;
}

double batch_loss(const DenoiserParams& params, std::span<const TrainItem> batch, const DiffusionSchedule& schedule,
                  LossWeighting weighting) {
  const auto results = evaluate_batch(params, batch, schedule, weighting, false);
  double acc = 0.0;
  for (const auto& r : results) acc += r.loss;
  return acc / double(batch.size());
}

double finite_diff_check(const DenoiserParams& params, std::span<const TrainItem> batch,
                         const DiffusionSchedule& schedule, int n_probes, double h, RngStream& rng) {
  require(n_probes >= 1 && h > 0.0, ErrorKind::InvalidArgument, "finite_diff_check: need n_probes >= 1 and h > 0");
  const LossAndGrad analytic = loss_and_grad(params, batch, schedule);
  const std::size_t total = params.parameter_count();
  DenoiserParams probe = params;
  double worst = 0.0;
  for (int n = 0; n < n_probes; ++n) {
    std::size_t flat = rng.below(total);
    std::size_t k = 0;
    while (flat >= params.tensors[k].size()) flat -= params.tensors[k++].size();
    const double orig = params.tensors[k][flat];
    probe.tensors[k][flat] = orig + h;
    const double up = batch_loss(probe, batch, schedule);
    probe.tensors[k][flat] = orig - h;
    const double down = batch_loss(probe, batch, schedule);
    probe.tensors[k][flat] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.grads[k][flat];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace mcddpm
