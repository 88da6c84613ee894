// Reference vs OpenMP kernels, plus end-to-end sampler throughput.
// Usage: mcddpm_bench [reps]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "mcddpm/denoiser.hpp"
#include "mcddpm/diffusion.hpp"
#include "mcddpm/kernels.hpp"
#include "mcddpm/measurement.hpp"
#include "mcddpm/numerics.hpp"

using namespace mcddpm;
namespace k = mcddpm::kernels;

namespace {

template <class F>
double time_ms(int reps, F&& f) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

std::vector<double> random_vec(std::size_t n, RngStream& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void report(const char* name, double ref, double par, double diff) {
  std::printf("%-28s %10.3f %10.3f %8.2fx  max|diff| %.2e\n", name, ref, par, ref / par, diff);
}

void bench_conv(int channels, int size, int reps) {
  RngStream rng(1, 0);
  const k::ConvShape s{channels, channels, size, size, 3};
  const auto in = random_vec(s.input_size(), rng);
  const auto w = random_vec(s.weight_size(), rng);
  const auto b = random_vec(std::size_t(channels), rng);
  const auto gout = random_vec(s.output_size(), rng);
  std::vector<double> o_ref(s.output_size()), o_par(s.output_size());
  char label[64];

  const double f_ref = time_ms(reps, [&] { k::reference::conv2d_forward(s, in, w, b, o_ref); });
  const double f_par = time_ms(reps, [&] { k::parallel::conv2d_forward(s, in, w, b, o_par); });
  std::snprintf(label, sizeof label, "conv fwd %dch %dx%d", channels, size, size);
  report(label, f_ref, f_par, max_diff(o_ref, o_par));

  std::vector<double> gi_ref(s.input_size()), gi_par(s.input_size());
  const double bi_ref = time_ms(reps, [&] {
    std::fill(gi_ref.begin(), gi_ref.end(), 0.0);
    k::reference::conv2d_backward_input(s, gout, w, gi_ref);
  });
  const double bi_par = time_ms(reps, [&] {
    std::fill(gi_par.begin(), gi_par.end(), 0.0);
    k::parallel::conv2d_backward_input(s, gout, w, gi_par);
  });
  std::snprintf(label, sizeof label, "conv bwd-in %dch %dx%d", channels, size, size);
  report(label, bi_ref, bi_par, max_diff(gi_ref, gi_par));

  std::vector<double> gw_ref(s.weight_size()), gw_par(s.weight_size()), gb_ref(channels), gb_par(channels);
  const double bp_ref = time_ms(reps, [&] {
    std::fill(gw_ref.begin(), gw_ref.end(), 0.0);
    std::fill(gb_ref.begin(), gb_ref.end(), 0.0);
    k::reference::conv2d_backward_params(s, in, gout, gw_ref, gb_ref);
  });
  const double bp_par = time_ms(reps, [&] {
    std::fill(gw_par.begin(), gw_par.end(), 0.0);
    std::fill(gb_par.begin(), gb_par.end(), 0.0);
    k::parallel::conv2d_backward_params(s, in, gout, gw_par, gb_par);
  });
  std::snprintf(label, sizeof label, "conv bwd-w %dch %dx%d", channels, size, size);
  report(label, bp_ref, bp_par, max_diff(gw_ref, gw_par));
}

void bench_dft(int size, int reps) {
  RngStream rng(2, 0);
  const ComplexGrid x = gaussian(rng, size, size);
  ComplexGrid a = x, b = x;
  const double ref = time_ms(reps, [&] {
    a = x;
    k::reference::dft2(a.data(), size, size, -1);
  });
  const double par = time_ms(reps, [&] {
    b = x;
    k::parallel::dft2(b.data(), size, size, -1);
  });
  char label[64];
  std::snprintf(label, sizeof label, "dft2 %dx%d", size, size);
  report(label, ref, par, max_abs_diff(a, b));
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %10s %10s %9s\n", "kernel", "ref ms", "omp ms", "speedup");
  for (int ch : {8, 32}) bench_conv(ch, 32, reps);
  bench_conv(32, 64, reps);
  for (int n : {32, 64, 128}) bench_dft(n, reps);

  RngStream rng(3, 0);
  const ArchConfig arch = ArchConfig::preset("toy", 32, 32);
  const DenoiserParams params = init_network(arch, rng);
  const NetworkPredictor net(params);
  const Mask mask = make_equispaced_mask(32, 4.0, kDefaultCenterFraction4x);
  const PartialKSpace y_m = split(gaussian(rng, 32, 32), mask).first;
  const DiffusionSchedule s = respace(build_cosine_halved(128), 32);
  const auto t0 = std::chrono::steady_clock::now();
  const auto samples = sample(net, y_m, s, {8, 5, 1});
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("sampler: %zu chains x %d steps, toy net 32x32: %.2f s\n", samples.size(), s.steps(), sec);
  return 0;
}
