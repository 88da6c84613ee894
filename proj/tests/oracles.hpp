#pragma once

// Independent reference computations used by the tests. Nothing here calls into the
// library beyond plain data types.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "mcddpm/numerics.hpp"
#include "mcddpm/rng.hpp"

namespace oracle {

struct ScheduleRef {
  std::vector<double> bar_alpha;  // index 0..T
  std::vector<double> bar_beta;
};

// Recursive form: bar_beta_t^2 = alpha_t^2 bar_beta_{t-1}^2 + beta_t^2.
inline ScheduleRef schedule(const std::vector<double>& alpha, const std::vector<double>& beta) {
  ScheduleRef r{{1.0}, {0.0}};
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    r.bar_alpha.push_back(r.bar_alpha.back() * alpha[i]);
    const double prev = r.bar_beta.back();
    r.bar_beta.push_back(std::sqrt(alpha[i] * alpha[i] * prev * prev + beta[i] * beta[i]));
  }
  return r;
}

// Cosine-halved schedule written out from its definition.
inline void cosine_halved(int steps, std::vector<double>& alpha, std::vector<double>& beta) {
  const double pi = 3.14159265358979323846;
  auto f = [&](double u) {
    const double c = std::cos((u + 0.008) / 1.008 * pi / 2.0);
    return c * c;
  };
  alpha.clear();
  beta.clear();
  for (int i = 1; i <= steps; ++i) {
    double b = 1.0 - f(double(i) / steps) / f(double(i - 1) / steps);
    if (b > 0.999) b = 0.999;
    alpha.push_back(std::sqrt(1.0 - b));
    beta.push_back(0.5 * std::sqrt(b));
  }
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

// Posterior of a scalar y_{t-1} given y_t and y_0 by brute-force integration of
// p(y_t | y_{t-1}) p(y_{t-1} | y_0) on a uniform grid.
inline Moments bayes_posterior(double alpha_t, double beta_t, double bar_alpha_prev, double bar_beta_prev,
                               double y_t, double y0, int n = 200001) {
  const double prior_mean = bar_alpha_prev * y0;
  // Bracket both factors generously.
  const double centre = prior_mean;
  const double width = 14.0 * std::max(bar_beta_prev, beta_t / alpha_t) + std::abs(y_t / alpha_t - prior_mean);
  const double lo = centre - width, hi = centre + width;
  const double dx = (hi - lo) / (n - 1);
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * dx;
    const double a = (x - prior_mean) / bar_beta_prev;
    const double b = (y_t - alpha_t * x) / beta_t;
    const double w = std::exp(-0.5 * (a * a + b * b)) * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
    z += w;
    m1 += w * x;
    m2 += w * x * x;
  }
  const double mean = m1 / z;
  return {mean, std::sqrt(std::max(0.0, m2 / z - mean * mean))};
}

// Direct O(N^4) unitary 2-D DFT.
inline mcddpm::ComplexGrid naive_dft2(const mcddpm::ComplexGrid& x, int sign) {
  const double pi = 3.14159265358979323846;
  const int h = x.height(), w = x.width();
  mcddpm::ComplexGrid y(h, w);
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      std::complex<double> acc{};
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          acc += x(r, c) * std::polar(1.0, sign * 2.0 * pi * (double(u * r) / h + double(v * c) / w));
      y(u, v) = acc / std::sqrt(double(h * w));
    }
  return y;
}

inline mcddpm::ComplexGrid random_grid(std::uint64_t seed, int h, int w, double scale = 1.0) {
  mcddpm::RngStream rng(seed, 99);
  mcddpm::ComplexGrid g(h, w);
  for (auto& v : g.data()) {
    const double re = rng.normal() * scale;
    const double im = rng.normal() * scale;
    v = {re, im};
  }
  return g;
}

// Fresh scratch directory under the test's working directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::current_path() / "scratch" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
