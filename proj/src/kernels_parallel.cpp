#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mcddpm/kernels.hpp"

namespace mcddpm::kernels::parallel {

namespace {

using cplx = std::complex<double>;

// Valid output range [lo, hi) for a tap offset d so that 0 <= i + d < n.
inline void tap_range(int d, int n, int& lo, int& hi) {
  lo = std::max(0, -d);
  hi = std::min(n, n - d);
}

}  // namespace

void conv2d_forward(const ConvShape& s, std::span<const double> input, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> output) {
  const int r = s.kernel / 2;
  const int h = s.height, w = s.width, k = s.kernel;
  const std::size_t plane = std::size_t(h) * w;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < s.out_channels; ++co) {
    double* out = output.data() + co * plane;
    std::fill(out, out + plane, bias[co]);
    for (int ci = 0; ci < s.in_channels; ++ci) {
      const double* in = input.data() + ci * plane;
      const double* wk = weight.data() + (std::size_t(co) * s.in_channels + ci) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - r;
        int y0, y1;
        tap_range(dy, h, y0, y1);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - r;
          int x0, x1;
          tap_range(dx, w, x0, x1);
          const double wv = wk[ky * k + kx];
          for (int y = y0; y < y1; ++y) {
            double* orow = out + std::size_t(y) * w;
            const double* irow = in + std::size_t(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
}

void conv2d_backward_input(const ConvShape& s, std::span<const double> grad_output,
                           std::span<const double> weight, std::span<double> grad_input) {
  const int r = s.kernel / 2;
  const int h = s.height, w = s.width, k = s.kernel;
  const std::size_t plane = std::size_t(h) * w;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < s.in_channels; ++ci) {
    double* gin = grad_input.data() + ci * plane;
    for (int co = 0; co < s.out_channels; ++co) {
      const double* gout = grad_output.data() + co * plane;
      const double* wk = weight.data() + (std::size_t(co) * s.in_channels + ci) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - r;
        // gin[y + dy] += w * gout[y] over output rows y with 0 <= y + dy < h.
        int y0, y1;
        tap_range(dy, h, y0, y1);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - r;
          int x0, x1;
          tap_range(dx, w, x0, x1);
          const double wv = wk[ky * k + kx];
          for (int y = y0; y < y1; ++y) {
            double* grow = gin + std::size_t(y + dy) * w + dx;
            const double* orow = gout + std::size_t(y) * w;
            for (int x = x0; x < x1; ++x) grow[x] += wv * orow[x];
          }
        }
      }
    }
  }
}

void conv2d_backward_params(const ConvShape& s, std::span<const double> input,
                            std::span<const double> grad_output, std::span<double> grad_weight,
                            std::span<double> grad_bias) {
  const int r = s.kernel / 2;
  const int h = s.height, w = s.width, k = s.kernel;
  const std::size_t plane = std::size_t(h) * w;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < s.out_channels; ++co) {
    const double* gout = grad_output.data() + co * plane;
    double gb = 0.0;
    for (std::size_t i = 0; i < plane; ++i) gb += gout[i];
    grad_bias[co] += gb;
    for (int ci = 0; ci < s.in_channels; ++ci) {
      const double* in = input.data() + ci * plane;
      double* gw = grad_weight.data() + (std::size_t(co) * s.in_channels + ci) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - r;
        int y0, y1;
        tap_range(dy, h, y0, y1);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - r;
          int x0, x1;
          tap_range(dx, w, x0, x1);
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* orow = gout + std::size_t(y) * w;
            const double* irow = in + std::size_t(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) acc += orow[x] * irow[x];
          }
          gw[ky * k + kx] += acc;
        }
      }
    }
  }
}

namespace {

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// Twiddles exp(sign * 2 pi i j / n) for j < n, each evaluated directly.
std::vector<cplx> twiddles(std::size_t n, int sign) {
  std::vector<cplx> t(n);
  for (std::size_t j = 0; j < n; ++j)
    t[j] = std::polar(1.0, sign * 2.0 * std::numbers::pi * double(j) / double(n));
  return t;
}

void fft1(cplx* v, std::size_t n, const std::vector<cplx>& tw, std::vector<cplx>& scratch) {
  if (n == 1) return;
  if (!is_pow2(n)) {
    scratch.assign(v, v + n);
    for (std::size_t k = 0; k < n; ++k) {
      cplx acc{};
      for (std::size_t j = 0; j < n; ++j) acc += scratch[j] * tw[(j * k) % n];
      v[k] = acc;
    }
    return;
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(v[i], v[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len)
      for (std::size_t j = 0; j < half; ++j) {
        const cplx u = v[i + j];
        const cplx t = v[i + j + half] * tw[j * step];
        v[i + j] = u + t;
        v[i + j + half] = u - t;
      }
  }
}

}  // namespace

void dft2(std::span<cplx> data, int height, int width, int sign) {
  const auto tw_row = twiddles(std::size_t(width), sign);
  const auto tw_col = twiddles(std::size_t(height), sign);
#pragma omp parallel
  {
    std::vector<cplx> scratch;
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) fft1(data.data() + std::size_t(y) * width, width, tw_row, scratch);
    std::vector<cplx> col(height);
#pragma omp for schedule(static)
    for (int x = 0; x < width; ++x) {
      for (int y = 0; y < height; ++y) col[y] = data[std::size_t(y) * width + x];
      fft1(col.data(), height, tw_col, scratch);
      for (int y = 0; y < height; ++y) data[std::size_t(y) * width + x] = col[y];
    }
  }
}

}  // namespace mcddpm::kernels::parallel
