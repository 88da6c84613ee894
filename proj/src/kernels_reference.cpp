#include <cmath>
#include <numbers>
#include <vector>

#include "mcddpm/kernels.hpp"

namespace mcddpm::kernels::reference {

namespace {

inline std::size_t at(int c, int y, int x, int h, int w) {
  return (std::size_t(c) * h + y) * w + x;
}

inline std::size_t wat(const ConvShape& s, int co, int ci, int ky, int kx) {
  return ((std::size_t(co) * s.in_channels + ci) * s.kernel + ky) * s.kernel + kx;
}

}  // namespace

void conv2d_forward(const ConvShape& s, std::span<const double> input, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> output) {
  const int r = s.kernel / 2;
  for (int co = 0; co < s.out_channels; ++co)
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        double acc = bias[co];
        for (int ci = 0; ci < s.in_channels; ++ci)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int yy = y + ky - r;
              const int xx = x + kx - r;
              if (yy < 0 || yy >= s.height || xx < 0 || xx >= s.width) continue;
              acc += weight[wat(s, co, ci, ky, kx)] * input[at(ci, yy, xx, s.height, s.width)];
            }
        output[at(co, y, x, s.height, s.width)] = acc;
      }
}

void conv2d_backward_input(const ConvShape& s, std::span<const double> grad_output,
                           std::span<const double> weight, std::span<double> grad_input) {
  const int r = s.kernel / 2;
  for (int co = 0; co < s.out_channels; ++co)
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const double g = grad_output[at(co, y, x, s.height, s.width)];
        for (int ci = 0; ci < s.in_channels; ++ci)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int yy = y + ky - r;
              const int xx = x + kx - r;
              if (yy < 0 || yy >= s.height || xx < 0 || xx >= s.width) continue;
              grad_input[at(ci, yy, xx, s.height, s.width)] += g * weight[wat(s, co, ci, ky, kx)];
            }
      }
}

void conv2d_backward_params(const ConvShape& s, std::span<const double> input,
                            std::span<const double> grad_output, std::span<double> grad_weight,
                            std::span<double> grad_bias) {
  const int r = s.kernel / 2;
  for (int co = 0; co < s.out_channels; ++co)
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const double g = grad_output[at(co, y, x, s.height, s.width)];
        grad_bias[co] += g;
        for (int ci = 0; ci < s.in_channels; ++ci)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int yy = y + ky - r;
              const int xx = x + kx - r;
              if (yy < 0 || yy >= s.height || xx < 0 || xx >= s.width) continue;
              grad_weight[wat(s, co, ci, ky, kx)] += g * input[at(ci, yy, xx, s.height, s.width)];
            }
      }
}

void dft2(std::span<std::complex<double>> data, int height, int width, int sign) {
  using cplx = std::complex<double>;
  auto dft1 = [sign](std::vector<cplx>& v) {
    const std::size_t n = v.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      cplx acc{};
      for (std::size_t j = 0; j < n; ++j) {
        const double angle = sign * 2.0 * std::numbers::pi * double((j * k) % n) / double(n);
        acc += v[j] * std::polar(1.0, angle);
      }
      out[k] = acc;
    }
    v = std::move(out);
  };
  std::vector<cplx> buf;
  for (int y = 0; y < height; ++y) {
    buf.assign(data.begin() + std::size_t(y) * width, data.begin() + std::size_t(y + 1) * width);
    dft1(buf);
    std::copy(buf.begin(), buf.end(), data.begin() + std::size_t(y) * width);
  }
  for (int x = 0; x < width; ++x) {
    buf.resize(height);
    for (int y = 0; y < height; ++y) buf[y] = data[std::size_t(y) * width + x];
    dft1(buf);
    for (int y = 0; y < height; ++y) data[std::size_t(y) * width + x] = buf[y];
  }
}

}  // namespace mcddpm::kernels::reference
