#pragma once

// Compute kernels behind the network and the transform. `reference` holds plain serial
// loops kept as the ground truth for tests; `parallel` holds the OpenMP versions used
// everywhere else. Parallel kernels partition work over outputs only, so they produce
// the same bits for any thread count.

#include <complex>
#include <span>

namespace mcddpm::kernels {

/// Stride-1, zero-padded ("same") 2-D convolution over C x H x W planes.
struct ConvShape {
  int in_channels = 0;
  int out_channels = 0;
  int height = 0;
  int width = 0;
  int kernel = 3;  // odd

  std::size_t input_size() const { return std::size_t(in_channels) * height * width; }
  std::size_t output_size() const { return std::size_t(out_channels) * height * width; }
  std::size_t weight_size() const {
    return std::size_t(out_channels) * in_channels * kernel * kernel;
  }
};

namespace reference {

void conv2d_forward(const ConvShape& s, std::span<const double> input, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> output);
// Accumulates into grad_input.
void conv2d_backward_input(const ConvShape& s, std::span<const double> grad_output,
                           std::span<const double> weight, std::span<double> grad_input);
// Accumulates into grad_weight and grad_bias.
void conv2d_backward_params(const ConvShape& s, std::span<const double> input,
                            std::span<const double> grad_output, std::span<double> grad_weight,
                            std::span<double> grad_bias);

/// Direct O(N^2) row/column DFT, unnormalised. sign = -1 forward, +1 inverse.
void dft2(std::span<std::complex<double>> data, int height, int width, int sign);

}  // namespace reference

namespace parallel {

void conv2d_forward(const ConvShape& s, std::span<const double> input, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> output);
void conv2d_backward_input(const ConvShape& s, std::span<const double> grad_output,
                           std::span<const double> weight, std::span<double> grad_input);
void conv2d_backward_params(const ConvShape& s, std::span<const double> input,
                            std::span<const double> grad_output, std::span<double> grad_weight,
                            std::span<double> grad_bias);

/// Radix-2 FFT along rows then columns (direct DFT on non-power-of-two lengths), unnormalised.
void dft2(std::span<std::complex<double>> data, int height, int width, int sign);

}  // namespace parallel

}  // namespace mcddpm::kernels
