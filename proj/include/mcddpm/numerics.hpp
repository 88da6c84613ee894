#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mcddpm/rng.hpp"

namespace mcddpm {

using cplx = std::complex<double>;

/// H x W complex field in row-major order. Used for images and for k-space.
class ComplexGrid {
 public:
  ComplexGrid() = default;
  ComplexGrid(int height, int width);
  ComplexGrid(int height, int width, std::vector<cplx> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const ComplexGrid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  cplx& operator()(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  const cplx& operator()(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  ComplexGrid& operator+=(const ComplexGrid& rhs);
  ComplexGrid& operator-=(const ComplexGrid& rhs);
  ComplexGrid& operator*=(cplx s);

  bool all_finite() const;
  double norm() const;  // Euclidean norm over all real channels

  bool operator==(const ComplexGrid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<cplx> data_;
};

ComplexGrid operator+(ComplexGrid lhs, const ComplexGrid& rhs);
ComplexGrid operator-(ComplexGrid lhs, const ComplexGrid& rhs);
ComplexGrid operator*(cplx s, ComplexGrid g);

double max_abs_diff(const ComplexGrid& a, const ComplexGrid& b);

/// Unitary, non-centred 2-D DFT. DC lands at (0, 0); both directions scale by 1/sqrt(HW).
ComplexGrid dft2(const ComplexGrid& x);
ComplexGrid idft2(const ComplexGrid& y);

/// Standard normal draws, independently for the real and imaginary channel of each entry.
ComplexGrid gaussian(RngStream& rng, int height, int width);

}  // namespace mcddpm
