#include "mcddpm/numerics.hpp"

#include <cmath>
#include <utility>

#include "mcddpm/error.hpp"
#include "mcddpm/kernels.hpp"

namespace mcddpm {

ComplexGrid::ComplexGrid(int height, int width) : height_(height), width_(width) {
  require(height >= 1 && width >= 1, ErrorKind::InvalidArgument,
          "ComplexGrid: height and width must be positive");
  data_.assign(static_cast<std::size_t>(height) * width, cplx{});
}

ComplexGrid::ComplexGrid(int height, int width, std::vector<cplx> data)
    : height_(height), width_(width), data_(std::move(data)) {
  require(height >= 1 && width >= 1, ErrorKind::InvalidArgument,
          "ComplexGrid: height and width must be positive");
  require(data_.size() == static_cast<std::size_t>(height) * width, ErrorKind::ShapeMismatch,
          "ComplexGrid: data length must equal height * width");
}

ComplexGrid& ComplexGrid::operator+=(const ComplexGrid& rhs) {
  require(same_shape(rhs), ErrorKind::ShapeMismatch, "ComplexGrid +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

ComplexGrid& ComplexGrid::operator-=(const ComplexGrid& rhs) {
  require(same_shape(rhs), ErrorKind::ShapeMismatch, "ComplexGrid -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

ComplexGrid& ComplexGrid::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

bool ComplexGrid::all_finite() const {
  for (const auto& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double ComplexGrid::norm() const {
  double acc = 0.0;
  for (const auto& v : data_) acc += std::norm(v);
  return std::sqrt(acc);
}

ComplexGrid operator+(ComplexGrid lhs, const ComplexGrid& rhs) { return lhs += rhs; }
ComplexGrid operator-(ComplexGrid lhs, const ComplexGrid& rhs) { return lhs -= rhs; }
ComplexGrid operator*(cplx s, ComplexGrid g) { return g *= s; }

double max_abs_diff(const ComplexGrid& a, const ComplexGrid& b) {
  require(a.same_shape(b), ErrorKind::ShapeMismatch, "max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace {

ComplexGrid transform(const ComplexGrid& x, int sign) {
  require(!x.empty(), ErrorKind::InvalidArgument, "dft2: empty grid");
  ComplexGrid out = x;
  kernels::parallel::dft2(out.data(), out.height(), out.width(), sign);
  out *= 1.0 / std::sqrt(double(x.height()) * double(x.width()));
  return out;
}

}  // namespace

ComplexGrid dft2(const ComplexGrid& x) { return transform(x, -1); }
ComplexGrid idft2(const ComplexGrid& y) { return transform(y, +1); }

ComplexGrid gaussian(RngStream& rng, int height, int width) {
  ComplexGrid g(height, width);
  for (auto& v : g.data()) {
    const double re = rng.normal();
    const double im = rng.normal();
    v = {re, im};
  }
  return g;
}

}  // namespace mcddpm
