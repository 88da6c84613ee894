#include "mcddpm/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "mcddpm/error.hpp"

namespace mcddpm {

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    require(d >= 0, ErrorKind::InvalidArgument, "Tensor: negative dimension");
    n *= std::size_t(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape_, double fill) : shape(std::move(shape_)), data(shape_size(shape), fill) {}

Tensor::Tensor(std::vector<int> shape_, std::vector<double> values) : shape(std::move(shape_)), data(std::move(values)) {
  require(data.size() == shape_size(shape), ErrorKind::ShapeMismatch, "Tensor: value count does not match shape");
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace mcddpm
