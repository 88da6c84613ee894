#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mcddpm {

/// Dense row-major float64 array with a runtime shape.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape_, double fill = 0.0);
  Tensor(std::vector<int> shape_, std::vector<double> values);

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }
  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  std::size_t size() const { return data.size(); }
  int rank() const { return int(shape.size()); }
  int dim(int i) const { return shape[i]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::span<double> span() { return data; }
  std::span<const double> span() const { return data; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool all_finite() const;
  bool operator==(const Tensor&) const = default;
};

std::size_t shape_size(const std::vector<int>& shape);

}  // namespace mcddpm
