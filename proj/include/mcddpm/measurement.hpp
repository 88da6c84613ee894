#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mcddpm/numerics.hpp"
#include "mcddpm/rng.hpp"

namespace mcddpm {

enum class MaskKind : std::uint8_t { Random, Equispaced, Custom };

struct MaskInfo {
  double acceleration = 1.0;
  double center_fraction = 0.0;
  MaskKind kind = MaskKind::Custom;
  std::uint64_t seed = 0;
};

/// Per-column k-space sampling pattern.
///
/// Columns are indexed in the centred view, with the DC column at width / 2. The
/// transform itself is non-centred, so `sampled_raw` translates a raw FFT column
/// into the centred index before lookup.
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::vector<std::uint8_t> sampled, MaskInfo info = {});

  int width() const { return int(sampled_.size()); }
  bool sampled(int centered_col) const { return sampled_[centered_col] != 0; }
  bool sampled_raw(int raw_col) const { return sampled_[raw_to_centered(raw_col, width())] != 0; }
  int sampled_count() const;
  bool fully_sampled() const { return sampled_count() == width(); }
  bool none_sampled() const { return sampled_count() == 0; }

  const std::vector<std::uint8_t>& columns() const { return sampled_; }
  const MaskInfo& info() const { return info_; }

  /// Flips every column. Metadata is carried over.
  Mask complement() const;

  /// Column-pattern equality; metadata is ignored.
  bool operator==(const Mask& other) const { return sampled_ == other.sampled_; }

  static int raw_to_centered(int raw, int width) { return (raw + width / 2) % width; }
  static int centered_to_raw(int centered, int width) { return (centered - width / 2 + width) % width; }

 private:
  std::vector<std::uint8_t> sampled_;
  MaskInfo info_;
};

/// Which projector produced a partial measurement: M (acquired) or M^c (missing).
enum class Side : std::uint8_t { Sampled, NonSampled };

/// A k-space grid restricted to one side of a mask. Columns outside the support are
/// forced to +0 on construction, so every value built through this type is exactly
/// zero off-support.
class PartialKSpace {
 public:
  PartialKSpace(ComplexGrid grid, Mask mask, Side side);

  static PartialKSpace zeros(int height, const Mask& mask, Side side);

  const ComplexGrid& grid() const { return grid_; }
  const Mask& mask() const { return mask_; }
  Side side() const { return side_; }
  int height() const { return grid_.height(); }
  int width() const { return grid_.width(); }

  /// True if raw FFT column `col` lies inside this projector's support.
  bool in_support(int raw_col) const { return mask_.sampled_raw(raw_col) == (side_ == Side::Sampled); }
  int support_columns() const;

  bool compatible(const PartialKSpace& other) const {
    return side_ == other.side_ && mask_ == other.mask_ && grid_.same_shape(other.grid_);
  }

 private:
  void project();

  ComplexGrid grid_;
  Mask mask_;
  Side side_;
};

/// a * x + b * y over matching partials.
PartialKSpace axpby(double a, const PartialKSpace& x, double b, const PartialKSpace& y);
PartialKSpace scaled(double a, const PartialKSpace& x);

constexpr double kDefaultCenterFraction4x = 0.08;
constexpr double kDefaultCenterFraction8x = 0.04;

/// Number of sampled columns for (width, acceleration): round(width / acceleration).
int mask_budget(int width, double acceleration);
/// Size of the always-sampled centre block: round(center_fraction * width).
int mask_center_count(int width, double center_fraction);

Mask make_random_mask(int width, double acceleration, double center_fraction, RngStream& rng);
Mask make_equispaced_mask(int width, double acceleration, double center_fraction);

/// y_M = M dft2(x) and y_Mc = M^c dft2(x). Noise-free acquisition.
std::pair<PartialKSpace, PartialKSpace> split(const ComplexGrid& x, const Mask& mask);

/// idft2(y_M + y_Mc). Requires the same mask and opposite sides.
ComplexGrid merge_and_invert(const PartialKSpace& y_m, const PartialKSpace& y_mc);

/// Unit complex-Gaussian noise on the non-sampled columns, exact zeros elsewhere.
PartialKSpace masked_noise(const Mask& mask, int height, RngStream& rng);

/// max |M dft2(x) - y_M| over every entry.
double data_consistency_error(const ComplexGrid& x, const PartialKSpace& y_m);

}  // namespace mcddpm
