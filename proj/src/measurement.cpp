#include "mcddpm/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcddpm/error.hpp"

namespace mcddpm {

Mask::Mask(std::vector<std::uint8_t> sampled, MaskInfo info) : sampled_(std::move(sampled)), info_(info) {
  require(!sampled_.empty(), ErrorKind::InvalidArgument, "Mask: width must be positive");
  for (auto& s : sampled_) s = s ? 1 : 0;
}

int Mask::sampled_count() const {
  return int(std::count(sampled_.begin(), sampled_.end(), std::uint8_t{1}));
}

Mask Mask::complement() const {
  std::vector<std::uint8_t> flipped(sampled_.size());
  for (std::size_t i = 0; i < flipped.size(); ++i) flipped[i] = sampled_[i] ? 0 : 1;
  return Mask(std::move(flipped), info_);
}

PartialKSpace::PartialKSpace(ComplexGrid grid, Mask mask, Side side)
    : grid_(std::move(grid)), mask_(std::move(mask)), side_(side) {
  require(grid_.width() == mask_.width(), ErrorKind::ShapeMismatch,
          "PartialKSpace: grid width does not match mask width");
  project();
}

PartialKSpace PartialKSpace::zeros(int height, const Mask& mask, Side side) {
  return PartialKSpace(ComplexGrid(height, mask.width()), mask, side);
}

void PartialKSpace::project() {
  const int w = grid_.width();
  for (int c = 0; c < w; ++c) {
    if (in_support(c)) continue;
    for (int r = 0; r < grid_.height(); ++r) grid_(r, c) = cplx{0.0, 0.0};
  }
}

int PartialKSpace::support_columns() const {
  int n = 0;
  for (int c = 0; c < width(); ++c) n += in_support(c) ? 1 : 0;
  return n;
}

PartialKSpace axpby(double a, const PartialKSpace& x, double b, const PartialKSpace& y) {
  require(x.compatible(y), ErrorKind::MaskMismatch, "axpby: operands differ in mask, side or shape");
  ComplexGrid out(x.height(), x.width());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x.grid()[i] + b * y.grid()[i];
  return PartialKSpace(std::move(out), x.mask(), x.side());
}

PartialKSpace scaled(double a, const PartialKSpace& x) {
  ComplexGrid out = x.grid();
  out *= a;
  return PartialKSpace(std::move(out), x.mask(), x.side());
}

int mask_budget(int width, double acceleration) {
  return int(std::lround(double(width) / acceleration));
}

int mask_center_count(int width, double center_fraction) {
  return int(std::lround(center_fraction * double(width)));
}

namespace {

struct Plan {
  int budget;
  int center;
};

Plan check_mask_params(int width, double acceleration, double center_fraction) {
  require(width >= 4, ErrorKind::InvalidArgument, "mask: width must be at least 4");
  require(acceleration >= 1.0 && std::isfinite(acceleration), ErrorKind::InvalidArgument,
          "mask: acceleration must be >= 1");
  require(center_fraction >= 0.0 && center_fraction < 1.0, ErrorKind::InvalidArgument,
          "mask: center_fraction must lie in [0, 1)");
  const Plan p{mask_budget(width, acceleration), mask_center_count(width, center_fraction)};
  require(double(p.center) <= double(width) / acceleration, ErrorKind::InvalidArgument,
          "mask: centre block exceeds the sampling budget width / acceleration");
  require(p.budget >= 1, ErrorKind::InvalidArgument, "mask: sampling budget is zero");
  return p;
}

// Contiguous block around the DC column (centred index width / 2).
void mark_center(std::vector<std::uint8_t>& cols, int center) {
  const int width = int(cols.size());
  const int start = (width - center + 1) / 2;
  for (int i = 0; i < center; ++i) cols[start + i] = 1;
}

}  // namespace

Mask make_random_mask(int width, double acceleration, double center_fraction, RngStream& rng) {
  const Plan p = check_mask_params(width, acceleration, center_fraction);
  std::vector<std::uint8_t> cols(width, 0);
  mark_center(cols, p.center);
  std::vector<int> pool;
  for (int c = 0; c < width; ++c)
    if (!cols[c]) pool.push_back(c);
  // Partial Fisher-Yates: the first `need` slots become a uniform draw without replacement.
  const int need = p.budget - p.center;
  for (int i = 0; i < need; ++i) {
    const auto j = i + int(rng.below(std::uint64_t(pool.size() - i)));
    std::swap(pool[i], pool[j]);
    cols[pool[i]] = 1;
  }
  return Mask(std::move(cols), {acceleration, center_fraction, MaskKind::Random, rng.seed()});
}

Mask make_equispaced_mask(int width, double acceleration, double center_fraction) {
  const Plan p = check_mask_params(width, acceleration, center_fraction);
  std::vector<std::uint8_t> cols(width, 0);
  mark_center(cols, p.center);
  int count = p.center;
  // Stride passes start at column 0; later passes shift by one column when overlap with
  // the centre block leaves the first pass short of the budget.
  const int stride = std::max(1, int(std::lround(acceleration)));
  for (int offset = 0; offset < stride && count < p.budget; ++offset)
    for (int c = offset; c < width && count < p.budget; c += stride)
      if (!cols[c]) {
        cols[c] = 1;
        ++count;
      }
  return Mask(std::move(cols), {acceleration, center_fraction, MaskKind::Equispaced, 0});
}

std::pair<PartialKSpace, PartialKSpace> split(const ComplexGrid& x, const Mask& mask) {
  require(x.width() == mask.width(), ErrorKind::ShapeMismatch, "split: image width differs from mask width");
  ComplexGrid k = dft2(x);
  PartialKSpace y_m(k, mask, Side::Sampled);
  PartialKSpace y_mc(std::move(k), mask, Side::NonSampled);
  return {std::move(y_m), std::move(y_mc)};
}

ComplexGrid merge_and_invert(const PartialKSpace& y_m, const PartialKSpace& y_mc) {
  require(y_m.mask() == y_mc.mask(), ErrorKind::MaskMismatch, "merge_and_invert: masks differ");
  require(y_m.side() == Side::Sampled && y_mc.side() == Side::NonSampled, ErrorKind::MaskMismatch,
          "merge_and_invert: expects one sampled and one non-sampled partial");
  require(y_m.grid().same_shape(y_mc.grid()), ErrorKind::ShapeMismatch, "merge_and_invert: shape mismatch");
  return idft2(y_m.grid() + y_mc.grid());
}

PartialKSpace masked_noise(const Mask& mask, int height, RngStream& rng) {
  require(!mask.fully_sampled(), ErrorKind::InvalidArgument,
          "masked_noise: mask samples every column, noise support is empty");
  return PartialKSpace(gaussian(rng, height, mask.width()), mask, Side::NonSampled);
}

double data_consistency_error(const ComplexGrid& x, const PartialKSpace& y_m) {
  require(y_m.side() == Side::Sampled, ErrorKind::MaskMismatch, "data_consistency_error: expects y_M");
  const PartialKSpace measured(dft2(x), y_m.mask(), Side::Sampled);
  return max_abs_diff(measured.grid(), y_m.grid());
}

}  // namespace mcddpm
