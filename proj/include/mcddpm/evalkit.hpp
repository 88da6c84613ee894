#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcddpm/numerics.hpp"

namespace mcddpm {

/// Row-major real image.
struct RealGrid {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  RealGrid() = default;
  RealGrid(int h, int w, double fill = 0.0) : height(h), width(w), data(std::size_t(h) * w, fill) {}
  RealGrid(int h, int w, std::vector<double> values);

  double& operator()(int r, int c) { return data[std::size_t(r) * width + c]; }
  double operator()(int r, int c) const { return data[std::size_t(r) * width + c]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const RealGrid& o) const { return height == o.height && width == o.width; }
  double max() const;
  bool operator==(const RealGrid&) const = default;
};

RealGrid magnitude(const ComplexGrid& x);

struct MetricRecord {
  double psnr = 0.0;
  double ssim = 0.0;
  double nmse = 0.0;
  double mse = 0.0;
  double data_range = 0.0;
};

constexpr double kPsnrCap = 100.0;

/// data_range defaults to max(gt).
MetricRecord metrics(const RealGrid& recon, const RealGrid& gt, std::optional<double> data_range = std::nullopt);

/// Mean local SSIM, 7x7 uniform window (clipped to the image), sample covariances.
double ssim(const RealGrid& recon, const RealGrid& gt, double data_range);

/// Labelled aggregate over a stack of slices.
struct VolumeReport {
  MetricRecord slice_mean;  // per-slice metrics (own data range) averaged
  MetricRecord volume;      // the stack as one array; SSIM averaged over slices at the volume range
  int n_slices = 0;
};

VolumeReport volume_metrics(const std::vector<RealGrid>& recon, const std::vector<RealGrid>& gt);

struct UncertaintyMap {
  RealGrid mean;
  RealGrid std;
  int n_samples = 0;
};

/// Per-pixel mean and population standard deviation of the sample magnitudes.
UncertaintyMap sample_stats(const std::vector<ComplexGrid>& samples);

std::string to_key_value(const MetricRecord& r, const std::string& prefix = "");
std::string csv_header();
std::string to_csv_row(const MetricRecord& r);

}  // namespace mcddpm
