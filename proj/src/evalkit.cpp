#include "mcddpm/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mcddpm/error.hpp"

namespace mcddpm {

RealGrid::RealGrid(int h, int w, std::vector<double> values) : height(h), width(w), data(std::move(values)) {
  require(h >= 0 && w >= 0 && data.size() == std::size_t(h) * std::size_t(w), ErrorKind::ShapeMismatch,
          "RealGrid: value count does not match shape");
}

double RealGrid::max() const {
  require(!data.empty(), ErrorKind::InvalidArgument, "RealGrid::max: empty grid");
  return *std::max_element(data.begin(), data.end());
}

RealGrid magnitude(const ComplexGrid& x) {
  RealGrid out(x.height(), x.width());
  for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = std::abs(x[i]);
  return out;
}

namespace {

double psnr_from(double mse, double range) {
  if (mse < 1e-20) return kPsnrCap;
  return 10.0 * std::log10(range * range / mse);
}

void check_pair(const RealGrid& recon, const RealGrid& gt) {
  require(recon.same_shape(gt), ErrorKind::ShapeMismatch, "metrics: recon and gt differ in shape");
  require(gt.size() > 0, ErrorKind::InvalidArgument, "metrics: empty image");
}

}  // namespace

double ssim(const RealGrid& x, const RealGrid& y, double data_range) {
  check_pair(x, y);
  require(data_range > 0.0, ErrorKind::Domain, "ssim: data_range must be positive");
  const int wh = std::min(7, x.height), ww = std::min(7, x.width);
  const double np = double(wh) * ww;
  const double cov_norm = np > 1.0 ? np / (np - 1.0) : 1.0;
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);
  double total = 0.0;
  int count = 0;
  for (int r0 = 0; r0 + wh <= x.height; ++r0) {
    for (int q0 = 0; q0 + ww <= x.width; ++q0) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int r = r0; r < r0 + wh; ++r)
        for (int q = q0; q < q0 + ww; ++q) {
          const double a = x(r, q), b = y(r, q);
          sx += a;
          sy += b;
          sxx += a * a;
          syy += b * b;
          sxy += a * b;
        }
      const double ux = sx / np, uy = sy / np;
      const double vx = cov_norm * (sxx / np - ux * ux);
      const double vy = cov_norm * (syy / np - uy * uy);
      const double vxy = cov_norm * (sxy / np - ux * uy);
      const double num = (2.0 * ux * uy + c1) * (2.0 * vxy + c2);
      const double den = (ux * ux + uy * uy + c1) * (vx + vy + c2);
      total += num / den;
      ++count;
    }
  }
  return std::clamp(total / count, -1.0, 1.0);
}

MetricRecord metrics(const RealGrid& recon, const RealGrid& gt, std::optional<double> data_range) {
  check_pair(recon, gt);
  MetricRecord r;
  r.data_range = data_range ? *data_range : gt.max();
  require(r.data_range > 0.0, ErrorKind::Domain, "metrics: data_range must be positive");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = gt.data[i] - recon.data[i];
    err += d * d;
    ref += gt.data[i] * gt.data[i];
  }
  require(ref > 0.0, ErrorKind::Domain, "metrics: nmse undefined for an all-zero ground truth");
  r.mse = err / double(gt.size());
  r.nmse = err / ref;
  r.psnr = psnr_from(r.mse, r.data_range);
  r.ssim = ssim(recon, gt, r.data_range);
  return r;
}

VolumeReport volume_metrics(const std::vector<RealGrid>& recon, const std::vector<RealGrid>& gt) {
  require(!gt.empty() && recon.size() == gt.size(), ErrorKind::ShapeMismatch,
          "volume_metrics: need equal, non-empty slice lists");
  VolumeReport out;
  out.n_slices = int(gt.size());
  double vmax = gt[0].max();
  for (const auto& g : gt) vmax = std::max(vmax, g.max());
  double err = 0.0, ref = 0.0, n = 0.0, ssim_sum = 0.0;
  for (std::size_t s = 0; s < gt.size(); ++s) {
    const MetricRecord m = metrics(recon[s], gt[s]);
    out.slice_mean.psnr += m.psnr;
    out.slice_mean.ssim += m.ssim;
    out.slice_mean.nmse += m.nmse;
    out.slice_mean.mse += m.mse;
    out.slice_mean.data_range += m.data_range;
    for (std::size_t i = 0; i < gt[s].size(); ++i) {
      const double d = gt[s].data[i] - recon[s].data[i];
      err += d * d;
      ref += gt[s].data[i] * gt[s].data[i];
    }
    n += double(gt[s].size());
    ssim_sum += ssim(recon[s], gt[s], vmax);
  }
  const double k = double(gt.size());
  out.slice_mean.psnr /= k;
  out.slice_mean.ssim /= k;
  out.slice_mean.nmse /= k;
  out.slice_mean.mse /= k;
  out.slice_mean.data_range /= k;
  out.volume.data_range = vmax;
  out.volume.mse = err / n;
  out.volume.nmse = err / ref;
  out.volume.psnr = psnr_from(out.volume.mse, vmax);
  out.volume.ssim = ssim_sum / k;
  return out;
}

UncertaintyMap sample_stats(const std::vector<ComplexGrid>& samples) {
  require(!samples.empty(), ErrorKind::InvalidArgument, "sample_stats: no samples");
  const int h = samples[0].height(), w = samples[0].width();
  for (const auto& s : samples)
    require(s.height() == h && s.width() == w, ErrorKind::ShapeMismatch, "sample_stats: samples differ in shape");
  UncertaintyMap u{RealGrid(h, w), RealGrid(h, w), int(samples.size())};
  const double n = double(samples.size());
  std::vector<RealGrid> mags;
  mags.reserve(samples.size());
  for (const auto& s : samples) mags.push_back(magnitude(s));
  for (std::size_t i = 0; i < u.mean.size(); ++i) {
    double acc = 0.0;
    for (const auto& m : mags) acc += m.data[i];
    const double mean = acc / n;
    double var = 0.0;
    for (const auto& m : mags) var += (m.data[i] - mean) * (m.data[i] - mean);
    u.mean.data[i] = mean;
    u.std.data[i] = std::sqrt(var / n);
  }
  return u;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string to_key_value(const MetricRecord& r, const std::string& prefix) {
  std::string out;
  out += prefix + "psnr=" + fmt(r.psnr) + "\n";
  out += prefix + "ssim=" + fmt(r.ssim) + "\n";
  out += prefix + "nmse=" + fmt(r.nmse) + "\n";
  out += prefix + "mse=" + fmt(r.mse) + "\n";
  out += prefix + "data_range=" + fmt(r.data_range) + "\n";
  return out;
}

std::string csv_header() { return "psnr,ssim,nmse,mse,data_range"; }

std::string to_csv_row(const MetricRecord& r) {
  return fmt(r.psnr) + "," + fmt(r.ssim) + "," + fmt(r.nmse) + "," + fmt(r.mse) + "," + fmt(r.data_range);
}

}  // namespace mcddpm
