#include "mcddpm/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mcddpm/error.hpp"
#include "mcddpm/io.hpp"
#include "mcddpm/rng.hpp"

namespace mcddpm {

void PhantomConfig::validate() const {
  require(size >= 8, ErrorKind::InvalidArgument, "phantom: size must be at least 8");
  require(n_ellipses >= 1, ErrorKind::InvalidArgument, "phantom: need at least one ellipse");
  require(0.0 <= intensity_min && intensity_min <= intensity_max && intensity_max <= 1.0, ErrorKind::InvalidArgument,
          "phantom: intensity range must satisfy 0 <= min <= max <= 1");
  require(phase_cutoff > 0.0 && phase_cutoff <= 0.5, ErrorKind::InvalidArgument,
          "phantom: phase cutoff must lie in (0, 0.5]");
}

namespace {

struct Ellipse {
  double cx, cy, a, b, cos_t, sin_t, value;

  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double u = (dx * cos_t + dy * sin_t) / a;
    const double v = (-dx * sin_t + dy * cos_t) / b;
    return u * u + v * v <= 1.0;
  }
};

Ellipse random_ellipse(RngStream& rng, const PhantomConfig& c, bool outer) {
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  Ellipse e{};
  const double theta = in(0.0, std::numbers::pi);
  e.cos_t = std::cos(theta);
  e.sin_t = std::sin(theta);
  if (outer) {
    e.cx = in(-0.05, 0.05);
    e.cy = in(-0.05, 0.05);
    e.a = in(0.6, 0.85);
    e.b = in(0.6, 0.85);
    e.value = in(0.5 * (c.intensity_min + c.intensity_max), c.intensity_max);
  } else {
    e.cx = in(-0.5, 0.5);
    e.cy = in(-0.5, 0.5);
    e.a = in(0.06, 0.35);
    e.b = in(0.06, 0.35);
    e.value = in(c.intensity_min, c.intensity_max) * (rng.uniform() < 0.35 ? -1.0 : 1.0);
  }
  return e;
}

RealGrid ellipse_magnitude(const PhantomConfig& c, RngStream& rng) {
  constexpr int kSuper = 4;
  std::vector<Ellipse> ellipses;
  for (int k = 0; k < c.n_ellipses; ++k) ellipses.push_back(random_ellipse(rng, c, k == 0));
  const int n = c.size;
  RealGrid mag(n, n);
  for (int r = 0; r < n; ++r) {
    for (int q = 0; q < n; ++q) {
      double acc = 0.0;
      for (int sr = 0; sr < kSuper; ++sr) {
        for (int sq = 0; sq < kSuper; ++sq) {
          const double y = 2.0 * (r + (sr + 0.5) / kSuper) / n - 1.0;
          const double x = 2.0 * (q + (sq + 0.5) / kSuper) / n - 1.0;
          for (const auto& e : ellipses)
            if (e.contains(x, y)) acc += e.value;
        }
      }
      mag(r, q) = std::clamp(acc / (kSuper * kSuper), 0.0, 1.0);
    }
  }
  return mag;
}

// Signed frequency of FFT index k, in cycles per sample.
double freq(int k, int n) { return double(k <= n / 2 ? k : k - n) / n; }

}  // namespace

RealGrid phase_field(const PhantomConfig& c) {
  c.validate();
  RngStream rng = RngStream(c.seed, 0).split(1);
  const int n = c.size;
  ComplexGrid noise(n, n);
  for (auto& v : noise.data()) v = rng.normal();
  ComplexGrid spec = dft2(noise);
  for (int r = 0; r < n; ++r)
    for (int q = 0; q < n; ++q)
      if (std::hypot(freq(r, n), freq(q, n)) > c.phase_cutoff) spec(r, q) = 0.0;
  const ComplexGrid smooth = idft2(spec);
  RealGrid field(n, n);
  double peak = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    field.data[i] = smooth[i].real();
    peak = std::max(peak, std::abs(field.data[i]));
  }
  if (peak > 0.0)
    for (auto& v : field.data) v *= 0.5 / peak;
  return field;
}

ComplexGrid gen_phantom(const PhantomConfig& c) {
  c.validate();
  RngStream rng(c.seed, 0);
  const RealGrid mag = ellipse_magnitude(c, rng);
  const RealGrid phase = phase_field(c);
  ComplexGrid x(c.size, c.size);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::polar(mag.data[i], 2.0 * std::numbers::pi * phase.data[i]);
  return x;
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::uint64_t dataset_checksum(const std::filesystem::path& dir, const std::vector<std::string>& paths) {
  std::uint64_t h = fnv1a64(nullptr, 0);
  for (const auto& rel : paths) {
    h = fnv1a64(rel.data(), rel.size(), h);
    const char nl = '\n';
    h = fnv1a64(&nl, 1, h);
    const auto bytes = read_file_bytes(dir / rel);
    h = fnv1a64(bytes.data(), bytes.size(), h);
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Manifest build_dataset(int n_items, const PhantomConfig& config, const std::filesystem::path& out_dir) {
  require(n_items >= 1, ErrorKind::InvalidArgument, "build_dataset: need at least one item");
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create '" + out_dir.string() + "': " + ec.message());

  Manifest m;
  for (int i = 0; i < n_items; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "item_%04d.mcdt", i);
    m.paths.emplace_back(name);
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_items; ++i) {
    try {
      PhantomConfig item = config;
      item.seed = config.seed + std::uint64_t(i);
      write_tensor(out_dir / m.paths[i], gen_phantom(item));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  m.checksum = dataset_checksum(out_dir, m.paths);
  std::ostringstream text;
  for (const auto& p : m.paths) text << p << '\n';
  text << "checksum " << hex16(m.checksum) << '\n';
  const std::string s = text.str();
  write_file_bytes(out_dir / "manifest.txt", std::vector<std::uint8_t>(s.begin(), s.end()));
  return m;
}

Manifest read_manifest(const std::filesystem::path& manifest_path) {
  const auto bytes = read_file_bytes(manifest_path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  Manifest m;
  std::string line;
  bool have_checksum = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (have_checksum) fail(ErrorKind::Format, "manifest: entries after the checksum line");
    if (line.rfind("checksum ", 0) == 0) {
      const std::string hex = line.substr(9);
      if (hex.size() != 16 || hex.find_first_not_of("0123456789abcdef") != std::string::npos)
        fail(ErrorKind::Format, "manifest: malformed checksum line");
      m.checksum = std::stoull(hex, nullptr, 16);
      have_checksum = true;
    } else {
      m.paths.push_back(line);
    }
  }
  if (!have_checksum) fail(ErrorKind::Format, "manifest: missing checksum line");
  if (m.paths.empty()) fail(ErrorKind::Format, "manifest: no items");
  return m;
}

std::vector<ComplexGrid> load_dataset(const std::filesystem::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  if (dataset_checksum(dir, m.paths) != m.checksum)
    fail(ErrorKind::Integrity, "dataset checksum mismatch for '" + manifest_path.string() + "'");
  std::vector<ComplexGrid> items;
  items.reserve(m.paths.size());
  for (const auto& p : m.paths) items.push_back(read_tensor(dir / p));
  return items;
}

}  // namespace mcddpm
