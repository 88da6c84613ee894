#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcddpm/numerics.hpp"
#include "mcddpm/evalkit.hpp"

namespace mcddpm {

/// Synthetic complex phantom: a sum of anti-aliased ellipses for the magnitude and a
/// smooth random phase.
struct PhantomConfig {
  int size = 32;
  int n_ellipses = 6;
  double intensity_min = 0.1;
  double intensity_max = 1.0;
  /// Radial low-pass cutoff of the phase noise, in cycles per sample.
  double phase_cutoff = 0.08;
  std::uint64_t seed = 0;

  void validate() const;
};

ComplexGrid gen_phantom(const PhantomConfig& config);

/// The real phase noise before scaling to radians, max |value| = 0.5.
RealGrid phase_field(const PhantomConfig& config);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);

struct Manifest {
  std::vector<std::string> paths;  // relative to the manifest's directory
  std::uint64_t checksum = 0;
};

/// Writes item_NNNN.mcdt for items seeded config.seed + i, then manifest.txt: one path
/// per line and a final "checksum <16 hex digits>" line covering every listed file.
Manifest build_dataset(int n_items, const PhantomConfig& config, const std::filesystem::path& out_dir);

Manifest read_manifest(const std::filesystem::path& manifest_path);

/// Reads every item listed in the manifest, verifying the checksum first.
std::vector<ComplexGrid> load_dataset(const std::filesystem::path& manifest_path);

}  // namespace mcddpm
