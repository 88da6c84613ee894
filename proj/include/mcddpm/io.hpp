#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mcddpm/evalkit.hpp"
#include "mcddpm/measurement.hpp"
#include "mcddpm/numerics.hpp"

namespace mcddpm {

/// On-disk tensor container:
///   "MCDT" | u16 version | u8 dtype | u8 ndim | u32 dims[ndim] | payload
/// All integers and payload values are little-endian, payload row-major.
enum class DType : std::uint8_t { F32Real = 1, F32Complex = 2, U8 = 3 };

constexpr std::uint16_t kTensorFileVersion = 1;

struct RawTensor {
  DType dtype = DType::F32Real;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

std::size_t dtype_size(DType d);

void write_raw_tensor(const std::filesystem::path& path, const RawTensor& t);
RawTensor read_raw_tensor(const std::filesystem::path& path);

/// Complex grids are stored as interleaved f32 pairs, so values are rounded to float.
void write_tensor(const std::filesystem::path& path, const ComplexGrid& grid);
ComplexGrid read_tensor(const std::filesystem::path& path);

void write_real_tensor(const std::filesystem::path& path, const RealGrid& grid);
RealGrid read_real_tensor(const std::filesystem::path& path);

/// Masks are u8 [W] in the centred column order.
void write_mask(const std::filesystem::path& path, const Mask& mask);
Mask read_mask(const std::filesystem::path& path);

/// Whole-file helpers shared by the container formats.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

/// Little-endian byte writer / bounds-checked reader.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v);
  void f64(double v);
  void raw(const void* data, std::size_t n);
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32();
  double f64();
  void raw(void* out, std::size_t n);
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace mcddpm
