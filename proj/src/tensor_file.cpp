#include <bit>
#include <cstring>
#include <fstream>

#include "mcddpm/error.hpp"
#include "mcddpm/io.hpp"

namespace mcddpm {

void ByteWriter::u16(std::uint16_t v) {
  for (int i = 0; i < 2; ++i) bytes_.push_back(std::uint8_t(v >> (8 * i)));
}
void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(std::uint8_t(v >> (8 * i)));
}
void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(std::uint8_t(v >> (8 * i)));
}
void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
void ByteWriter::raw(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  bytes_.insert(bytes_.end(), p, p + n);
}

void ByteReader::need(std::size_t n) const {
  if (remaining() < n) fail(ErrorKind::Truncated, "unexpected end of file");
}
std::uint8_t ByteReader::u8() {
  need(1);
  return bytes_[pos_++];
}
std::uint16_t ByteReader::u16() {
  need(2);
  std::uint16_t v = std::uint16_t(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}
std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}
std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}
float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }
void ByteReader::raw(void* out, std::size_t n) {
  need(n);
  std::memcpy(out, bytes_.data() + pos_, n);
  pos_ += n;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::Io, "read failed on '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed on '" + path.string() + "'");
}

std::size_t dtype_size(DType d) {
  switch (d) {
    case DType::F32Real: return 4;
    case DType::F32Complex: return 8;
    case DType::U8: return 1;
  }
  fail(ErrorKind::Format, "unknown dtype code");
}

namespace {

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

DType parse_dtype(std::uint8_t code) {
  if (code < 1 || code > 3) fail(ErrorKind::Format, "unknown dtype code " + std::to_string(code));
  return DType(code);
}

RawTensor expect(const std::filesystem::path& path, DType dtype, std::size_t ndim) {
  RawTensor t = read_raw_tensor(path);
  if (t.dtype != dtype || t.dims.size() != ndim)
    fail(ErrorKind::Format, "'" + path.string() + "' holds a different kind of tensor");
  return t;
}

}  // namespace

void write_raw_tensor(const std::filesystem::path& path, const RawTensor& t) {
  require(t.dims.size() <= 255, ErrorKind::InvalidArgument, "write_raw_tensor: too many dimensions");
  require(t.payload.size() == element_count(t.dims) * dtype_size(t.dtype), ErrorKind::ShapeMismatch,
          "write_raw_tensor: payload size does not match dims");
  ByteWriter w;
  w.raw("MCDT", 4);
  w.u16(kTensorFileVersion);
  w.u8(std::uint8_t(t.dtype));
  w.u8(std::uint8_t(t.dims.size()));
  for (auto d : t.dims) w.u32(d);
  w.raw(t.payload.data(), t.payload.size());
  write_file_bytes(path, w.bytes());
}

RawTensor read_raw_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, "MCDT", 4) != 0) fail(ErrorKind::BadMagic, "'" + path.string() + "' is not a tensor file");
  const auto version = r.u16();
  if (version != kTensorFileVersion)
    fail(ErrorKind::UnsupportedVersion, "'" + path.string() + "' has unsupported version " + std::to_string(version));
  RawTensor t;
  t.dtype = parse_dtype(r.u8());
  const int ndim = r.u8();
  for (int i = 0; i < ndim; ++i) t.dims.push_back(r.u32());
  const std::size_t expected = element_count(t.dims) * dtype_size(t.dtype);
  if (r.remaining() < expected) fail(ErrorKind::Truncated, "'" + path.string() + "' payload is truncated");
  if (r.remaining() > expected) fail(ErrorKind::Format, "'" + path.string() + "' has trailing bytes");
  t.payload.resize(expected);
  r.raw(t.payload.data(), expected);
  return t;
}

void write_tensor(const std::filesystem::path& path, const ComplexGrid& grid) {
  ByteWriter w;
  for (const auto& v : grid.data()) {
    w.f32(float(v.real()));
    w.f32(float(v.imag()));
  }
  write_raw_tensor(path, {DType::F32Complex, {std::uint32_t(grid.height()), std::uint32_t(grid.width())}, w.bytes()});
}

ComplexGrid read_tensor(const std::filesystem::path& path) {
  const RawTensor t = expect(path, DType::F32Complex, 2);
  ByteReader r(t.payload);
  ComplexGrid g(int(t.dims[0]), int(t.dims[1]));
  for (auto& v : g.data()) {
    const double re = r.f32();
    const double im = r.f32();
    v = {re, im};
  }
  return g;
}

void write_real_tensor(const std::filesystem::path& path, const RealGrid& grid) {
  ByteWriter w;
  for (double v : grid.data) w.f32(float(v));
  write_raw_tensor(path, {DType::F32Real, {std::uint32_t(grid.height), std::uint32_t(grid.width)}, w.bytes()});
}

RealGrid read_real_tensor(const std::filesystem::path& path) {
  const RawTensor t = expect(path, DType::F32Real, 2);
  ByteReader r(t.payload);
  RealGrid g(int(t.dims[0]), int(t.dims[1]));
  for (auto& v : g.data) v = r.f32();
  return g;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  write_raw_tensor(path, {DType::U8, {std::uint32_t(mask.width())}, mask.columns()});
}

Mask read_mask(const std::filesystem::path& path) {
  RawTensor t = expect(path, DType::U8, 1);
  for (auto b : t.payload)
    if (b > 1) fail(ErrorKind::Format, "'" + path.string() + "' mask entries must be 0 or 1");
  return Mask(std::move(t.payload));
}

}  // namespace mcddpm
