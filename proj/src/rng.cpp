#include "mcddpm/rng.hpp"

#include <cmath>
#include <numbers>

#include "mcddpm/error.hpp"

namespace mcddpm {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * b;
  hi = std::uint32_t(p >> 32);
  lo = std::uint32_t(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t RngStream::next_u64() {
  // Each Philox block yields two 64-bit words; the low bit of the counter picks one.
  const std::uint64_t block = state_.counter >> 1;
  const std::array<std::uint32_t, 4> ctr = {
      std::uint32_t(block), std::uint32_t(block >> 32), std::uint32_t(state_.stream_id),
      std::uint32_t(state_.stream_id >> 32)};
  const std::array<std::uint32_t, 2> key = {std::uint32_t(state_.seed),
                                            std::uint32_t(state_.seed >> 32)};
  const auto out = philox4x32(ctr, key);
  const bool second = (state_.counter & 1u) != 0;
  ++state_.counter;
  return second ? (std::uint64_t(out[3]) << 32 | out[2]) : (std::uint64_t(out[1]) << 32 | out[0]);
}

double RngStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t k = next_u64() >> 11;
  return (double(k) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (state_.has_spare) {
    state_.has_spare = false;
    return state_.spare;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  state_.spare = r * std::sin(theta);
  state_.has_spare = true;
  return r * std::cos(theta);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  require(n > 0, ErrorKind::InvalidArgument, "RngStream::below: n must be positive");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x < limit) return x % n;
  }
}

}  // namespace mcddpm
