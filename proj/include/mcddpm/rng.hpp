#pragma once

#include <array>
#include <cstdint>

namespace mcddpm {

/// Counter-based Philox4x32-10 stream.
///
/// The output is a pure function of (seed, stream_id, position), so a stream can be
/// copied, split into independent substreams and resumed from a saved position.
/// Normal deviates use Box-Muller; the second deviate of each pair is cached in the
/// state, which is part of what `State` captures.
class RngStream {
 public:
  struct State {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t counter = 0;
    bool has_spare = false;
    double spare = 0.0;

    bool operator==(const State&) const = default;
  };

  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : state_{seed, stream_id, 0, false, 0.0} {}
  explicit RngStream(const State& state) : state_(state) {}

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Fresh stream sharing this seed. Distinct ids give independent sequences.
  RngStream split(std::uint64_t stream_id) const { return RngStream(state_.seed, stream_id); }

  std::uint64_t seed() const { return state_.seed; }
  std::uint64_t stream_id() const { return state_.stream_id; }
  const State& state() const { return state_; }

 private:
  State state_;
};

/// Raw Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

}  // namespace mcddpm
