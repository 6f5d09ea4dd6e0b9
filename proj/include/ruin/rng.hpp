#pragma once

#include <array>
#include <cstdint>

namespace ruin {

/// Philox4x32-10 block function. Maps a 128-bit counter under a 64-bit key to
/// 128 pseudo-random bits; no internal state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream. Every draw is a pure function of
/// (seed, stream_id, draw index), so a path keyed by its stream id reproduces
/// bit-for-bit regardless of which thread runs it or in which order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  /// Standard normal via Box-Muller (both variates are used).
  double normal();
  double exponential(double rate);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::uint64_t draws_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Mixes a tag into a stream id so that independent consumers (e.g. different
/// grid levels or algorithm stages) never share streams.
std::uint64_t derive_stream(std::uint64_t base, std::uint64_t tag);

}  // namespace ruin
