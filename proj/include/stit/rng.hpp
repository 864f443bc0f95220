#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace stit {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by (master seed, stream id). Draw number k of a
/// stream is a pure function of (seed, stream id, k), so replicate i of an
/// experiment sees the same numbers regardless of thread count or of what
/// other replicates consumed. Distributions below are implemented here
/// rather than taken from <random>, whose algorithms vary between standard
/// libraries; output is bit-reproducible on any IEEE-754 platform.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Exponential with the given rate (> 0).
  double exponential(double rate);
  // Standard normal (Box-Muller, one value per call).
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

// One Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

// SplitMix64 finalizer; used for key derivation.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace stit
