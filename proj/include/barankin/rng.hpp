#pragma once

#include <array>
#include <cstdint>

namespace barankin::rng {

// Philox4x32-10 counter-based generator. A value is a pure function of
// (seed, stream, counter), so substreams can be handed to threads or batches
// without sharing state and results do not depend on evaluation order.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed,
                                        std::uint64_t stream,
                                        std::uint64_t counter);

// Sequential view over one (seed, stream) counter lane.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  // Uniform on [0,1), 53-bit mantissa.
  double uniform();
  // Uniform on (0,1], safe to pass through log().
  double uniform_open();
  // Standard normal via Box-Muller.
  double normal();

  void fill_normal(double* dst, std::size_t n, double mean, double sd);

 private:
  std::uint64_t next_u64();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 4;  // exhausted
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Stateless 64-bit mix (splitmix64 finalizer), used to derive child seeds.
std::uint64_t mix(std::uint64_t a, std::uint64_t b);

}  // namespace barankin::rng
